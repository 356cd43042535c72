// piezolab: batch driver for the piezoelectric beam / heat-with-memory lab.
//
//   piezolab <command> CONFIG [--out DIR] [--threads N]
//
// Exit codes: 0 ok, 2 parse error, 3 validation error, 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "output.hpp"
#include "piezo/diagnostics.hpp"
#include "piezo/error.hpp"
#include "piezo/evolution.hpp"
#include "piezo/grid.hpp"
#include "piezo/operator.hpp"
#include "piezo/params.hpp"
#include "piezo/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace piezo;
using namespace piezo::cli;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularOperator:
    case ErrorCode::SolverFailure:
    case ErrorCode::NonPositiveEnergy:
    case ErrorCode::ResolventSingular:
    case ErrorCode::EigensolverFailure:
    case ErrorCode::OnSpectrum:
      return kExitNumerical;
    default:
      return kExitValidation;
  }
}

// Thrown when validation finds a failed check that is not itself an exception
// (the Dafermos condition is reported, not thrown, by the library).
struct ValidationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double poincare(const RunConfig& cfg) { return cfg.poincare_cp.value_or(poincare_one_end(cfg.coefficients.length)); }

struct Setup {
  PhysicalParams params;
  MemoryKernel kernel;
  GridSpec grid;
  DiscreteOperator op;
};

json run_validation(const RunConfig& cfg, std::optional<Setup>* setup) {
  json checks = json::array();
  bool ok = true;
  auto record = [&](const std::string& name, bool pass, const std::string& msg, json extra = json::object()) {
    extra["name"] = name;
    extra["ok"] = pass;
    extra["message"] = msg;
    checks.push_back(std::move(extra));
    ok = ok && pass;
  };

  std::optional<PhysicalParams> params;
  try {
    params = make_params(cfg.coefficients);
    record("params", true, "", {{"alpha", params->alpha()}, {"wave_speed", params->wave_speed()}});
  } catch (const Error& e) {
    record("params", false, e.what(), {{"code", std::string(to_string(e.code()))}});
  }

  std::optional<MemoryKernel> kernel;
  try {
    kernel = make_kernel(cfg.kernel);
    record("kernel", true, "", {{"kind", cfg.kernel.kind}, {"g0", kernel->g0()}, {"d_sigma", kernel->d_sigma()}});
  } catch (const Error& e) {
    record("kernel", false, e.what(), {{"code", std::string(to_string(e.code()))}});
  }

  if (kernel) {
    const auto grid = default_dafermos_grid(*kernel);
    const auto rep = check_dafermos(*kernel, grid);
    record("dafermos", rep.holds, rep.holds ? "" : "sigma' + d_sigma sigma > 0 somewhere",
           {{"worst_margin", rep.worst_margin}, {"worst_at", rep.worst_at}});
  }

  std::optional<GridSpec> grid;
  if (params && kernel) {
    try {
      grid = build_grid(*params, *kernel, cfg.n_x, cfg.n_s);
      record("grid", true, "",
             {{"n_x", grid->n_x}, {"n_s", grid->n_s}, {"dim", grid->dim()}, {"h", grid->h}, {"s_max", grid->s_max}});
    } catch (const Error& e) {
      record("grid", false, e.what(), {{"code", std::string(to_string(e.code()))}});
    }
  }

  const double cp = poincare(cfg);
  const bool cp_ok = std::isfinite(cp) && cp > 0;
  record("poincare_cp", cp_ok, cp_ok ? "" : "poincare_cp must be positive", {{"value", finite_or_null(cp)}});

  if (ok && setup) setup->emplace(Setup{*params, *kernel, *grid, assemble(*params, *kernel, *grid)});
  return {{"ok", ok}, {"checks", checks}};
}

Setup prepare(const RunConfig& cfg) {
  std::optional<Setup> setup;
  const json report = run_validation(cfg, &setup);
  if (!setup) {
    for (const auto& c : report["checks"]) {
      if (!c["ok"].get<bool>()) throw ValidationFailed(c["name"].get<std::string>() + ": " + c["message"].get<std::string>());
    }
    throw ValidationFailed("configuration rejected");
  }
  return std::move(*setup);
}

json config_json(const Setup& s) {
  return {{"m", s.params.m()}, {"c", s.params.c()}, {"length", s.params.length()},
          {"n_x", s.grid.n_x},  {"n_s", s.grid.n_s}, {"dim", s.grid.dim()}};
}

// ---- simulate ------------------------------------------------------------------

json fit_json(const DecayFit& f) {
  return {{"model", f.model == DecayFit::Model::Exponential ? "exponential" : "polynomial"},
          {"coefficient", f.coefficient},
          {"rate", f.rate},
          {"r_squared", f.r_squared},
          {"window", {f.window.lo, f.window.hi}},
          {"samples", f.samples}};
}

std::string regime_hint(double m) {
  if (m == 0.0) return "Fourier limit";
  if (m == 1.0) return "Gurtin-Pipkin";
  return "Coleman-Gurtin";
}

std::string expected_decay(double m) {
  return m == 1.0 ? "polynomial (t^-1 upper bound)" : "exponential";
}

json cmd_simulate(const RunConfig& cfg, const Setup& s, const fs::path& out) {
  const Trajectory traj = simulate(s.op, cfg.sim);
  const IdentityResidual resid = energy_identity_residual(s.op, traj);
  const auto& g = s.grid;

  std::ostringstream tcsv;
  tcsv << "t";
  for (const char* name : {"u", "v", "y", "z"}) {
    for (int j = 0; j < g.n_x; ++j) tcsv << ',' << name << j;
  }
  for (int i = 1; i < g.n_x; ++i) tcsv << ",w" << i;
  tcsv << '\n';
  const Eigen::Index stored = g.offset_w() + g.thermal_size();
  for (std::size_t n = 0; n < traj.times.size(); ++n) {
    tcsv << fmt(traj.times[n]);
    for (Eigen::Index k = 0; k < stored; ++k) tcsv << ',' << fmt(traj.states[n][k]);
    tcsv << '\n';
  }
  write_text(out / "trajectory.csv", tcsv.str());

  std::ostringstream ecsv;
  ecsv << "t,e1,e2,e3,total,flux_diss,memory_diss,identity_residual\n";
  std::vector<double> totals;
  double worst_growth = 0.0;
  for (std::size_t n = 0; n < traj.times.size(); ++n) {
    const auto& e = traj.energies[n];
    const double r = n == 0 ? 0.0 : resid.per_interval[n - 1];
    ecsv << fmt(traj.times[n]) << ',' << fmt(e.e1) << ',' << fmt(e.e2) << ',' << fmt(e.e3) << ',' << fmt(e.total)
         << ',' << fmt(e.flux_dissipation) << ',' << fmt(e.memory_dissipation) << ',' << fmt(r) << '\n';
    totals.push_back(e.total);
    if (n > 0 && totals[n - 1] > 0) worst_growth = std::max(worst_growth, e.total / totals[n - 1] - 1.0);
  }
  write_text(out / "energy.csv", ecsv.str());

  const double t_end = traj.times.back();
  const FitWindow window = cfg.fit_window.value_or(default_fit_window(s.params, t_end));
  json model = {{"selected", nullptr}, {"exponential", nullptr}, {"polynomial", nullptr}, {"note", ""}};
  std::optional<DecayFit> expo, poly;
  try {
    expo = fit_exponential(traj.times, totals, window);
    poly = fit_polynomial(traj.times, totals, window);
  } catch (const Error& e) {
    model["note"] = e.what();
  }
  if (expo) model["exponential"] = fit_json(*expo);
  if (poly) model["polynomial"] = fit_json(*poly);
  if (expo && poly) model["selected"] = expo->r_squared >= poly->r_squared ? "exponential" : "polynomial";

  json summary = {
      {"config", config_json(s)},
      {"dt", traj.dt},
      {"t_final", t_end},
      {"records", traj.times.size()},
      {"energy", {{"initial", totals.front()}, {"final", totals.back()}, {"max_relative_growth", worst_growth}}},
      {"identity_residual_max", resid.max_abs},
      {"fit_window", {window.lo, window.hi}},
      {"decay_model", model},
      {"regime_hint", regime_hint(s.params.m())},
      {"expected_decay", expected_decay(s.params.m())},
  };
  write_json(out / "summary.json", summary);

  write_text(out / "energy.svg", loglog_svg("Energy", "t", "E(t)", {{"total energy", traj.times, totals}}));
  return summary;
}

// ---- spectrum / scan / classify ----------------------------------------------------

json eigen_json(const EigenSummary& e) {
  return {{"count", e.count},
          {"max_real", e.max_real},
          {"min_modulus", e.min_modulus},
          {"min_axis_distance", e.min_axis_distance},
          {"low_frequency_gap", finite_or_null(e.low_frequency_gap)},
          {"low_frequency_cutoff", e.low_frequency_cutoff}};
}

EigenSummary cmd_spectrum(const Setup& s, const fs::path& out) {
  const auto eigs = eigenvalues(s.op);
  std::ostringstream csv;
  csv << "re,im\n";
  for (const auto& mu : eigs) csv << fmt(mu.real()) << ',' << fmt(mu.imag()) << '\n';
  write_text(out / "eigs.csv", csv.str());

  const EigenSummary sum = summarize(s.op, eigs);
  write_json(out / "spectrum.json", {{"config", config_json(s)}, {"eigen", eigen_json(sum)}});
  return sum;
}

ResolventScan cmd_scan(const RunConfig& cfg, const Setup& s, int threads, const fs::path& out) {
  const auto lambdas = log_grid(cfg.scan.lambda_min, cfg.scan.lambda_max, cfg.scan.points);
  ScanOptions opts;
  opts.method = cfg.scan.method;
  opts.tail_decades = cfg.scan.tail_decades;
  opts.threads = threads;
  const ResolventScan scan = resolvent_scan(s.op, lambdas, opts);

  std::ostringstream csv;
  csv << "lambda,norm,norm_over_lambda_sq\n";
  std::vector<double> scaled(scan.lambdas.size());
  for (std::size_t i = 0; i < scan.lambdas.size(); ++i) {
    const double l = scan.lambdas[i];
    scaled[i] = scan.norms[i] / (l * l);
    csv << fmt(l) << ',' << fmt(scan.norms[i]) << ',' << fmt(scaled[i]) << '\n';
  }
  write_text(out / "scan.csv", csv.str());
  write_text(out / "scan.svg", loglog_svg("Resolvent norm on the imaginary axis", "lambda", "norm",
                                          {{"|R(i lambda)|", scan.lambdas, scan.norms},
                                           {"|R(i lambda)| / lambda^2", scan.lambdas, scaled}}));
  return scan;
}

json scan_json(const RunConfig& cfg, const ResolventScan& scan) {
  static const char* methods[] = {"auto", "dense", "iterative"};
  return {{"lambda_min", cfg.scan.lambda_min},
          {"lambda_max", cfg.scan.lambda_max},
          {"points", cfg.scan.points},
          {"method", methods[static_cast<int>(cfg.scan.method)]},
          {"tail", {scan.tail_lo, scan.tail_hi}},
          {"tail_points", scan.tail_points},
          {"growth_exponent", scan.growth_exponent},
          {"max_norm", scan.max_norm},
          {"singular_points", scan.singular_count()},
          {"tail_block_maxima_over_lambda_sq", tail_block_maxima(scan, 4, 2.0)}};
}

json classify_json(const RunConfig& cfg, const Setup& s, int threads, const fs::path& out) {
  const EigenSummary eig = cmd_spectrum(s, out);
  const ResolventScan scan = cmd_scan(cfg, s, threads, out);
  const RegimeReport rep = classify(scan, eig, cfg.scan.tail_decades);
  return {{"config", config_json(s)},
          {"regime", to_string(rep.regime)},
          {"growth_exponent", rep.growth_exponent},
          {"max_norm", rep.max_norm},
          {"singular_points", rep.singular_points},
          {"eigen_evidence", rep.eigen_evidence},
          {"eigen", eigen_json(rep.eigen)},
          {"rationale", rep.rationale},
          {"caveat", rep.caveat},
          {"scan", scan_json(cfg, scan)}};
}

// ---- report --------------------------------------------------------------------

json bounds_json(const RunConfig& cfg, const Setup& s) {
  const double m = s.params.m();
  if (m <= 0.0 || m >= 1.0) return {{"applicable", false}, {"reason", "needs 0 < m < 1"}};
  const DissipationConstants k = dissipation_constants(s.params, s.kernel, poincare(cfg));
  std::uint64_t seed = 0;
  if (const auto* r = std::get_if<SeededRandomInitial>(&cfg.sim.initial)) seed = r->seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(-50.0, 50.0);
  std::normal_distribution<double> normal;
  std::array<double, 4> worst{};
  bool all = true;
  for (int p = 0; p < cfg.bound_probes; ++p) {
    const double l = lam(rng);
    StateVector f(s.op.dim());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
    const DissipationBoundsReport rep = check_dissipation_bounds(s.op, l, f, k);
    for (int i = 0; i < 4; ++i) worst[i] = std::max(worst[i], rep.ratio[i]);
    all = all && rep.satisfied();
  }
  return {{"applicable", true},
          {"probes", cfg.bound_probes},
          {"poincare_cp", poincare(cfg)},
          {"constants", {k.k1, k.k2, k.k3, k.k4}},
          {"worst_ratio", worst},
          {"satisfied", all}};
}

// ---- dispatch ------------------------------------------------------------------

struct Invocation {
  std::string command;
  std::string config;
  std::string out;
  int threads = 0;
  bool dump_matrix = false;
};

int run(const Invocation& inv) {
  RunConfig cfg;
  try {
    cfg = load_config(inv.config);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << inv.config << ": " << e.what() << '\n';
    return kExitParse;
  }
  const fs::path out = inv.out.empty() ? cfg.output_dir : fs::path(inv.out);

  try {
    if (inv.command == "validate") {
      const json rep = run_validation(cfg, nullptr);
      write_json(out / "validation.json", rep);
      std::cout << rep.dump(2) << '\n';
      return rep["ok"].get<bool>() ? 0 : kExitValidation;
    }

    const Setup s = prepare(cfg);
    if (inv.command == "simulate") {
      cmd_simulate(cfg, s, out);
    } else if (inv.command == "spectrum") {
      cmd_spectrum(s, out);
      if (inv.dump_matrix) {
        std::ostringstream a, m;
        write_matrix(a, s.op.matrix());
        write_matrix(m, s.op.gram());
        write_text(out / "A.txt", a.str());
        write_text(out / "M.txt", m.str());
      }
    } else if (inv.command == "scan") {
      const ResolventScan scan = cmd_scan(cfg, s, inv.threads, out);
      write_json(out / "scan.json", {{"config", config_json(s)}, {"scan", scan_json(cfg, scan)}});
    } else if (inv.command == "classify") {
      write_json(out / "report.json", classify_json(cfg, s, inv.threads, out));
    } else if (inv.command == "report") {
      json rep = classify_json(cfg, s, inv.threads, out);
      rep["validation"] = run_validation(cfg, nullptr);
      rep["simulation"] = cmd_simulate(cfg, s, out);
      rep["dissipation_bounds"] = bounds_json(cfg, s);
      write_json(out / "report.json", rep);
    }
    std::cerr << inv.command << ": wrote " << out.string() << '\n';
    return 0;
  } catch (const ValidationFailed& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << (exit_code(e.code()) == kExitNumerical ? "numerical failure: " : "validation error: ") << e.what()
              << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piezolab: piezoelectric beam with heat conduction of memory type"};
  app.require_subcommand(1);
  Invocation inv;

  const std::pair<const char*, const char*> commands[] = {
      {"validate", "check parameters, kernel and grid"},
      {"simulate", "time-step and write trajectory.csv, energy.csv, summary.json"},
      {"spectrum", "eigenvalues to eigs.csv and spectrum.json"},
      {"scan", "resolvent norms on the imaginary axis to scan.csv"},
      {"classify", "spectrum + scan + decay regime to report.json"},
      {"report", "everything above in one report.json"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", inv.config, "configuration file")->required();
    sub->add_option("-o,--out", inv.out, "output directory (overrides [output] dir)");
    if (std::string(name) != "validate" && std::string(name) != "simulate") {
      sub->add_option("-j,--threads", inv.threads, "worker threads (0: hardware, capped by PIEZO_THREADS)")
          ->check(CLI::NonNegativeNumber);
    }
    if (std::string(name) == "spectrum") {
      sub->add_flag("--dump-matrix", inv.dump_matrix, "also write A.txt and M.txt");
    }
    sub->callback([&inv, n = std::string(name)] { inv.command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kExitParse;
  }
  return run(inv);
}
