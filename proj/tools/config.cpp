#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace piezo::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(line, key + ": '" + v + "' is not a number");
  return out;
}

long to_long(const std::string& v, int line, const std::string& key) {
  long out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(line, key + ": '" + v + "' is not an integer");
  return out;
}

std::vector<double> to_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), line, key));
  return out;
}

Bump to_bump(const std::string& v, int line, const std::string& key) {
  const auto xs = to_list(v, line, key);
  if (xs.size() != 3) throw ParseError(line, key + ": expected center, width, amplitude");
  return {xs[0], xs[1], xs[2]};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.sim.t_final = 20.0;
  cfg.sim.record_every = 1;
  cfg.sim.initial = SeededRandomInitial{0};

  std::string initial = "random";
  std::uint64_t seed = 0;
  SineModeInitial sine;
  SmoothBumpInitial bump;
  std::optional<double> fit_lo, fit_hi;

  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(line, "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      static const char* known[] = {"params", "kernel", "grid", "sim", "scan", "bounds", "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string val = trim(body.substr(eq + 1));
    if (section.empty()) throw ParseError(line, "key '" + key + "' outside any section");
    if (val.empty()) throw ParseError(line, key + ": missing value");
    const std::string full = section + "." + key;
    auto num = [&] { return to_double(val, line, full); };
    auto integer = [&] { return to_long(val, line, full); };

    auto& c = cfg.coefficients;
    if (section == "params") {
      static const std::map<std::string, double RawCoefficients::*> fields = {
          {"rho", &RawCoefficients::rho},     {"alpha1", &RawCoefficients::alpha1}, {"gamma", &RawCoefficients::gamma},
          {"beta", &RawCoefficients::beta},   {"mu", &RawCoefficients::mu},         {"delta", &RawCoefficients::delta},
          {"c", &RawCoefficients::c},         {"m", &RawCoefficients::m},           {"length", &RawCoefficients::length}};
      const auto it = fields.find(key);
      if (it == fields.end()) throw ParseError(line, "unknown key " + full);
      c.*(it->second) = num();
    } else if (section == "kernel") {
      if (key == "kind") {
        if (val != "exponential" && val != "tabulated") throw ParseError(line, "kernel.kind must be exponential or tabulated");
        cfg.kernel.kind = val;
      } else if (key == "k") {
        cfg.kernel.k = num();
      } else if (key == "s") {
        cfg.kernel.s = to_list(val, line, full);
      } else if (key == "sigma") {
        cfg.kernel.sigma = to_list(val, line, full);
      } else if (key == "d_sigma") {
        cfg.kernel.d_sigma = num();
      } else {
        throw ParseError(line, "unknown key " + full);
      }
    } else if (section == "grid") {
      if (key == "n_x") cfg.n_x = static_cast<int>(integer());
      else if (key == "n_s") cfg.n_s = static_cast<int>(integer());
      else throw ParseError(line, "unknown key " + full);
    } else if (section == "sim") {
      if (key == "dt") cfg.sim.dt = num();
      else if (key == "t_final") cfg.sim.t_final = num();
      else if (key == "record_every") cfg.sim.record_every = static_cast<int>(integer());
      else if (key == "initial") {
        if (val != "zero" && val != "sine" && val != "bump" && val != "random") {
          throw ParseError(line, "sim.initial must be zero, sine, bump or random");
        }
        initial = val;
      } else if (key == "seed") {
        const long s = integer();
        if (s < 0) throw ParseError(line, "sim.seed must be >= 0");
        seed = static_cast<std::uint64_t>(s);
      } else if (key == "modes") {
        const auto xs = to_list(val, line, full);
        if (xs.size() != kInitialBlocks) throw ParseError(line, "sim.modes needs 5 integers (u, v, y, z, w)");
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (xs[i] != std::floor(xs[i])) throw ParseError(line, "sim.modes entries must be integers");
          sine.modes[i] = static_cast<int>(xs[i]);
        }
      } else if (key == "amplitude") {
        sine.amplitude = num();
      } else if (key.rfind("bump_", 0) == 0) {
        static const std::map<std::string, int> blocks = {{"bump_u", 0}, {"bump_v", 1}, {"bump_y", 2}, {"bump_z", 3}, {"bump_w", 4}};
        const auto it = blocks.find(key);
        if (it == blocks.end()) throw ParseError(line, "unknown key " + full);
        bump.bumps[static_cast<std::size_t>(it->second)] = to_bump(val, line, full);
      } else if (key == "past_decay") {
        if (val == "none") cfg.sim.past = std::nullopt;
        else cfg.sim.past = PastHistory{num()};
      } else if (key == "fit_lo") {
        fit_lo = num();
      } else if (key == "fit_hi") {
        fit_hi = num();
      } else {
        throw ParseError(line, "unknown key " + full);
      }
    } else if (section == "scan") {
      if (key == "lambda_min") cfg.scan.lambda_min = num();
      else if (key == "lambda_max") cfg.scan.lambda_max = num();
      else if (key == "points") cfg.scan.points = static_cast<int>(integer());
      else if (key == "tail_decades") cfg.scan.tail_decades = num();
      else if (key == "method") {
        if (val == "auto") cfg.scan.method = ResolventMethod::Auto;
        else if (val == "dense") cfg.scan.method = ResolventMethod::DenseSvd;
        else if (val == "iterative") cfg.scan.method = ResolventMethod::Iterative;
        else throw ParseError(line, "scan.method must be auto, dense or iterative");
      } else {
        throw ParseError(line, "unknown key " + full);
      }
    } else if (section == "bounds") {
      if (key == "poincare_cp") cfg.poincare_cp = num();
      else if (key == "probes") cfg.bound_probes = static_cast<int>(integer());
      else throw ParseError(line, "unknown key " + full);
    } else if (section == "output") {
      if (key == "dir") cfg.output_dir = val;
      else throw ParseError(line, "unknown key " + full);
    }
  }

  if (initial == "zero") cfg.sim.initial = ZeroInitial{};
  else if (initial == "sine") cfg.sim.initial = sine;
  else if (initial == "bump") cfg.sim.initial = bump;
  else cfg.sim.initial = SeededRandomInitial{seed};
  if (fit_lo || fit_hi) {
    cfg.fit_window = FitWindow{fit_lo.value_or(0.0), fit_hi.value_or(cfg.sim.t_final)};
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(0, "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

MemoryKernel make_kernel(const KernelConfig& cfg) {
  if (cfg.kind == "tabulated") return MemoryKernel::tabulated(cfg.s, cfg.sigma, cfg.d_sigma);
  return MemoryKernel::exponential(cfg.k);
}

}  // namespace piezo::cli
