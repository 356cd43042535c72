#include "piezo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "piezo/error.hpp"
#include "piezo/evolution.hpp"

namespace piezo {

EnergyBreakdown energy(const DiscreteOperator& op, const StateVector& state) {
  if (state.size() != op.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "energy: state length " + std::to_string(state.size()) +
                                              " != " + std::to_string(op.dim()));
  }
  const GridSpec& g = op.grid();
  const PhysicalParams& p = op.params();
  const double h = g.h;
  const Eigen::Index n = g.mech_size(), nt = g.thermal_size();
  const Eigen::VectorXd& wm = op.mech_weights();

  const Eigen::VectorXd ux = op.mech_diff() * state.segment(g.offset_u(), n);
  const Eigen::VectorXd yx = op.mech_diff() * state.segment(g.offset_y(), n);
  const Eigen::VectorXd mix = p.gamma() * ux - yx;

  EnergyBreakdown e;
  e.e1 = 0.5 * (p.rho() * h * state.segment(g.offset_v(), n).squaredNorm() +
                p.alpha1() * ux.dot(wm.cwiseProduct(ux)));
  e.e2 = 0.5 * (p.mu() * h * state.segment(g.offset_z(), n).squaredNorm() + p.beta() * mix.dot(wm.cwiseProduct(mix)));
  double mem = 0.0;
  for (int k = 0; k < g.n_s; ++k) {
    mem += g.memory_weights[static_cast<std::size_t>(k)] *
           (op.node_diff() * state.segment(g.offset_eta(k), nt)).squaredNorm();
  }
  e.e3 = 0.5 * h * state.segment(g.offset_w(), nt).squaredNorm() + 0.5 * p.c() * p.m() * h * mem;
  e.total = e.e1 + e.e2 + e.e3;

  const DissipationTerms d = dissipation_form(op, state);
  e.flux_dissipation = d.flux;
  e.memory_dissipation = d.memory;
  return e;
}

IdentityResidual energy_identity_residual(const DiscreteOperator&, const Trajectory& trajectory) {
  IdentityResidual out;
  const auto& t = trajectory.times;
  const auto& e = trajectory.energies;
  for (std::size_t n = 0; n + 1 < t.size(); ++n) {
    const double dt = t[n + 1] - t[n];
    const double rate = (e[n + 1].total - e[n].total) / dt;
    const double d0 = e[n].flux_dissipation + e[n].memory_dissipation;
    const double d1 = e[n + 1].flux_dissipation + e[n + 1].memory_dissipation;
    const double r = rate - 0.5 * (d0 + d1);
    out.per_interval.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
  }
  return out;
}

double DissipationBoundsReport::worst_ratio() const { return *std::max_element(ratio.begin(), ratio.end()); }

bool DissipationBoundsReport::satisfied(double tolerance) const { return vacuous || worst_ratio() <= tolerance; }

DissipationBoundsReport check_dissipation_bounds(const DiscreteOperator& op, double lambda, const StateVector& f,
                            const DissipationConstants& k) {
  const double m = op.params().m();
  if (!(m > 0.0 && m < 1.0)) throw Error(ErrorCode::MixingAtEndpoint, "the dissipation bounds need 0 < m < 1");
  if (f.size() != op.dim()) throw Error(ErrorCode::ShapeMismatch, "check_dissipation_bounds: wrong rhs length");

  DissipationBoundsReport rep;
  rep.lambda = lambda;
  rep.f_norm = energy_norm(op, f);
  if (rep.f_norm == 0.0) {
    rep.vacuous = true;
    return rep;
  }

  ComplexState u;
  if (lambda == 0.0) {
    u = solve_static(op, f).cast<std::complex<double>>();
  } else {
    u = ShiftedSolver(op, lambda).solve(f.cast<std::complex<double>>());
  }
  rep.u_norm = energy_norm(op, u);

  const GridSpec& g = op.grid();
  const double h = g.h;
  const Eigen::Index nt = g.thermal_size();
  const ComplexState w = u.segment(g.offset_w(), nt);
  ComplexState lam = (1.0 - m) * w;
  double eta_sq = 0.0;
  for (int q = 0; q < g.n_s; ++q) {
    const double mu_q = g.memory_weights[static_cast<std::size_t>(q)];
    const ComplexState eta = u.segment(g.offset_eta(q), nt);
    eta_sq += mu_q * (op.node_diff() * eta).squaredNorm();
    lam += m * mu_q * eta;
  }
  rep.lhs = {h * (op.node_diff() * w).squaredNorm(), h * eta_sq, h * w.squaredNorm(),
             h * (op.node_diff() * lam).squaredNorm()};
  const std::array<double, 4> kk{k.k1, k.k2, k.k3, k.k4};
  for (std::size_t i = 0; i < 4; ++i) {
    rep.bound[i] = kk[i] * rep.f_norm * rep.u_norm;
    rep.ratio[i] = rep.lhs[i] / rep.bound[i];
  }
  return rep;
}

FitWindow default_fit_window(const PhysicalParams& params, double t_end) {
  return {5.0 * params.length() / params.wave_speed(), t_end};
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  // A perfectly flat series is explained exactly by its mean.
  f.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return f;
}

DecayFit fit_log(const std::vector<double>& times, const std::vector<double>& energies, FitWindow window,
                 bool log_time) {
  if (times.size() != energies.size()) throw Error(ErrorCode::ShapeMismatch, "times and energies differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window.lo || times[i] > window.hi) continue;
    if (!(energies[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveEnergy, "energy " + std::to_string(energies[i]) +
                                                    " at t=" + std::to_string(times[i]) + " inside the fit window");
    }
    if (log_time && !(times[i] > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "polynomial fit window must exclude t = 0");
    }
    x.push_back(log_time ? std::log(times[i]) : times[i]);
    y.push_back(std::log(energies[i]));
  }
  if (x.size() < 2) throw Error(ErrorCode::InvalidConfig, "fit window holds fewer than two samples");
  const LineFit lf = least_squares(x, y);
  DecayFit out;
  out.model = log_time ? DecayFit::Model::Polynomial : DecayFit::Model::Exponential;
  out.coefficient = std::exp(lf.intercept);
  out.rate = lf.slope == 0.0 ? 0.0 : -lf.slope;
  out.r_squared = lf.r2;
  out.window = window;
  out.samples = static_cast<int>(x.size());
  return out;
}

}  // namespace

DecayFit fit_exponential(const std::vector<double>& times, const std::vector<double>& energies, FitWindow window) {
  return fit_log(times, energies, window, false);
}

DecayFit fit_polynomial(const std::vector<double>& times, const std::vector<double>& energies, FitWindow window) {
  return fit_log(times, energies, window, true);
}

}  // namespace piezo
