#include "piezo/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "piezo/error.hpp"

namespace piezo {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, std::string(name) + " is not finite");
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (!(v > 0.0)) {
    throw Error(ErrorCode::NonPositiveCoefficient,
                std::string(name) + " must be > 0, got " + std::to_string(v));
  }
}

}  // namespace

PhysicalParams::PhysicalParams(const RawCoefficients& raw)
    : raw_(raw), alpha_(raw.alpha1 + raw.gamma * raw.gamma * raw.beta) {}

double PhysicalParams::wave_speed() const { return std::sqrt(alpha_ / raw_.rho); }

PhysicalParams make_params(const RawCoefficients& raw) {
  require_positive(raw.rho, "rho");
  require_positive(raw.alpha1, "alpha1");
  require_positive(raw.gamma, "gamma");
  require_positive(raw.beta, "beta");
  require_positive(raw.mu, "mu");
  require_positive(raw.delta, "delta");
  require_positive(raw.c, "c");
  require_positive(raw.length, "length");
  require_finite(raw.m, "m");
  if (raw.m < 0.0 || raw.m > 1.0) {
    throw Error(ErrorCode::MixingOutOfRange, "m must lie in [0,1], got " + std::to_string(raw.m));
  }
  return PhysicalParams(raw);
}

MemoryKernel MemoryKernel::exponential(double k) {
  require_positive(k, "kernel rate k");
  MemoryKernel kern;
  kern.kind_ = Kind::ExponentialPrototype;
  kern.rate_ = k;
  kern.g0_ = 1.0;
  kern.d_sigma_ = k;
  kern.sigma0_ = k;
  return kern;
}

MemoryKernel MemoryKernel::tabulated(std::vector<double> s, std::vector<double> sigma,
                                     double d_sigma) {
  if (s.size() != sigma.size() || s.size() < 2) {
    throw Error(ErrorCode::InvalidKernel, "tabulated kernel needs >= 2 (s, sigma) pairs of equal length");
  }
  require_positive(d_sigma, "d_sigma");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || !std::isfinite(sigma[i])) {
      throw Error(ErrorCode::InvalidKernel, "tabulated kernel has non-finite samples");
    }
    if (sigma[i] < 0.0) throw Error(ErrorCode::InvalidKernel, "sigma must be >= 0");
    if (i > 0 && !(s[i] > s[i - 1])) throw Error(ErrorCode::InvalidKernel, "s samples must be strictly increasing");
    if (i > 0 && sigma[i] > sigma[i - 1]) {
      throw Error(ErrorCode::InvalidKernel,
                  "sigma must be nonincreasing (violated at s=" + std::to_string(s[i]) + ")");
    }
  }
  if (s.front() < 0.0) throw Error(ErrorCode::InvalidKernel, "s samples must be >= 0");
  if (!(sigma.front() > 0.0)) throw Error(ErrorCode::InvalidKernel, "sigma(0) must be > 0");

  MemoryKernel kern;
  kern.kind_ = Kind::Tabulated;
  kern.d_sigma_ = d_sigma;
  kern.sigma0_ = sigma.front();
  kern.s_ = std::move(s);
  kern.sigma_ = std::move(sigma);
  const std::size_t n = kern.s_.size();
  kern.tail_.assign(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    kern.tail_[i] = kern.tail_[i + 1] +
                    0.5 * (kern.s_[i + 1] - kern.s_[i]) * (kern.sigma_[i] + kern.sigma_[i + 1]);
  }
  kern.g0_ = kern.tail_[0] + kern.s_[0] * kern.sigma_[0];
  return kern;
}

double MemoryKernel::sigma(double s) const {
  if (kind_ == Kind::ExponentialPrototype) return rate_ * std::exp(-rate_ * s);
  if (s <= s_.front()) return sigma_.front();
  if (s > s_.back()) return 0.0;
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - s_.begin()), s_.size() - 1);
  const double t = (s - s_[i - 1]) / (s_[i] - s_[i - 1]);
  return (1.0 - t) * sigma_[i - 1] + t * sigma_[i];
}

double MemoryKernel::sigma_prime(double s) const {
  if (kind_ == Kind::ExponentialPrototype) return -rate_ * rate_ * std::exp(-rate_ * s);
  if (s < s_.front() || s > s_.back()) return 0.0;
  const std::size_t n = s_.size();
  const auto it = std::lower_bound(s_.begin(), s_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - s_.begin());
  const double scale = std::max(1.0, std::abs(s));
  if (i < n && std::abs(s_[i] - s) <= 1e-12 * scale) {
    // on a sample: centred difference, one-sided at the ends of the table
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? i : i + 1;
    return (sigma_[hi] - sigma_[lo]) / (s_[hi] - s_[lo]);
  }
  return (sigma_[i] - sigma_[i - 1]) / (s_[i] - s_[i - 1]);
}

double MemoryKernel::g(double s) const {
  if (kind_ == Kind::ExponentialPrototype) return std::exp(-rate_ * s);
  if (s <= s_.front()) return tail_.front() + (s_.front() - s) * sigma_.front();
  if (s >= s_.back()) return 0.0;
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - s_.begin());
  return tail_[i] + 0.5 * (s_[i] - s) * (sigma(s) + sigma_[i]);
}

double MemoryKernel::truncation_point(double rel_tol) const {
  const double target = rel_tol * g0_;
  if (kind_ == Kind::ExponentialPrototype) {
    double s = std::log(1.0 / rel_tol) / rate_;
    while (g(s) >= target) s *= 1.0 + 1e-12;
    return s;
  }
  double lo = 0.0;
  double hi = s_.back();
  for (int it = 0; it < 200 && hi - lo > 1e-14 * s_.back(); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? hi : lo) = mid;
  }
  return hi;
}

double eval_sigma(const MemoryKernel& kernel, double s) {
  if (!(s >= 0.0)) throw Error(ErrorCode::NegativeArgument, "sigma evaluated at s=" + std::to_string(s));
  return kernel.sigma(s);
}

DafermosReport check_dafermos(const MemoryKernel& kernel, std::span<const double> grid, double tol) {
  if (grid.size() < 3) throw Error(ErrorCode::DegenerateGrid, "Dafermos check needs >= 3 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::DegenerateGrid, "grid must be strictly increasing");
  }
  DafermosReport rep;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double fd = (eval_sigma(kernel, grid[i + 1]) - eval_sigma(kernel, grid[i - 1])) /
                      (grid[i + 1] - grid[i - 1]);
    const double margin = fd + kernel.d_sigma() * eval_sigma(kernel, grid[i]);
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_at = grid[i];
    }
  }
  rep.holds = rep.worst_margin <= tol * kernel.sigma0();
  return rep;
}

std::vector<double> default_dafermos_grid(const MemoryKernel& kernel, int points) {
  if (kernel.kind() == MemoryKernel::Kind::Tabulated && kernel.sample_s().size() >= 3) {
    return kernel.sample_s();
  }
  const double smax = kernel.truncation_point();
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = smax * i / (points - 1);
  return grid;
}

DissipationConstants dissipation_constants(const PhysicalParams& params, const MemoryKernel& kernel,
                               double poincare_cp) {
  const double m = params.m();
  if (m <= 0.0 || m >= 1.0) {
    throw Error(ErrorCode::MixingAtEndpoint, "dissipation constants need 0 < m < 1, got m=" + std::to_string(m));
  }
  require_positive(poincare_cp, "poincare_cp");
  const double c = params.c();
  const double d = kernel.d_sigma();
  DissipationConstants k;
  k.k1 = 1.0 / (c * (1.0 - m));
  k.k2 = 2.0 / (c * m * d);
  k.k3 = poincare_cp * k.k1;
  k.k4 = 2.0 * (1.0 - m) / c + 4.0 * kernel.g0() / (c * m * d);
  return k;
}

double poincare_one_end(double length) {
  const double r = 2.0 * length / std::numbers::pi;
  return r * r;
}

double poincare_two_ends(double length) {
  const double r = length / std::numbers::pi;
  return r * r;
}

}  // namespace piezo
