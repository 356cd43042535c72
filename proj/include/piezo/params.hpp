#pragma once

#include <span>
#include <vector>

namespace piezo {

// Unvalidated input to make_params. alpha is never an input: it is derived.
struct RawCoefficients {
  double rho = 1.0;     // mass density
  double alpha1 = 1.0;  // elastic stiffness
  double gamma = 1.0;   // piezoelectric coefficient
  double beta = 1.0;
  double mu = 1.0;      // magnetic permeability
  double delta = 1.0;   // thermal coupling
  double c = 1.0;       // diffusivity scale
  double m = 0.5;       // Coleman-Gurtin mixing, 0 = Fourier, 1 = Gurtin-Pipkin
  double length = 1.0;
};

/// Validated beam/thermal coefficients. Only constructible through make_params.
class PhysicalParams {
 public:
  double rho() const { return raw_.rho; }
  double alpha1() const { return raw_.alpha1; }
  double gamma() const { return raw_.gamma; }
  double beta() const { return raw_.beta; }
  double mu() const { return raw_.mu; }
  double delta() const { return raw_.delta; }
  double c() const { return raw_.c; }
  double m() const { return raw_.m; }
  double length() const { return raw_.length; }
  /// alpha = alpha1 + gamma^2 beta
  double alpha() const { return alpha_; }
  const RawCoefficients& raw() const { return raw_; }

  /// sqrt(alpha / rho), the longitudinal wave speed used to size transients.
  double wave_speed() const;

 private:
  friend PhysicalParams make_params(const RawCoefficients&);
  explicit PhysicalParams(const RawCoefficients& raw);

  RawCoefficients raw_;
  double alpha_;
};

/// Throws NonFiniteInput, NonPositiveCoefficient or MixingOutOfRange.
PhysicalParams make_params(const RawCoefficients& raw);

/// Memory kernel sigma with g(s) = integral of sigma over (s, inf).
///
/// Two flavours: the exponential prototype sigma(s) = k exp(-k s) (so g(0) = 1
/// and the Dafermos rate is k), and a tabulated kernel interpolated piecewise
/// linearly between samples, held at sigma(s_0) on [0, s_0] and zero past the
/// last sample.
class MemoryKernel {
 public:
  enum class Kind { ExponentialPrototype, Tabulated };

  static MemoryKernel exponential(double k);
  /// Samples must be strictly increasing in s (s_0 >= 0), sigma >= 0 and
  /// nonincreasing; d_sigma is the claimed Dafermos rate.
  static MemoryKernel tabulated(std::vector<double> s, std::vector<double> sigma, double d_sigma);

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }  // k for the prototype, 0 otherwise
  double g0() const { return g0_; }
  double d_sigma() const { return d_sigma_; }
  double sigma0() const { return sigma0_; }
  const std::vector<double>& sample_s() const { return s_; }
  const std::vector<double>& sample_sigma() const { return sigma_; }

  double sigma(double s) const;
  /// Analytic for the prototype; centred differences on the table otherwise.
  double sigma_prime(double s) const;
  double g(double s) const;

  /// Smallest s with g(s) < rel_tol * g(0).
  double truncation_point(double rel_tol = 1e-8) const;

 private:
  MemoryKernel() = default;

  Kind kind_ = Kind::ExponentialPrototype;
  double rate_ = 0.0;
  double g0_ = 0.0;
  double d_sigma_ = 0.0;
  double sigma0_ = 0.0;
  std::vector<double> s_;
  std::vector<double> sigma_;
  std::vector<double> tail_;  // g at each sample
};

/// Throws NegativeArgument for s < 0.
double eval_sigma(const MemoryKernel& kernel, double s);

struct DafermosReport {
  bool holds = false;
  // max over interior samples of sigma'(s) + d_sigma sigma(s); <= 0 when the condition holds
  double worst_margin = 0.0;
  double worst_at = 0.0;
};

/// Compares a centred finite-difference sigma' against -d_sigma sigma on the
/// interior of `grid`. The margin is accepted up to tol * sigma(0).
DafermosReport check_dafermos(const MemoryKernel& kernel, std::span<const double> grid,
                              double tol = 1e-6);

/// Uniform grid on [0, truncation_point] used when no grid is supplied.
std::vector<double> default_dafermos_grid(const MemoryKernel& kernel, int points = 2001);

struct DissipationConstants {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
};

/// Constants bounding the dissipated quantities by |F| |U| for 0 < m < 1.
/// Throws MixingAtEndpoint at m = 0 or m = 1.
DissipationConstants dissipation_constants(const PhysicalParams& params, const MemoryKernel& kernel,
                               double poincare_cp);

// Sharp 1-D Poincare constants: |f|^2 <= c_p |f_x|^2.
double poincare_one_end(double length);   // f(0) = 0
double poincare_two_ends(double length);  // f(0) = f(L) = 0

}  // namespace piezo
