#pragma once

#include <array>
#include <utility>
#include <vector>

#include "piezo/operator.hpp"

namespace piezo {

struct Trajectory;

/// Energy parts (half the Gram form) and the instantaneous dissipation rates.
struct EnergyBreakdown {
  double e1 = 0.0;  // 1/2 (rho |v|^2 + alpha1 |u_x|^2)
  double e2 = 0.0;  // 1/2 (mu |z|^2 + beta |gamma u_x - y_x|^2)
  double e3 = 0.0;  // 1/2 |w|^2 + (cm/2) sum_k w_k sigma_k |eta_k,x|^2
  double total = 0.0;
  double flux_dissipation = 0.0;
  double memory_dissipation = 0.0;
};

/// Throws ShapeMismatch.
EnergyBreakdown energy(const DiscreteOperator& op, const StateVector& state);

/// residual_n = (E_{n+1} - E_n) / dt_n - (D_n + D_{n+1}) / 2 with D the total
/// dissipation rate at each record. Vanishes at second order in dt.
struct IdentityResidual {
  std::vector<double> per_interval;
  double max_abs = 0.0;
};

IdentityResidual energy_identity_residual(const DiscreteOperator& op, const Trajectory& trajectory);

/// The four dissipated quantities bounded by K_i |F| |U| for the resolvent
/// problem (i lambda - A) U = F:
///   0: int |w_x|^2, 1: int int sigma |eta_x|^2, 2: int |w|^2, 3: int |Lambda_x|^2
/// with Lambda = (1-m) w + m sum_k w_k sigma_k eta_k. Norms are energy norms.
struct DissipationBoundsReport {
  double lambda = 0.0;
  bool vacuous = false;  // F = 0, so U = 0 and every inequality holds trivially
  double f_norm = 0.0;
  double u_norm = 0.0;
  std::array<double, 4> lhs{};
  std::array<double, 4> bound{};  // K_i |F| |U|
  std::array<double, 4> ratio{};  // lhs / bound, 0 when vacuous
  double worst_ratio() const;
  bool satisfied(double tolerance = 1.0) const;
};

/// Throws MixingAtEndpoint outside 0 < m < 1, ResolventSingular if i lambda
/// is an eigenvalue.
DissipationBoundsReport check_dissipation_bounds(const DiscreteOperator& op, double lambda, const StateVector& f,
                            const DissipationConstants& constants);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// [5 L / sqrt(alpha / rho), t_end].
FitWindow default_fit_window(const PhysicalParams& params, double t_end);

/// Energy-rate convention: E(t) ~ M exp(-rate t). The norm decays at rate / 2.
struct DecayFit {
  enum class Model { Exponential, Polynomial };
  Model model = Model::Exponential;
  double coefficient = 0.0;  // M or C
  double rate = 0.0;         // energy rate (exponential) or order (polynomial)
  double r_squared = 0.0;
  FitWindow window;
  int samples = 0;
};

/// Least squares on log E against t. Throws NonPositiveEnergy (non-positive
/// energy inside the window) or InvalidConfig (fewer than two samples).
DecayFit fit_exponential(const std::vector<double>& times, const std::vector<double>& energies, FitWindow window);

/// Least squares on log E against log t; order = -slope. The window must start at t > 0.
DecayFit fit_polynomial(const std::vector<double>& times, const std::vector<double>& energies, FitWindow window);

}  // namespace piezo
