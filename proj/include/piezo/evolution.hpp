#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "piezo/diagnostics.hpp"
#include "piezo/operator.hpp"

namespace piezo {

// Block order used by the per-block initial specs: u, v, y, z, w.
inline constexpr int kInitialBlocks = 5;

struct ZeroInitial {};

/// u, v, y, z get sin((n - 1/2) pi x / L) (clamped at 0, free at L), w gets
/// sin(n pi x / L). Mode 0 leaves the block at zero.
struct SineModeInitial {
  std::array<int, kInitialBlocks> modes{1, 0, 0, 0, 1};
  double amplitude = 1.0;
};

/// C-infinity bump exp(1 - 1/(1 - r^2)), r = (x - center) / width; peak value = amplitude.
struct Bump {
  double center = 0.5;
  double width = 0.25;
  double amplitude = 0.0;
};

struct SmoothBumpInitial {
  std::array<Bump, kInitialBlocks> bumps{};
};

/// Independent standard normals in every stored entry, scaled to unit energy.
struct SeededRandomInitial {
  std::uint64_t seed = 0;
};

using InitialSpec = std::variant<ZeroInitial, SineModeInitial, SmoothBumpInitial, SeededRandomInitial>;

/// Past temperature history phi0(x, s) = w0(x) exp(-decay s) for s > 0. The
/// history variable is eta0(x, s) = int_0^s phi0(x, r) dr, integrated with
/// cumulative trapezoids on the s-grid. decay = 0 gives eta0 = s w0.
/// Ignored for SeededRandom, whose eta blocks are random like the rest.
struct PastHistory {
  double decay = 1.0;
};

/// Throws IncompatibleSpec (bump support touching the boundary, negative
/// modes, non-positive width or negative decay).
StateVector initial_state(const DiscreteOperator& op, const InitialSpec& spec,
                          std::optional<PastHistory> past = PastHistory{});

struct SimConfig {
  double dt = 0.0;  // <= 0 selects default_dt
  double t_final = 0.0;
  int record_every = 1;
  InitialSpec initial = ZeroInitial{};
  std::optional<PastHistory> past = PastHistory{};
};

/// h / 2.
double default_dt(const GridSpec& grid);

/// Implicit midpoint U+ = (I - dt/2 A)^{-1} (I + dt/2 A) U, factorised once.
class MidpointStepper {
 public:
  MidpointStepper(const DiscreteOperator& op, double dt);

  double dt() const { return dt_; }
  /// Throws SolverFailure if the solve residual exceeds 1e-12 |U|.
  StateVector step(const StateVector& state) const;

 private:
  const DiscreteOperator* op_;
  double dt_;
  SparseMatrix lhs_;
  SparseMatrix rhs_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

/// One midpoint step. Builds a fresh factorisation; use MidpointStepper in loops.
StateVector step(const DiscreteOperator& op, const StateVector& state, double dt);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<EnergyBreakdown> energies;
  double dt = 0.0;
};

/// Steps round(t_final / dt) times, recording the initial state and every
/// record_every-th step. Throws InvalidConfig for inconsistent settings.
Trajectory simulate(const DiscreteOperator& op, const SimConfig& config);

}  // namespace piezo
