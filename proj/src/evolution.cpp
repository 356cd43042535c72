#include "piezo/evolution.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "piezo/error.hpp"

namespace piezo {

namespace {

double bump_value(const Bump& b, double x) {
  const double r = (x - b.center) / b.width;
  if (std::abs(r) >= 1.0) return 0.0;
  return b.amplitude * std::exp(1.0 - 1.0 / (1.0 - r * r));
}

void check_bump(const Bump& b, double length, int block) {
  if (b.amplitude == 0.0) return;
  if (!(b.width > 0.0)) {
    throw Error(ErrorCode::IncompatibleSpec, "bump width must be positive (block " + std::to_string(block) + ")");
  }
  if (b.center - b.width < 0.0 || b.center + b.width > length) {
    throw Error(ErrorCode::IncompatibleSpec,
                "bump support leaves (0, L) (block " + std::to_string(block) + ")");
  }
}

// Fills eta_k = int_0^{s_k} w0 exp(-decay r) dr by cumulative trapezoids.
void fill_history(const GridSpec& g, StateBlocks& b, const PastHistory& past) {
  if (past.decay < 0.0) throw Error(ErrorCode::IncompatibleSpec, "past history decay must be >= 0");
  double prev_s = 0.0;
  double prev_phi = 1.0;
  double integral = 0.0;
  for (int k = 0; k < g.n_s; ++k) {
    const double s = g.s_nodes[static_cast<std::size_t>(k)];
    const double phi = std::exp(-past.decay * s);
    integral += 0.5 * (s - prev_s) * (prev_phi + phi);
    b.eta[static_cast<std::size_t>(k)] = integral * b.w;
    prev_s = s;
    prev_phi = phi;
  }
}

}  // namespace

StateVector initial_state(const DiscreteOperator& op, const InitialSpec& spec, std::optional<PastHistory> past) {
  const GridSpec& g = op.grid();
  StateBlocks b = zero_blocks(g);
  const double L = g.length;
  const double pi = std::numbers::pi;

  auto mech = [&](int block) -> Eigen::VectorXd& {
    switch (block) {
      case 0: return b.u;
      case 1: return b.v;
      case 2: return b.y;
      default: return b.z;
    }
  };

  if (std::holds_alternative<ZeroInitial>(spec)) {
    return pack(g, b);
  }
  if (const auto* s = std::get_if<SineModeInitial>(&spec)) {
    for (int blk = 0; blk < kInitialBlocks; ++blk) {
      if (s->modes[static_cast<std::size_t>(blk)] < 0) {
        throw Error(ErrorCode::IncompatibleSpec, "sine mode numbers must be >= 0");
      }
    }
    for (int blk = 0; blk < 4; ++blk) {
      const int n = s->modes[static_cast<std::size_t>(blk)];
      if (n == 0) continue;
      Eigen::VectorXd& v = mech(blk);
      for (int j = 0; j < g.n_x; ++j) v(j) = s->amplitude * std::sin((n - 0.5) * pi * g.centre(j) / L);
    }
    if (const int n = s->modes[4]; n > 0) {
      for (int i = 0; i < g.n_x - 1; ++i) b.w(i) = s->amplitude * std::sin(n * pi * g.node(i) / L);
    }
  } else if (const auto* s = std::get_if<SmoothBumpInitial>(&spec)) {
    for (int blk = 0; blk < kInitialBlocks; ++blk) check_bump(s->bumps[static_cast<std::size_t>(blk)], L, blk);
    for (int blk = 0; blk < 4; ++blk) {
      Eigen::VectorXd& v = mech(blk);
      for (int j = 0; j < g.n_x; ++j) v(j) = bump_value(s->bumps[static_cast<std::size_t>(blk)], g.centre(j));
    }
    for (int i = 0; i < g.n_x - 1; ++i) b.w(i) = bump_value(s->bumps[4], g.node(i));
  } else if (const auto* s = std::get_if<SeededRandomInitial>(&spec)) {
    std::mt19937_64 rng(s->seed);
    std::normal_distribution<double> normal;
    StateVector x(op.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    const double e = 0.5 * x.dot(op.sparse_gram() * x);
    return x / std::sqrt(e);
  }

  if (past && g.n_s > 0) fill_history(g, b, *past);
  return pack(g, b);
}

double default_dt(const GridSpec& grid) { return 0.5 * grid.h; }

MidpointStepper::MidpointStepper(const DiscreteOperator& op, double dt)
    : op_(&op), dt_(dt), lu_(std::make_shared<Eigen::SparseLU<SparseMatrix>>()) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidConfig, "dt must be positive and finite");
  SparseMatrix eye(op.dim(), op.dim());
  eye.setIdentity();
  lhs_ = eye - 0.5 * dt * op.sparse_matrix();
  rhs_ = eye + 0.5 * dt * op.sparse_matrix();
  lhs_.makeCompressed();
  lu_->compute(lhs_);
  if (lu_->info() != Eigen::Success) {
    throw Error(ErrorCode::SolverFailure, "midpoint factorisation failed: " + lu_->lastErrorMessage());
  }
}

StateVector MidpointStepper::step(const StateVector& state) const {
  if (state.size() != op_->dim()) {
    throw Error(ErrorCode::ShapeMismatch, "step: state length " + std::to_string(state.size()) +
                                              " != " + std::to_string(op_->dim()));
  }
  const double un = state.norm();
  if (un == 0.0) return StateVector::Zero(state.size());
  const StateVector b = rhs_ * state;
  StateVector x = lu_->solve(b);
  StateVector r = b - lhs_ * x;
  if (r.norm() > 1e-12 * un) {
    x += lu_->solve(r);
    r = b - lhs_ * x;
  }
  if (!x.allFinite() || r.norm() > 1e-12 * un) {
    throw Error(ErrorCode::SolverFailure, "midpoint solve residual " + std::to_string(r.norm() / un));
  }
  return x;
}

StateVector step(const DiscreteOperator& op, const StateVector& state, double dt) {
  return MidpointStepper(op, dt).step(state);
}

Trajectory simulate(const DiscreteOperator& op, const SimConfig& config) {
  const double dt = config.dt > 0.0 ? config.dt : default_dt(op.grid());
  if (!(config.t_final >= 0.0) || !std::isfinite(config.t_final)) {
    throw Error(ErrorCode::InvalidConfig, "t_final must be finite and >= 0");
  }
  if (config.t_final > 0.0 && dt > config.t_final * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidConfig, "dt exceeds t_final");
  }
  if (config.record_every < 1) throw Error(ErrorCode::InvalidConfig, "record_every must be >= 1");

  const long steps = std::lround(config.t_final / dt);
  Trajectory traj;
  traj.dt = dt;
  StateVector u = initial_state(op, config.initial, config.past);
  auto record = [&](long n) {
    traj.times.push_back(static_cast<double>(n) * dt);
    traj.energies.push_back(energy(op, u));
    traj.states.push_back(u);
  };
  record(0);
  if (steps == 0) return traj;

  const MidpointStepper stepper(op, dt);
  for (long n = 1; n <= steps; ++n) {
    u = stepper.step(u);
    if (n % config.record_every == 0 || n == steps) record(n);
  }
  return traj;
}

}  // namespace piezo
