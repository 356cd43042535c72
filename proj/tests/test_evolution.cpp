#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "piezo/error.hpp"
#include "piezo/evolution.hpp"

using namespace piezo;

namespace {

DiscreteOperator make_op(double m, int nx, int ns) {
  RawCoefficients r;
  r.m = m;
  r.length = 0.5;
  auto p = make_params(r);
  auto k = MemoryKernel::exponential(1.0);
  return assemble(p, k, build_grid(p, k, nx, ns));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected piezo::Error");
  return ErrorCode::InvalidConfig;
}

SineModeInitial smooth_modes() {
  SineModeInitial s;
  s.modes = {1, 1, 1, 0, 1};
  return s;
}

}  // namespace

TEST_CASE("initial states") {
  const auto op = make_op(0.5, 16, 6);
  const auto& g = op.grid();
  CHECK(initial_state(op, ZeroInitial{}).isZero(0.0));
  CHECK(energy(op, initial_state(op, ZeroInitial{})).total == 0.0);

  SUBCASE("constant past history integrates to s * w0") {
    const StateBlocks b = unpack(g, initial_state(op, smooth_modes(), PastHistory{0.0}));
    for (int k = 0; k < g.n_s; ++k) CHECK((b.eta[k] - g.s_nodes[k] * b.w).norm() <= 1e-12 * b.w.norm() * g.s_nodes[k]);
  }
  SUBCASE("decaying past history converges to the closed form under s-refinement") {
    const double d = 2.0;
    double prev = 1e300;
    for (int ns : {8, 16, 32, 64}) {
      const auto fine = make_op(0.5, 16, ns);
      const auto& gf = fine.grid();
      const StateBlocks b = unpack(gf, initial_state(fine, smooth_modes(), PastHistory{d}));
      double worst = 0.0;
      for (int k = 0; k < gf.n_s; ++k) {
        const double exact = (1 - std::exp(-d * gf.s_nodes[k])) / d;
        worst = std::max(worst, (b.eta[k] - exact * b.w).norm() / (exact * b.w.norm()));
      }
      CHECK(worst < prev);
      prev = worst;
    }
    CHECK(prev < 0.02);
  }
  SUBCASE("no past history") {
    const StateBlocks b = unpack(g, initial_state(op, smooth_modes(), std::nullopt));
    for (const auto& e : b.eta) CHECK(e.isZero(0.0));
  }
  SUBCASE("sine modes satisfy the boundary shapes") {
    const StateBlocks b = unpack(g, initial_state(op, smooth_modes()));
    const double L = g.length, pi = std::numbers::pi;
    CHECK(b.u(0) == doctest::Approx(std::sin(0.5 * pi * g.centre(0) / L)));
    CHECK(b.w(3) == doctest::Approx(std::sin(pi * g.node(3) / L)));
    CHECK(b.z.isZero(0.0));
  }
  SUBCASE("seeded random") {
    const StateVector a = initial_state(op, SeededRandomInitial{7});
    CHECK(a == initial_state(op, SeededRandomInitial{7}));
    CHECK(a != initial_state(op, SeededRandomInitial{8}));
    CHECK(energy(op, a).total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("bumps") {
    SmoothBumpInitial s;
    s.bumps[0] = {0.25, 0.1, 2.0};
    const StateBlocks b = unpack(g, initial_state(op, s));
    CHECK(b.u.maxCoeff() <= 2.0);
    CHECK(b.u.maxCoeff() > 1.5);
    CHECK(b.u(0) == 0.0);
    s.bumps[4] = {0.45, 0.1, 1.0};
    CHECK(code_of([&] { initial_state(op, s); }) == ErrorCode::IncompatibleSpec);
    s.bumps[4] = {0.25, 0.0, 1.0};
    CHECK(code_of([&] { initial_state(op, s); }) == ErrorCode::IncompatibleSpec);
  }
}

TEST_CASE("midpoint step") {
  const auto op = make_op(0.5, 8, 4);
  const double dt = default_dt(op.grid());
  CHECK(dt == doctest::Approx(op.grid().h / 2));
  CHECK(step(op, StateVector::Zero(op.dim()), dt).isZero(0.0));

  const StateVector u0 = initial_state(op, SeededRandomInitial{3});
  const StateVector u1 = step(op, u0, dt);
  CHECK(energy(op, u1).total <= energy(op, u0).total * (1 + 1e-12));

  // Step matrix is a contraction in the energy norm: all singular values of
  // F^T S F^{-T} are <= 1.
  const Eigen::Index n = op.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd S = (I - 0.5 * dt * op.matrix()).lu().solve(I + 0.5 * dt * op.matrix());
  const Eigen::MatrixXd F = gram_factor(op);
  const Eigen::MatrixXd T = F.transpose() * S * F.transpose().inverse();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  CHECK(svd.singularValues()(0) <= 1.0 + 1e-12);
  CHECK((S * u0 - u1).norm() <= 1e-10 * u1.norm());

  CHECK(code_of([&] { MidpointStepper(op, 0.0); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { MidpointStepper(op, dt).step(StateVector::Zero(3)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("second-order accuracy against the matrix exponential") {
  const auto op = make_op(0.5, 16, 4);
  const StateVector u0 = initial_state(op, smooth_modes());
  // dt * |lambda_max| stays below ~0.3 so the comparison is asymptotic
  const double T = 0.2;
  const Eigen::MatrixXd At = op.matrix() * T;
  const StateVector exact = At.exp() * u0;
  std::vector<double> err;
  for (int steps : {64, 128, 256}) {
    const double dt = T / steps;
    const MidpointStepper st(op, dt);
    StateVector u = u0;
    for (int i = 0; i < steps; ++i) u = st.step(u);
    err.push_back(energy_norm(op, StateVector(u - exact)));
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("Richardson: dt against two steps of dt/2 over a fixed horizon") {
  const auto op = make_op(0.5, 16, 4);
  const StateVector u0 = initial_state(op, smooth_modes());
  const double T = 0.2;
  auto run = [&](int steps) {
    const MidpointStepper st(op, T / steps);
    StateVector u = u0;
    for (int i = 0; i < steps; ++i) u = st.step(u);
    return u;
  };
  std::vector<double> diff;
  for (int n : {50, 100, 200}) diff.push_back(energy_norm(op, StateVector(run(n) - run(2 * n))));
  CHECK(diff[0] / diff[1] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(diff[1] / diff[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("global convergence against a dt/8 reference") {
  const auto op = make_op(0.5, 16, 4);
  SimConfig cfg;
  cfg.initial = smooth_modes();
  cfg.t_final = 0.4;
  auto final_state = [&](double dt) {
    cfg.dt = dt;
    cfg.record_every = 1 << 20;
    return simulate(op, cfg).states.back();
  };
  const double dt = 0.004;
  const StateVector ref = final_state(dt / 8);
  const double e1 = energy_norm(op, StateVector(final_state(dt) - ref));
  const double e2 = energy_norm(op, StateVector(final_state(dt / 2) - ref));
  const double order = std::log2(e1 / e2);
  CHECK(order > 1.7);
  CHECK(order < 2.4);
}

TEST_CASE("simulate") {
  const auto op = make_op(0.5, 16, 6);
  SimConfig cfg;
  cfg.initial = SeededRandomInitial{11};
  cfg.t_final = 0.0;
  auto one = simulate(op, cfg);
  CHECK(one.times.size() == 1);
  CHECK(one.states.size() == 1);
  CHECK(one.times[0] == 0.0);

  cfg.t_final = 20.0;
  cfg.record_every = 10;
  const auto tr = simulate(op, cfg);
  CHECK(tr.times.size() == tr.states.size());
  CHECK(tr.times.size() == tr.energies.size());
  CHECK(tr.times.back() == doctest::Approx(20.0));
  CHECK(tr.energies.back().total < tr.energies.front().total);
  for (std::size_t i = 1; i < tr.energies.size(); ++i) {
    CHECK(tr.energies[i].total <= tr.energies[i - 1].total * (1 + 1e-12));
    CHECK(tr.times[i] > tr.times[i - 1]);
  }

  const auto again = simulate(op, cfg);
  bool identical = again.states.size() == tr.states.size();
  for (std::size_t i = 0; identical && i < tr.states.size(); ++i) identical = again.states[i] == tr.states[i];
  CHECK(identical);

  SimConfig bad = cfg;
  bad.record_every = 0;
  CHECK(code_of([&] { simulate(op, bad); }) == ErrorCode::InvalidConfig);
  bad = cfg;
  bad.dt = 5.0;
  bad.t_final = 1.0;
  CHECK(code_of([&] { simulate(op, bad); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("contractivity for every m") {
  for (double m : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto op = make_op(m, 16, 6);
    SimConfig cfg;
    cfg.initial = SeededRandomInitial{5};
    cfg.t_final = 5.0;
    const auto tr = simulate(op, cfg);
    for (std::size_t i = 1; i < tr.energies.size(); ++i) {
      CHECK(tr.energies[i].total <= tr.energies[i - 1].total * (1 + 1e-12));
    }
  }
}
