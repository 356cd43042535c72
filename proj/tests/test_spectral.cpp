#include <Eigen/Eigenvalues>
#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <limits>
#include <random>

#include "doctest.h"
#include "piezo/error.hpp"
#include "piezo/spectral.hpp"

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

// |R|_M from the generalised symmetric problem R^T M R x = theta M x at lambda = 0.
double static_norm_oracle(const DiscreteOperator& op) {
  const Eigen::MatrixXd Ainv = op.matrix().inverse();
  const Eigen::MatrixXd lhs = Ainv.transpose() * op.gram() * Ainv;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lhs + lhs.transpose()), op.gram(),
                                                                 Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

EigenSummary stable_eigen() {
  EigenSummary e;
  e.count = 10;
  e.max_real = -0.1;
  e.min_modulus = 1.0;
  return e;
}

}  // namespace

TEST_CASE("eigenvalues lie in the closed left half plane, away from 0") {
  for (double m : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto op = make_op(m, 16, 8);
    const auto eigs = eigenvalues(op);
    CHECK(eigs.size() == static_cast<std::size_t>(op.dim()));
    for (std::size_t i = 1; i < eigs.size(); ++i) CHECK(eigs[i].real() <= eigs[i - 1].real());
    const auto s = summarize(op, eigs);
    CAPTURE(m);
    CHECK(s.max_real <= 1e-10);
    CHECK(s.min_modulus > 0.0);
    // similarity keeps the trace
    std::complex<double> tr = 0;
    for (const auto& mu : eigs) tr += mu;
    CHECK(tr.real() == doctest::Approx(op.matrix().trace()).epsilon(1e-9));
    CHECK(std::abs(tr.imag()) <= 1e-8 * std::abs(op.matrix().trace()));
  }
}

TEST_CASE("spectral abscissa agrees with an eigensolve of A itself") {
  const auto op = make_op(0.5, 12, 4);
  const auto eigs = eigenvalues(op);
  Eigen::EigenSolver<Eigen::MatrixXd> es(op.matrix(), false);
  CHECK(summarize(eigs, 1.0).max_real == doctest::Approx(es.eigenvalues().real().maxCoeff()).epsilon(1e-6));
}

// The fundamental beam mode is the least damped one for every m and its
// damping barely depends on m (0.0421 at m=0.5 against 0.0424 at m=1 on this
// grid), so "larger gap for m=0.5" does not hold. Kept as an expected failure
// so that a change in behaviour shows up.
TEST_CASE("low-frequency gap is larger for m=0.5 than for m=1" * doctest::should_fail()) {
  const auto half = summarize(make_op(0.5, 16, 8), eigenvalues(make_op(0.5, 16, 8)));
  const auto one = summarize(make_op(1.0, 16, 8), eigenvalues(make_op(1.0, 16, 8)));
  MESSAGE("low-frequency gap m=0.5: " << half.low_frequency_gap << ", m=1: " << one.low_frequency_gap);
  CHECK(half.low_frequency_gap > 0.0);
  CHECK(one.low_frequency_gap > 0.0);
  CHECK(half.low_frequency_gap > one.low_frequency_gap);
}

TEST_CASE("resolvent norm") {
  const auto op = make_op(0.5, 8, 4);
  CHECK(op.dim() <= 256);

  SUBCASE("lambda = 0 is |A^{-1}|_M") {
    const double oracle = static_norm_oracle(op);
    CHECK(resolvent_norm(op, 0.0, ResolventMethod::DenseSvd) == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(resolvent_norm(op, 0.0, ResolventMethod::Iterative) == doctest::Approx(oracle).epsilon(1e-9));
  }

  SUBCASE("dense and iterative routes agree") {
    for (double m : {0.0, 0.5, 1.0}) {
      const auto o = make_op(m, 12, 6);
      for (double l : {0.3, 2.0, 17.0, 120.0}) {
        const double d = resolvent_norm(o, l, ResolventMethod::DenseSvd);
        const double it = resolvent_norm(o, l, ResolventMethod::Iterative);
        CAPTURE(m);
        CAPTURE(l);
        CHECK(it == doctest::Approx(d).epsilon(1e-9));
      }
    }
  }

  SUBCASE("spectral lower bound and symmetry") {
    const auto eigs = eigenvalues(op);
    const ResolventEvaluator ev(op);
    for (double l : {0.0, 1.0, 5.5, 40.0, 333.0}) {
      const double r = ev.norm(l);
      double bound = 0.0;
      for (const auto& mu : eigs) bound = std::max(bound, 1.0 / std::abs(std::complex<double>(0, l) - mu));
      CHECK(r >= bound * (1 - 1e-8));
      CHECK(std::abs(ev.norm(-l) - r) <= 1e-10 * r);
    }
  }

  SUBCASE("norm dominates sampled ratios") {
    const double l = 3.0;
    const double r = resolvent_norm(op, l);
    const ShiftedSolver solver(op, l);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 20; ++t) {
      ComplexState f(op.dim());
      for (auto& v : f) v = {nd(rng), nd(rng)};
      const double q = energy_norm(op, ComplexState(solver.solve(f))) / energy_norm(op, f);
      CHECK(q <= r * (1 + 1e-10));
      // homogeneity: scaling f leaves the ratio unchanged
      const double q3 = energy_norm(op, ComplexState(solver.solve(3.0 * f))) / energy_norm(op, ComplexState(3.0 * f));
      CHECK(q3 == doctest::Approx(q).epsilon(1e-12));
    }
  }

  CHECK(code_of([&] { resolvent_norm(op, std::nan("")); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("resolvent scan") {
  const auto op = make_op(0.5, 16, 6);
  const auto grid = log_grid(1.0, 200.0, 40);
  CHECK(grid.size() == 40);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 200.0);

  const auto s1 = resolvent_scan(op, grid, {ResolventMethod::Auto, 1.0, 1});
  const auto s3 = resolvent_scan(op, grid, {ResolventMethod::Auto, 1.0, 3});
  CHECK(s1.norms == s3.norms);
  CHECK(s1.singular_count() == 0);
  CHECK(s1.tail_lo == doctest::Approx(20.0));
  CHECK(s1.tail_points > 5);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::isfinite(s1.norms[i]));

  // Scanning exactly at the imaginary parts of eigenvalues still succeeds.
  const auto eigs = eigenvalues(op);
  std::vector<double> at_modes;
  for (const auto& mu : eigs)
    if (mu.imag() > 1.0 && (at_modes.empty() || mu.imag() > at_modes.back() * 1.01)) at_modes.push_back(mu.imag());
  std::sort(at_modes.begin(), at_modes.end());
  at_modes.erase(std::unique(at_modes.begin(), at_modes.end()), at_modes.end());
  const auto hit = resolvent_scan(op, at_modes);
  CHECK(hit.singular_count() == 0);
  for (std::size_t i = 0; i < at_modes.size(); ++i) CHECK(hit.norms[i] > 0.0);

  CHECK(code_of([&] { resolvent_scan(op, {2.0, 1.0}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { resolvent_scan(op, {-1.0, 1.0}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { log_grid(0.0, 1.0, 4); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("worker count honours PIEZO_THREADS") {
  setenv("PIEZO_THREADS", "2", 1);
  CHECK(worker_count(100, 8) == 2);
  CHECK(worker_count(1, 8) == 1);
  setenv("PIEZO_THREADS", "junk", 1);
  CHECK(worker_count(100, 3) == 3);
  unsetenv("PIEZO_THREADS");
  CHECK(worker_count(0) == 1);
}

TEST_CASE("classification on synthetic scans") {
  const auto lambdas = log_grid(1.0, 200.0, 60);
  std::vector<double> flat, quad, quart;
  for (double l : lambdas) {
    flat.push_back(2.0 + 0.1 * std::sin(l));
    quad.push_back(0.01 * l * l);
    quart.push_back(1e-4 * l * l * l * l);
  }
  CHECK(classify(make_scan(lambdas, flat), stable_eigen()).regime == Regime::Exponential);
  const auto poly = classify(make_scan(lambdas, quad), stable_eigen());
  CHECK(poly.regime == Regime::PolynomialOrderOne);
  CHECK(poly.growth_exponent == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(classify(make_scan(lambdas, quart), stable_eigen()).regime == Regime::Inconclusive);
  CHECK_FALSE(poly.caveat.empty());

  EigenSummary unstable = stable_eigen();
  unstable.max_real = 0.0;
  CHECK(classify(make_scan(lambdas, flat), unstable).regime == Regime::Inconclusive);

  auto with_hole = flat;
  with_hole[10] = std::numeric_limits<double>::infinity();
  const auto hs = make_scan(lambdas, with_hole);
  CHECK(hs.singular_count() == 1);
  CHECK(std::isfinite(hs.max_norm));
  CHECK(classify(hs, stable_eigen()).regime == Regime::Inconclusive);

  const auto short_grid = log_grid(10.0, 50.0, 20);
  CHECK(code_of([&] { classify(make_scan(short_grid, std::vector<double>(20, 1.0)), stable_eigen()); }) ==
        ErrorCode::InsufficientTail);
}

TEST_CASE("tail block maxima") {
  const auto lambdas = log_grid(1.0, 100.0, 41);
  std::vector<double> norms;
  for (double l : lambdas) norms.push_back(l * l);
  const auto s = make_scan(lambdas, norms);
  const auto flat = tail_block_maxima(s, 4, 2.0);
  for (double v : flat) CHECK(v == doctest::Approx(1.0));
  const auto rising = tail_block_maxima(s, 4, 0.0);
  for (std::size_t i = 1; i < rising.size(); ++i) CHECK(rising[i] > rising[i - 1]);
}
