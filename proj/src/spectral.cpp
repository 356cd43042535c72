#include "piezo/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "piezo/error.hpp"

namespace piezo {

std::vector<std::complex<double>> eigenvalues(const DiscreteOperator& op) {
  const Eigen::MatrixXd s = energy_coordinates_matrix(op);
  Eigen::EigenSolver<Eigen::MatrixXd> es(s, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "dense eigensolver did not converge");
  std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag();
  });
  return out;
}

EigenSummary summarize(const std::vector<std::complex<double>>& eigs, double cutoff) {
  EigenSummary s;
  s.count = eigs.size();
  s.low_frequency_cutoff = cutoff;
  if (eigs.empty()) return s;
  const double inf = std::numeric_limits<double>::infinity();
  s.max_real = -inf;
  s.min_modulus = inf;
  s.min_axis_distance = inf;
  s.low_frequency_gap = inf;
  for (const auto& mu : eigs) {
    s.max_real = std::max(s.max_real, mu.real());
    s.min_modulus = std::min(s.min_modulus, std::abs(mu));
    s.min_axis_distance = std::min(s.min_axis_distance, std::abs(mu.real()));
    if (std::abs(mu.imag()) <= cutoff) s.low_frequency_gap = std::min(s.low_frequency_gap, std::abs(mu.real()));
  }
  return s;
}

EigenSummary summarize(const DiscreteOperator& op, const std::vector<std::complex<double>>& eigs) {
  return summarize(eigs, 10.0 * op.params().wave_speed() / op.params().length());
}

ResolventEvaluator::ResolventEvaluator(const DiscreteOperator& op, ResolventMethod method) : op_(&op) {
  method_ = method;
  if (method_ == ResolventMethod::Auto) {
    method_ = op.dim() <= 256 ? ResolventMethod::DenseSvd : ResolventMethod::Iterative;
  }
  if (method_ == ResolventMethod::DenseSvd) {
    similar_ = energy_coordinates_matrix(op);
  } else {
    auto llt = std::make_shared<GramFactor>(op.sparse_gram());
    if (llt->info() != Eigen::Success) throw Error(ErrorCode::SingularOperator, "Gram matrix is not positive definite");
    gram_llt_ = llt;
  }
}

double ResolventEvaluator::norm(double lambda) const {
  if (!std::isfinite(lambda)) throw Error(ErrorCode::NonFiniteInput, "lambda must be finite");
  return method_ == ResolventMethod::DenseSvd ? dense_norm(lambda) : iterative_norm(lambda);
}

double ResolventEvaluator::dense_norm(double lambda) const {
  Eigen::MatrixXcd b = -similar_.cast<std::complex<double>>();
  b.diagonal().array() += std::complex<double>(0.0, lambda);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(b);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-15 * sv(0))) {
    throw Error(ErrorCode::OnSpectrum, "i*lambda is numerically an eigenvalue at lambda=" + std::to_string(lambda));
  }
  return 1.0 / smin;
}

// Largest eigenvalue of the M-self-adjoint operator R* R = M^{-1} R^H M R by
// Lanczos with full reorthogonalisation; |R|_M = sqrt of it.
double ResolventEvaluator::iterative_norm(double lambda) const {
  std::unique_ptr<ShiftedSolver> solver;
  try {
    solver = std::make_unique<ShiftedSolver>(*op_, lambda);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ResolventSingular) throw Error(ErrorCode::OnSpectrum, e.what());
    throw;
  }
  const DiscreteOperator& op = *op_;
  const Eigen::Index n = op.dim();
  const SparseMatrix& m = op.sparse_gram();

  auto m_apply = [&](const ComplexState& x) -> ComplexState {
    ComplexState y(n);
    y.real() = m * x.real();
    y.imag() = m * x.imag();
    return y;
  };
  auto m_solve = [&](const ComplexState& x) -> ComplexState {
    ComplexState y(n);
    y.real() = gram_llt_->solve(Eigen::VectorXd(x.real()));
    y.imag() = gram_llt_->solve(Eigen::VectorXd(x.imag()));
    return y;
  };
  auto normal_op = [&](const ComplexState& x) { return m_solve(solver->solve_adjoint(m_apply(solver->solve(x)))); };

  const int max_iter = static_cast<int>(std::min<Eigen::Index>(n, 200));
  std::vector<ComplexState> basis;
  std::vector<ComplexState> mbasis;  // M * basis, for cheap inner products
  std::vector<double> alpha, beta;

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  ComplexState v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::complex<double>(normal(rng), normal(rng));
  v /= std::sqrt(v.dot(m_apply(v)).real());

  double theta = 0.0;
  for (int j = 0; j < max_iter; ++j) {
    basis.push_back(v);
    mbasis.push_back(m_apply(v));
    ComplexState w = normal_op(v);
    if (!w.allFinite()) throw Error(ErrorCode::OnSpectrum, "non-finite resolvent at lambda=" + std::to_string(lambda));
    alpha.push_back(mbasis.back().dot(w).real());
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < basis.size(); ++i) w -= mbasis[i].dot(w) * basis[i];
    }
    const double b = std::sqrt(std::max(0.0, w.dot(m_apply(w)).real()));

    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    theta = es.eigenvalues()(k - 1);
    const double resid = b * std::abs(es.eigenvectors()(k - 1, k - 1));
    if (resid <= 1e-11 * theta || b <= 1e-14 * theta) break;
    beta.push_back(b);
    v = w / b;
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::OnSpectrum, "resolvent norm breakdown at lambda=" + std::to_string(lambda));
  }
  return std::sqrt(theta);
}

double resolvent_norm(const DiscreteOperator& op, double lambda, ResolventMethod method) {
  return ResolventEvaluator(op, method).norm(lambda);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error(ErrorCode::InvalidConfig, "log_grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::size_t ResolventScan::singular_count() const {
  return static_cast<std::size_t>(std::count(singular.begin(), singular.end(), 1));
}

int worker_count(std::size_t tasks, int requested) {
  long n = requested > 0 ? requested : static_cast<long>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PIEZO_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min(n, cap);
  }
  n = std::min<long>(n, static_cast<long>(tasks));
  return static_cast<int>(std::max(1L, n));
}

ResolventScan make_scan(std::vector<double> lambdas, std::vector<double> norms, double tail_decades) {
  if (lambdas.size() != norms.size() || lambdas.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "scan needs matching, non-empty lambda and norm lists");
  }
  ResolventScan s;
  s.lambdas = std::move(lambdas);
  s.norms = std::move(norms);
  s.singular.assign(s.lambdas.size(), 0);
  for (std::size_t i = 0; i < s.norms.size(); ++i) {
    if (!std::isfinite(s.norms[i])) {
      s.singular[i] = 1;
      s.norms[i] = std::numeric_limits<double>::infinity();
    } else {
      s.max_norm = std::max(s.max_norm, s.norms[i]);
    }
  }
  s.tail_hi = s.lambdas.back();
  s.tail_lo = std::max(s.lambdas.front(), s.tail_hi * std::pow(10.0, -tail_decades));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
    if (s.lambdas[i] < s.tail_lo * (1.0 - 1e-12) || s.singular[i]) continue;
    const double x = std::log(s.lambdas[i]), y = std::log(s.norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  s.tail_points = k;
  const double den = k * sxx - sx * sx;
  s.growth_exponent = k >= 2 && den > 0.0 ? (k * sxy - sx * sy) / den : 0.0;
  return s;
}

ResolventScan resolvent_scan(const DiscreteOperator& op, const std::vector<double>& lambdas, const ScanOptions& opts) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] > lambdas[i - 1]))) {
      throw Error(ErrorCode::InvalidConfig, "scan lambdas must be positive and increasing");
    }
  }
  if (lambdas.empty()) throw Error(ErrorCode::InvalidConfig, "empty lambda grid");

  const ResolventEvaluator eval(op, opts.method);
  std::vector<double> norms(lambdas.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t i = next++; i < lambdas.size() && !failed; i = next++) {
      try {
        norms[i] = eval.norm(lambdas[i]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::OnSpectrum) {
          norms[i] = std::numeric_limits<double>::infinity();
        } else if (!failed.exchange(true)) {
          failure = std::current_exception();
        }
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int nw = worker_count(lambdas.size(), opts.threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < nw; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  return make_scan(lambdas, std::move(norms), opts.tail_decades);
}

std::vector<double> tail_block_maxima(const ResolventScan& scan, int blocks, double power) {
  if (blocks < 1) throw Error(ErrorCode::InvalidConfig, "blocks must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(blocks), 0.0);
  const double a = std::log(scan.tail_lo), b = std::log(scan.tail_hi);
  for (std::size_t i = 0; i < scan.lambdas.size(); ++i) {
    const double l = scan.lambdas[i];
    if (l < scan.tail_lo * (1.0 - 1e-12)) continue;
    int blk = b > a ? static_cast<int>((std::log(l) - a) / (b - a) * blocks) : 0;
    blk = std::clamp(blk, 0, blocks - 1);
    auto& slot = out[static_cast<std::size_t>(blk)];
    slot = std::max(slot, scan.norms[i] / std::pow(l, power));
  }
  return out;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Exponential: return "Exponential";
    case Regime::PolynomialOrderOne: return "PolynomialOrderOne";
    case Regime::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

RegimeReport classify(const ResolventScan& scan, const EigenSummary& eigen, double tail_decades) {
  if (scan.lambdas.size() < 2 || scan.lambdas.back() < scan.lambdas.front() * std::pow(10.0, tail_decades) * (1 - 1e-9)) {
    throw Error(ErrorCode::InsufficientTail, "scan must span at least " + std::to_string(tail_decades) + " decade(s)");
  }
  RegimeReport rep;
  rep.growth_exponent = scan.growth_exponent;
  rep.max_norm = scan.max_norm;
  rep.singular_points = scan.singular_count();
  rep.eigen = eigen;
  rep.eigen_evidence = eigen.count > 0 && eigen.max_real < 0.0;
  rep.caveat =
      "The discretised generator is a finite matrix with all eigenvalues in the open left half plane, so every "
      "truncation decays exponentially. The regime is read from how the resolvent grows along the scanned range "
      "and should be confirmed by grid refinement. PolynomialOrderOne means consistent with the proven 1/t upper "
      "bound, not that the rate is optimal.";

  const double g = scan.growth_exponent;
  if (!rep.eigen_evidence) {
    rep.rationale = "eigenvalues do not lie strictly in the left half plane";
  } else if (rep.singular_points > 0) {
    rep.rationale = "scan hit the spectrum at " + std::to_string(rep.singular_points) + " point(s)";
  } else if (g <= 0.3) {
    rep.regime = Regime::Exponential;
    rep.rationale = "resolvent bounded on the tail (growth exponent <= 0.3)";
  } else if (g >= 1.5 && g <= 2.5) {
    rep.regime = Regime::PolynomialOrderOne;
    rep.rationale = "resolvent grows like lambda^2 on the tail (growth exponent in [1.5, 2.5])";
  } else {
    rep.rationale = "growth exponent outside both acceptance bands";
  }
  return rep;
}

}  // namespace piezo
