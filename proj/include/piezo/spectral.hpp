#pragma once

#include <Eigen/SparseCholesky>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "piezo/operator.hpp"

namespace piezo {

/// Eigenvalues of F^T A F^{-T} (M = F F^T), sorted by real part, descending.
/// Throws EigensolverFailure.
std::vector<std::complex<double>> eigenvalues(const DiscreteOperator& op);

struct EigenSummary {
  std::size_t count = 0;
  double max_real = 0.0;          // spectral abscissa
  double min_modulus = 0.0;       // distance of 0 to the spectrum
  double min_axis_distance = 0.0; // min |Re mu|
  double low_frequency_gap = 0.0; // min |Re mu| over |Im mu| <= low_frequency_cutoff
  double low_frequency_cutoff = 0.0;
};

/// low_frequency_cutoff <= 0 picks 10 wave speeds / L.
EigenSummary summarize(const std::vector<std::complex<double>>& eigs, double low_frequency_cutoff);
EigenSummary summarize(const DiscreteOperator& op, const std::vector<std::complex<double>>& eigs);

enum class ResolventMethod {
  Auto,      // DenseSvd up to dimension 256, Iterative above
  DenseSvd,  // 1 / sigma_min of (i lambda - F^T A F^{-T})
  Iterative  // Lanczos on R* R in the M inner product, sparse LU solves
};

/// Operator norm of (i lambda - A)^{-1} on (R^dim, |.|_M). Throws OnSpectrum.
double resolvent_norm(const DiscreteOperator& op, double lambda, ResolventMethod method = ResolventMethod::Auto);

/// Evaluates resolvent norms at many lambdas, caching what does not depend on lambda.
/// Thread-safe for concurrent norm() calls.
class ResolventEvaluator {
 public:
  explicit ResolventEvaluator(const DiscreteOperator& op, ResolventMethod method = ResolventMethod::Auto);
  double norm(double lambda) const;
  ResolventMethod method() const { return method_; }

 private:
  double dense_norm(double lambda) const;
  double iterative_norm(double lambda) const;

  const DiscreteOperator* op_;
  ResolventMethod method_;
  Eigen::MatrixXd similar_;  // F^T A F^{-T}, dense route only
  using GramFactor = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;
  std::shared_ptr<const GramFactor> gram_llt_;  // iterative route only
};

/// n log-spaced points on [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, int n);

struct ScanOptions {
  ResolventMethod method = ResolventMethod::Auto;
  double tail_decades = 1.0;
  int threads = 0;  // 0: hardware concurrency, capped by PIEZO_THREADS
};

struct ResolventScan {
  std::vector<double> lambdas;
  std::vector<double> norms;      // +inf where singular is set
  std::vector<char> singular;
  double growth_exponent = 0.0;   // slope of log|R| vs log lambda on the tail
  double tail_lo = 0.0;
  double tail_hi = 0.0;
  int tail_points = 0;
  double max_norm = 0.0;          // over finite entries

  std::size_t singular_count() const;
};

/// lambdas must be positive and increasing; |R(i lambda)| = |R(-i lambda)| for real A.
ResolventScan resolvent_scan(const DiscreteOperator& op, const std::vector<double>& lambdas,
                             const ScanOptions& opts = {});

/// Tail slope and bookkeeping for externally supplied norms (used by classify tests).
ResolventScan make_scan(std::vector<double> lambdas, std::vector<double> norms, double tail_decades = 1.0);

/// Maxima of lambda^{-power} |R| over `blocks` equal log-width pieces of the tail.
std::vector<double> tail_block_maxima(const ResolventScan& scan, int blocks, double power);

/// Worker count for parallel loops: min(hardware, PIEZO_THREADS, tasks), at least 1.
int worker_count(std::size_t tasks, int requested = 0);

enum class Regime { Exponential, PolynomialOrderOne, Inconclusive };
std::string to_string(Regime r);

struct RegimeReport {
  Regime regime = Regime::Inconclusive;
  double growth_exponent = 0.0;
  double max_norm = 0.0;
  std::size_t singular_points = 0;
  bool eigen_evidence = false;  // all eigenvalues strictly in the open left half plane
  EigenSummary eigen;
  std::string rationale;
  std::string caveat;
};

/// Exponential: growth <= 0.3 with finite norms; PolynomialOrderOne: growth
/// in [1.5, 2.5] (|R| ~ lambda^2, energy ~ 1/t); Inconclusive otherwise or
/// when the eigenvalues disagree. Throws InsufficientTail if the scan spans
/// less than tail_decades.
RegimeReport classify(const ResolventScan& scan, const EigenSummary& eigen, double tail_decades = 1.0);

}  // namespace piezo
