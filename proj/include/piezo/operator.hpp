#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <complex>
#include <iosfwd>
#include <memory>

#include "piezo/grid.hpp"
#include "piezo/params.hpp"

namespace piezo {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ComplexSparseMatrix = Eigen::SparseMatrix<std::complex<double>>;

/// Discrete generator A and energy Gram matrix M on a fixed grid.
///
/// Rows of A, with Lap the ghost-point Laplacian on cell centres, G the
/// difference from interior nodes to cell centres and Lw = -G^T G:
///   u' = v
///   v' = (alpha Lap u - gamma beta Lap y - delta G w) / rho
///   y' = z
///   z' = (beta Lap y - gamma beta Lap u) / mu
///   w' = c Lw Lambda + delta G^T v,   Lambda = (1-m) w + m sum_k w_k sigma_k eta_k
///   eta_k' = -(eta_k - eta_{k-1}) / ds_k + w,   eta_0 = 0
///
/// M is built from the same difference matrices, so U^T M U is twice the
/// discrete energy and M A + A^T M <= 0 holds exactly, not only as h -> 0.
class DiscreteOperator {
 public:
  DiscreteOperator(const PhysicalParams& params, const MemoryKernel& kernel, const GridSpec& grid);

  const PhysicalParams& params() const { return params_; }
  const MemoryKernel& kernel() const { return kernel_; }
  const GridSpec& grid() const { return grid_; }
  Eigen::Index dim() const { return grid_.dim(); }

  const Eigen::MatrixXd& matrix() const { return a_dense_; }
  const Eigen::MatrixXd& gram() const { return m_dense_; }
  const SparseMatrix& sparse_matrix() const { return a_; }
  const SparseMatrix& sparse_gram() const { return m_; }

  // Difference operators shared by A, M and the diagnostics.
  /// Cell centres -> nodes 0..n_x-1 (u_x(L) = 0 is not stored).
  const SparseMatrix& mech_diff() const { return d_mech_; }
  /// Trapezoidal node weights matching mech_diff: h/2 at x = 0, h elsewhere.
  const Eigen::VectorXd& mech_weights() const { return w_mech_; }
  /// Interior nodes -> cell centres, Dirichlet at both ends.
  const SparseMatrix& node_diff() const { return g_; }

 private:
  PhysicalParams params_;
  MemoryKernel kernel_;
  GridSpec grid_;
  SparseMatrix d_mech_;
  Eigen::VectorXd w_mech_;
  SparseMatrix g_;
  SparseMatrix a_;
  SparseMatrix m_;
  Eigen::MatrixXd a_dense_;
  Eigen::MatrixXd m_dense_;
};

DiscreteOperator assemble(const PhysicalParams& params, const MemoryKernel& kernel, const GridSpec& grid);

/// A * state. Throws ShapeMismatch.
StateVector apply(const DiscreteOperator& op, const StateVector& state);

/// Solves -A U = f. Throws SingularOperator if the factorisation fails or the
/// residual exceeds 1e-10 |f|.
StateVector solve_static(const DiscreteOperator& op, const StateVector& f);

/// Factorisation of (i lambda I - A) for repeated solves at one lambda.
class ShiftedSolver {
 public:
  /// Throws ResolventSingular when i lambda is (numerically) an eigenvalue.
  ShiftedSolver(const DiscreteOperator& op, double lambda);

  double lambda() const { return lambda_; }
  ComplexState solve(const ComplexState& f) const;
  /// Solves (i lambda I - A)^H x = f.
  ComplexState solve_adjoint(const ComplexState& f) const;

 private:
  double lambda_;
  std::shared_ptr<Eigen::SparseLU<ComplexSparseMatrix>> lu_;
};

/// Discrete counterparts of c(m-1) int |w_x|^2 and (cm/2) int int sigma' |eta_x|^2.
/// The memory term is the exact quadratic form produced by the upwind
/// s-transport, so flux + memory = Re <A U, U>_M to rounding.
struct DissipationTerms {
  double flux = 0.0;
  double memory = 0.0;
  double total() const { return flux + memory; }
};

DissipationTerms dissipation_form(const DiscreteOperator& op, const ComplexState& state);
DissipationTerms dissipation_form(const DiscreteOperator& op, const StateVector& state);

/// Re(U^H M V) and the induced norm.
double energy_inner(const DiscreteOperator& op, const ComplexState& u, const ComplexState& v);
double energy_norm(const DiscreteOperator& op, const ComplexState& u);
double energy_norm(const DiscreteOperator& op, const StateVector& u);

/// Lower-triangular F with M = F F^T (dense copy of the sparse Cholesky factor).
Eigen::MatrixXd gram_factor(const DiscreteOperator& op);

/// F^T A F^{-T}: similar to A, and the Euclidean norm in these coordinates is the energy norm.
Eigen::MatrixXd energy_coordinates_matrix(const DiscreteOperator& op);

/// Plain-text dump: "rows cols" header, then one row per line, %.17g values.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);

}  // namespace piezo
