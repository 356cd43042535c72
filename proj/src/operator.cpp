#include "piezo/operator.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "piezo/error.hpp"

namespace piezo {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& out, Eigen::Index row, Eigen::Index col, const SparseMatrix& block,
               double scale) {
  if (scale == 0.0) return;
  for (int outer = 0; outer < block.outerSize(); ++outer) {
    for (SparseMatrix::InnerIterator it(block, outer); it; ++it) {
      out.emplace_back(row + it.row(), col + it.col(), scale * it.value());
    }
  }
}

void add_identity(std::vector<Triplet>& out, Eigen::Index row, Eigen::Index col, Eigen::Index n, double scale) {
  for (Eigen::Index i = 0; i < n; ++i) out.emplace_back(row + i, col + i, scale);
}

SparseMatrix mech_difference(int n, double h) {
  std::vector<Triplet> t;
  t.emplace_back(0, 0, 2.0 / h);  // odd ghost: u_{-1/2} = -u_{1/2}
  for (int r = 1; r < n; ++r) {
    t.emplace_back(r, r, 1.0 / h);
    t.emplace_back(r, r - 1, -1.0 / h);
  }
  SparseMatrix d(n, n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

SparseMatrix node_difference(int n, double h) {
  std::vector<Triplet> t;
  for (int j = 0; j < n; ++j) {
    if (j <= n - 2) t.emplace_back(j, j, 1.0 / h);
    if (j >= 1) t.emplace_back(j, j - 1, -1.0 / h);
  }
  SparseMatrix g(n, n - 1);
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

void require_dim(const DiscreteOperator& op, Eigen::Index n, const char* what) {
  if (n != op.dim()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected length " + std::to_string(op.dim()) +
                                              ", got " + std::to_string(n));
  }
}

}  // namespace

DiscreteOperator::DiscreteOperator(const PhysicalParams& params, const MemoryKernel& kernel, const GridSpec& grid)
    : params_(params), kernel_(kernel), grid_(grid) {
  const int n = grid.n_x;
  const int nt = n - 1;
  const double h = grid.h;

  d_mech_ = mech_difference(n, h);
  w_mech_ = Eigen::VectorXd::Constant(n, h);
  w_mech_(0) = 0.5 * h;
  g_ = node_difference(n, h);

  const SparseMatrix stiff = SparseMatrix(d_mech_.transpose() * w_mech_.asDiagonal() * d_mech_);
  const SparseMatrix lap = -stiff / h;
  const SparseMatrix gt = SparseMatrix(g_.transpose());
  const SparseMatrix lw = SparseMatrix(-(gt * g_));

  const double rho = params.rho(), alpha = params.alpha(), alpha1 = params.alpha1();
  const double gam = params.gamma(), beta = params.beta(), mu = params.mu();
  const double delta = params.delta(), c = params.c(), m = params.m();

  const auto ou = grid.offset_u(), ov = grid.offset_v(), oy = grid.offset_y(), oz = grid.offset_z();
  const auto ow = grid.offset_w();
  const Eigen::Index dim = grid.dim();

  std::vector<Triplet> ta;
  add_identity(ta, ou, ov, n, 1.0);
  add_block(ta, ov, ou, lap, alpha / rho);
  add_block(ta, ov, oy, lap, -gam * beta / rho);
  add_block(ta, ov, ow, g_, -delta / rho);
  add_identity(ta, oy, oz, n, 1.0);
  add_block(ta, oz, oy, lap, beta / mu);
  add_block(ta, oz, ou, lap, -gam * beta / mu);
  add_block(ta, ow, ow, lw, c * (1.0 - m));
  add_block(ta, ow, ov, gt, delta);  // -delta v_x with v_x = -G^T v at the nodes
  for (int k = 0; k < grid.n_s; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const auto oe = grid.offset_eta(k);
    add_block(ta, ow, oe, lw, c * m * grid.memory_weights[ks]);
    add_identity(ta, oe, ow, nt, 1.0);
    add_identity(ta, oe, oe, nt, -1.0 / grid.s_steps[ks]);
    if (k > 0) add_identity(ta, oe, grid.offset_eta(k - 1), nt, 1.0 / grid.s_steps[ks]);
  }
  a_.resize(dim, dim);
  a_.setFromTriplets(ta.begin(), ta.end());

  std::vector<Triplet> tm;
  add_block(tm, ou, ou, stiff, alpha1 + beta * gam * gam);
  add_block(tm, ou, oy, stiff, -beta * gam);
  add_block(tm, oy, ou, stiff, -beta * gam);
  add_block(tm, oy, oy, stiff, beta);
  add_identity(tm, ov, ov, n, rho * h);
  add_identity(tm, oz, oz, n, mu * h);
  add_identity(tm, ow, ow, nt, h);
  const SparseMatrix gtg = SparseMatrix(gt * g_);
  for (int k = 0; k < grid.n_s; ++k) {
    const auto oe = grid.offset_eta(k);
    add_block(tm, oe, oe, gtg, c * m * grid.memory_weights[static_cast<std::size_t>(k)] * h);
  }
  m_.resize(dim, dim);
  m_.setFromTriplets(tm.begin(), tm.end());

  a_.makeCompressed();
  m_.makeCompressed();
  a_dense_ = Eigen::MatrixXd(a_);
  m_dense_ = Eigen::MatrixXd(m_);
}

DiscreteOperator assemble(const PhysicalParams& params, const MemoryKernel& kernel, const GridSpec& grid) {
  return DiscreteOperator(params, kernel, grid);
}

StateVector apply(const DiscreteOperator& op, const StateVector& state) {
  require_dim(op, state.size(), "apply");
  return op.sparse_matrix() * state;
}

StateVector solve_static(const DiscreteOperator& op, const StateVector& f) {
  require_dim(op, f.size(), "solve_static");
  const double fn = f.norm();
  if (fn == 0.0) return StateVector::Zero(f.size());

  const SparseMatrix neg = -op.sparse_matrix();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(neg);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularOperator, "LU of -A failed: " + lu.lastErrorMessage());
  }
  StateVector u = lu.solve(f);
  StateVector r = f - neg * u;
  for (int pass = 0; pass < 2 && r.norm() > 1e-12 * fn; ++pass) {
    u += lu.solve(r);
    r = f - neg * u;
  }
  if (!u.allFinite() || r.norm() > 1e-10 * fn) {
    throw Error(ErrorCode::SingularOperator,
                "static solve residual " + std::to_string(r.norm() / fn) + " exceeds 1e-10 relative");
  }
  return u;
}

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op, double lambda)
    : lambda_(lambda), lu_(std::make_shared<Eigen::SparseLU<ComplexSparseMatrix>>()) {
  const Eigen::Index n = op.dim();
  ComplexSparseMatrix shifted = -op.sparse_matrix().cast<std::complex<double>>();
  ComplexSparseMatrix eye(n, n);
  eye.setIdentity();
  shifted += std::complex<double>(0.0, lambda) * eye;
  shifted.makeCompressed();
  lu_->compute(shifted);
  if (lu_->info() != Eigen::Success) {
    throw Error(ErrorCode::ResolventSingular,
                "i*lambda - A is singular at lambda=" + std::to_string(lambda) + ": " + lu_->lastErrorMessage());
  }
}

ComplexState ShiftedSolver::solve(const ComplexState& f) const {
  ComplexState x = lu_->solve(f);
  if (!x.allFinite()) throw Error(ErrorCode::ResolventSingular, "non-finite resolvent solve");
  return x;
}

ComplexState ShiftedSolver::solve_adjoint(const ComplexState& f) const {
  ComplexState x = lu_->adjoint().solve(f);
  if (!x.allFinite()) throw Error(ErrorCode::ResolventSingular, "non-finite adjoint resolvent solve");
  return x;
}

DissipationTerms dissipation_form(const DiscreteOperator& op, const ComplexState& state) {
  require_dim(op, state.size(), "dissipation_form");
  const GridSpec& g = op.grid();
  const double c = op.params().c(), m = op.params().m(), h = g.h;
  const Eigen::Index nt = g.thermal_size();

  DissipationTerms out;
  const ComplexState gw = op.node_diff() * state.segment(g.offset_w(), nt);
  out.flux = -c * (1.0 - m) * h * gw.squaredNorm();

  // Upwind transport: sum_k a_k <zeta_k, zeta_k - zeta_{k-1}> split into a
  // telescoping part and a jump part, a_k = w_k sigma_k / ds_k.
  const int K = g.n_s;
  double acc = 0.0;
  ComplexState prev = ComplexState::Zero(g.n_x);
  for (int k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const ComplexState zeta = op.node_diff() * state.segment(g.offset_eta(k), nt);
    const double a = g.memory_weights[ks] / g.s_steps[ks];
    const double a_next = k + 1 < K ? g.memory_weights[ks + 1] / g.s_steps[ks + 1] : 0.0;
    acc += (a - a_next) * zeta.squaredNorm() + a * (zeta - prev).squaredNorm();
    prev = zeta;
  }
  out.memory = -0.5 * c * m * h * acc;
  return out;
}

DissipationTerms dissipation_form(const DiscreteOperator& op, const StateVector& state) {
  return dissipation_form(op, ComplexState(state.cast<std::complex<double>>()));
}

double energy_inner(const DiscreteOperator& op, const ComplexState& u, const ComplexState& v) {
  require_dim(op, u.size(), "energy_inner");
  require_dim(op, v.size(), "energy_inner");
  const ComplexState mv = op.sparse_gram().cast<std::complex<double>>() * v;
  return u.dot(mv).real();
}

double energy_norm(const DiscreteOperator& op, const ComplexState& u) {
  return std::sqrt(std::max(0.0, energy_inner(op, u, u)));
}

double energy_norm(const DiscreteOperator& op, const StateVector& u) {
  require_dim(op, u.size(), "energy_norm");
  return std::sqrt(std::max(0.0, u.dot(op.sparse_gram() * u)));
}

Eigen::MatrixXd gram_factor(const DiscreteOperator& op) {
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(op.sparse_gram());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularOperator, "Gram matrix is not positive definite");
  }
  return Eigen::MatrixXd(SparseMatrix(llt.matrixL()));
}

Eigen::MatrixXd energy_coordinates_matrix(const DiscreteOperator& op) {
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(op.sparse_gram());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularOperator, "Gram matrix is not positive definite");
  }
  const SparseMatrix f = llt.matrixL();
  // X = A F^{-T}  <=>  X^T = F^{-1} A^T
  Eigen::MatrixXd xt = op.matrix().transpose();
  f.triangularView<Eigen::Lower>().solveInPlace(xt);
  return SparseMatrix(f.transpose()) * xt.transpose();
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace piezo
