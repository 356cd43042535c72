#include "piezo/grid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "piezo/error.hpp"

namespace piezo {

namespace {

// Upwind transport in s contributes -(cm/2) zeta^T S zeta to Re<AU,U>, where
// S = diag(a) B + B^T diag(a), B the backward difference, a_k = w_k sigma_k / ds_k.
void require_transport_dissipative(const GridSpec& g) {
  const int K = g.n_s;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(K, K);
  double scale = 0.0;
  for (int k = 0; k < K; ++k) {
    const double a = g.memory_weights[static_cast<std::size_t>(k)] / g.s_steps[static_cast<std::size_t>(k)];
    S(k, k) += 2.0 * a;
    if (k > 0) {
      S(k, k - 1) -= a;
      S(k - 1, k) -= a;
    }
    scale = std::max(scale, a);
  }
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (lo < -1e-12 * scale) {
    throw Error(ErrorCode::InvalidGrid, "history grid breaks discrete dissipativity of the s-transport");
  }
}

}  // namespace

GridSpec build_grid(const PhysicalParams& params, const MemoryKernel& kernel, int n_x, int n_s,
                    const GridOptions& opts) {
  if (n_x < 8) throw Error(ErrorCode::InvalidGrid, "n_x must be >= 8, got " + std::to_string(n_x));
  if (n_s < 0) throw Error(ErrorCode::InvalidGrid, "n_s must be >= 0");
  if (params.m() > 0.0 && n_s == 0) {
    throw Error(ErrorCode::HistoryRequiredForPositiveM, "m > 0 needs at least one history node");
  }

  GridSpec g;
  g.n_x = n_x;
  g.length = params.length();
  g.h = params.length() / n_x;
  g.n_s = params.m() > 0.0 ? n_s : 0;
  if (g.n_s == 0) return g;

  const int K = g.n_s;
  const auto Ks = static_cast<std::size_t>(K);
  g.s_max = kernel.truncation_point(opts.tail_tolerance);
  g.s_nodes.resize(Ks);
  // Renormalising the weights to g(0) spreads the half cell [0, s_1/2], which
  // the trapezoid drops, over every node: a relative bias of about
  // s_1 sigma(0) / (2 g(0)). Shrinking s_1 like 1/K^2 keeps refinement in s convergent.
  const double shrink = std::min(1.0, 16.0 / (static_cast<double>(K) * K));
  const double s1_target = opts.first_node_scale / kernel.d_sigma() * shrink;
  if (K == 1) {
    g.s_nodes[0] = g.s_max;
  } else if (g.s_max <= s1_target) {
    for (int k = 0; k < K; ++k) g.s_nodes[static_cast<std::size_t>(k)] = g.s_max * (k + 1) / K;
  } else {
    double r = std::pow(g.s_max / s1_target, 1.0 / (K - 1));
    r = std::min(r, opts.max_ratio);
    g.s_ratio = r;
    const double s1 = g.s_max / std::pow(r, K - 1);
    for (int k = 0; k < K; ++k) g.s_nodes[static_cast<std::size_t>(k)] = s1 * std::pow(r, k);
    g.s_nodes[Ks - 1] = g.s_max;
  }

  g.s_steps.resize(Ks);
  for (std::size_t k = 0; k < Ks; ++k) g.s_steps[k] = g.s_nodes[k] - (k == 0 ? 0.0 : g.s_nodes[k - 1]);

  g.s_weights.resize(Ks);
  g.sigma_nodes.resize(Ks);
  double mass = 0.0;
  for (std::size_t k = 0; k < Ks; ++k) {
    g.s_weights[k] = 0.5 * g.s_steps[k] + (k + 1 < Ks ? 0.5 * g.s_steps[k + 1] : 0.0);
    g.sigma_nodes[k] = kernel.sigma(g.s_nodes[k]);
    if (!(g.sigma_nodes[k] > 0.0)) {
      throw Error(ErrorCode::InvalidGrid, "kernel vanishes at history node s=" + std::to_string(g.s_nodes[k]));
    }
    mass += g.s_weights[k] * g.sigma_nodes[k];
  }
  const double scale = kernel.g0() / mass;
  g.memory_weights.resize(Ks);
  for (std::size_t k = 0; k < Ks; ++k) {
    g.s_weights[k] *= scale;
    g.memory_weights[k] = g.s_weights[k] * g.sigma_nodes[k];
  }
  require_transport_dissipative(g);
  return g;
}

StateBlocks zero_blocks(const GridSpec& grid) {
  StateBlocks b;
  b.u = b.v = b.y = b.z = Eigen::VectorXd::Zero(grid.mech_size());
  b.w = Eigen::VectorXd::Zero(grid.thermal_size());
  b.eta.assign(static_cast<std::size_t>(grid.n_s), Eigen::VectorXd::Zero(grid.thermal_size()));
  return b;
}

StateVector pack(const GridSpec& grid, const StateBlocks& b) {
  const Eigen::Index n = grid.mech_size();
  const Eigen::Index nw = grid.thermal_size();
  auto check = [](const Eigen::VectorXd& v, Eigen::Index len, const char* name) {
    if (v.size() != len) {
      throw Error(ErrorCode::ShapeMismatch, std::string(name) + " block has length " + std::to_string(v.size()) +
                                                ", expected " + std::to_string(len));
    }
  };
  check(b.u, n, "u");
  check(b.v, n, "v");
  check(b.y, n, "y");
  check(b.z, n, "z");
  check(b.w, nw, "w");
  if (b.eta.size() != static_cast<std::size_t>(grid.n_s)) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(grid.n_s) + " history slices, got " +
                                              std::to_string(b.eta.size()));
  }
  StateVector s(grid.dim());
  s.segment(grid.offset_u(), n) = b.u;
  s.segment(grid.offset_v(), n) = b.v;
  s.segment(grid.offset_y(), n) = b.y;
  s.segment(grid.offset_z(), n) = b.z;
  s.segment(grid.offset_w(), nw) = b.w;
  for (int k = 0; k < grid.n_s; ++k) {
    check(b.eta[static_cast<std::size_t>(k)], nw, "eta");
    s.segment(grid.offset_eta(k), nw) = b.eta[static_cast<std::size_t>(k)];
  }
  return s;
}

StateBlocks unpack(const GridSpec& grid, const StateVector& s) {
  if (s.size() != grid.dim()) {
    throw Error(ErrorCode::ShapeMismatch,
                "state has length " + std::to_string(s.size()) + ", grid expects " + std::to_string(grid.dim()));
  }
  const Eigen::Index n = grid.mech_size();
  const Eigen::Index nw = grid.thermal_size();
  StateBlocks b;
  b.u = s.segment(grid.offset_u(), n);
  b.v = s.segment(grid.offset_v(), n);
  b.y = s.segment(grid.offset_y(), n);
  b.z = s.segment(grid.offset_z(), n);
  b.w = s.segment(grid.offset_w(), nw);
  b.eta.reserve(static_cast<std::size_t>(grid.n_s));
  for (int k = 0; k < grid.n_s; ++k) b.eta.emplace_back(s.segment(grid.offset_eta(k), nw));
  return b;
}

}  // namespace piezo
