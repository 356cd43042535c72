#pragma once

#include <Eigen/Core>
#include <vector>

#include "piezo/params.hpp"

namespace piezo {

using StateVector = Eigen::VectorXd;
using ComplexState = Eigen::VectorXcd;

struct GridOptions {
  double first_node_scale = 0.05;  // s_1 <= first_node_scale / d_sigma * min(1, 16 / K^2)
  double max_ratio = 4.0;
  double tail_tolerance = 1e-8;    // g(s_max) < tail_tolerance * g(0)
};

/// Spatial grid plus the history quadrature in s.
///
/// Space: h = L / n_x. The mechanical fields u, v, y, z live at the cell
/// centres x_{j+1/2}, j = 0..n_x-1 (odd reflection at x = 0 gives u(0) = 0,
/// even reflection at x = L gives u_x(L) = 0). The temperature w and every
/// history slice eta(., s_k) live at the interior nodes x_i, i = 1..n_x-1,
/// with homogeneous Dirichlet values at both ends.
///
/// History: nodes 0 < s_1 < ... < s_K = s_max, geometric with ratio r, and
/// eta(., 0) = 0 as the inflow value. Weights are trapezoidal with
/// sum_k w_k sigma(s_k) = g(0) after rescaling.
///
/// Flat state layout (offsets in this order, no padding):
///   u[n_x] v[n_x] y[n_x] z[n_x] w[n_x-1] eta_1[n_x-1] ... eta_K[n_x-1]
struct GridSpec {
  int n_x = 0;
  int n_s = 0;
  double length = 0.0;
  double h = 0.0;
  double s_max = 0.0;
  double s_ratio = 1.0;
  std::vector<double> s_nodes;
  std::vector<double> s_steps;         // s_k - s_{k-1}, s_0 = 0
  std::vector<double> s_weights;       // w_k
  std::vector<double> sigma_nodes;     // sigma(s_k)
  std::vector<double> memory_weights;  // w_k sigma(s_k)

  Eigen::Index mech_size() const { return n_x; }
  Eigen::Index thermal_size() const { return n_x - 1; }
  Eigen::Index dim() const { return 4 * mech_size() + (n_s + 1) * thermal_size(); }

  Eigen::Index offset_u() const { return 0; }
  Eigen::Index offset_v() const { return mech_size(); }
  Eigen::Index offset_y() const { return 2 * mech_size(); }
  Eigen::Index offset_z() const { return 3 * mech_size(); }
  Eigen::Index offset_w() const { return 4 * mech_size(); }
  Eigen::Index offset_eta(int k) const { return offset_w() + (k + 1) * thermal_size(); }

  double centre(int j) const { return (j + 0.5) * h; }
  double node(int i) const { return (i + 1) * h; }
};

/// Throws InvalidGrid (n_x < 8) or HistoryRequiredForPositiveM (n_s = 0, m > 0).
/// At m = 0 the history block is dropped whatever n_s is requested.
GridSpec build_grid(const PhysicalParams& params, const MemoryKernel& kernel, int n_x, int n_s,
                    const GridOptions& opts = {});

struct StateBlocks {
  Eigen::VectorXd u, v, y, z, w;
  std::vector<Eigen::VectorXd> eta;
};

/// Zero blocks sized for the grid.
StateBlocks zero_blocks(const GridSpec& grid);

/// Throws ShapeMismatch if any block length disagrees with the grid.
StateVector pack(const GridSpec& grid, const StateBlocks& blocks);
StateBlocks unpack(const GridSpec& grid, const StateVector& state);

}  // namespace piezo
