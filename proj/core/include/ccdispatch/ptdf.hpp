#pragma once

#include <Eigen/Dense>

#include "ccdispatch/grid.hpp"

namespace ccd {

/// Dense PTDF matrix H (n_lines x n_buses) with the slack column zero, plus
/// the device-column slices used by the dispatch formulation. For any
/// injection vector p with 1'p = 0, line flows (MW, from->to positive)
/// are H * p.
struct PtdfMatrix {
  Eigen::MatrixXd H;    // n_f x n_bus
  Eigen::MatrixXd H_g;  // n_f x n_g, column j = H column of generator j's bus
  Eigen::MatrixXd H_d;  // n_f x n_d
  Eigen::MatrixXd H_w;  // n_f x n_w
};

/// Builds H by factorizing the reduced nodal susceptance matrix (slack row
/// and column deleted). Throws std::runtime_error("disconnected network")
/// if the reduced matrix is singular.
PtdfMatrix compute_ptdf(const GridCase& grid);

}  // namespace ccd
