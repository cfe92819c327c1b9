#include "ccdispatch/ptdf.hpp"

#include <stdexcept>

namespace ccd {

PtdfMatrix compute_ptdf(const GridCase& grid) {
  const int nb = int(grid.buses.size());
  const int nf = int(grid.lines.size());
  const int slack = grid.slack_index();

  // Branch susceptance matrix Bf = diag(1/x) * A and nodal B = A' diag(1/x) A.
  Eigen::MatrixXd Bf = Eigen::MatrixXd::Zero(nf, nb);
  Eigen::MatrixXd Bbus = Eigen::MatrixXd::Zero(nb, nb);
  for (int l = 0; l < nf; ++l) {
    const Line& ln = grid.lines[l];
    const double b = 1.0 / ln.reactance;
    Bf(l, ln.from_bus) = b;
    Bf(l, ln.to_bus) = -b;
    Bbus(ln.from_bus, ln.from_bus) += b;
    Bbus(ln.to_bus, ln.to_bus) += b;
    Bbus(ln.from_bus, ln.to_bus) -= b;
    Bbus(ln.to_bus, ln.from_bus) -= b;
  }

  // Delete the slack row/column and invert.
  Eigen::MatrixXd Bred(nb - 1, nb - 1);
  std::vector<int> keep;
  keep.reserve(nb - 1);
  for (int i = 0; i < nb; ++i)
    if (i != slack) keep.push_back(i);
  for (int i = 0; i < nb - 1; ++i)
    for (int j = 0; j < nb - 1; ++j) Bred(i, j) = Bbus(keep[i], keep[j]);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(Bred);
  if (!lu.isInvertible()) throw std::runtime_error("disconnected network");

  Eigen::MatrixXd Bf_red(nf, nb - 1);
  for (int j = 0; j < nb - 1; ++j) Bf_red.col(j) = Bf.col(keep[j]);

  // H_red = Bf_red * Bred^{-1}; solve Bred' X' = Bf_red' to avoid the inverse.
  Eigen::MatrixXd H_red = lu.solve(Bf_red.transpose()).transpose();

  PtdfMatrix p;
  p.H = Eigen::MatrixXd::Zero(nf, nb);
  for (int j = 0; j < nb - 1; ++j) p.H.col(keep[j]) = H_red.col(j);

  p.H_g.resize(nf, grid.generators.size());
  for (std::size_t g = 0; g < grid.generators.size(); ++g)
    p.H_g.col(g) = p.H.col(grid.generators[g].bus);
  p.H_d.resize(nf, grid.loads.size());
  for (std::size_t d = 0; d < grid.loads.size(); ++d)
    p.H_d.col(d) = p.H.col(grid.loads[d].bus);
  p.H_w.resize(nf, grid.wind_farms.size());
  for (std::size_t w = 0; w < grid.wind_farms.size(); ++w)
    p.H_w.col(w) = p.H.col(grid.wind_farms[w].bus);
  return p;
}

}  // namespace ccd
