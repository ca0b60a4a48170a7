#include "rgluer/spherical.hpp"

#include <cmath>
#include <stdexcept>

#include "rgluer/numerics.hpp"

namespace rgluer {

double gegenbauer(int j, double lambda, double x) {
  if (j < 0) return 0.0;
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * lambda * x;
  for (int k = 1; k < j; ++k) {
    const double next =
        (2.0 * (k + lambda) * x * cur - (k + 2.0 * lambda - 1.0) * prev) /
        (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

ThetaGrid make_theta_grid(int n, int points) {
  if (n < 3) throw std::invalid_argument("make_theta_grid: requires n >= 3");
  if (points < 2) throw std::invalid_argument("make_theta_grid: points < 2");
  const double lambda = (n - 2) / 2.0;
  const Quadrature1D q = gauss_gegenbauer(points, (n - 3) / 2.0);

  ThetaGrid grid;
  grid.n = n;
  grid.theta.resize(points);
  grid.weight.resize(points);
  // x ascending means theta = arccos(x) descending; reverse.
  for (int i = 0; i < points; ++i) {
    grid.theta[i] = std::acos(q.nodes[points - 1 - i]);
    grid.weight[i] = q.weights[points - 1 - i];
  }

  grid.basis.resize(points, points);
  Eigen::MatrixXd dbasis(points, points), ddbasis(points, points);
  for (int j = 0; j < points; ++j) {
    for (int qi = 0; qi < points; ++qi) {
      const double th = grid.theta[qi];
      const double x = std::cos(th), s = std::sin(th);
      const double c1 = 2.0 * lambda * gegenbauer(j - 1, lambda + 1.0, x);
      const double c2 =
          4.0 * lambda * (lambda + 1.0) * gegenbauer(j - 2, lambda + 2.0, x);
      grid.basis(qi, j) = gegenbauer(j, lambda, x);
      dbasis(qi, j) = -s * c1;                 // d/dtheta of C_j(cos theta)
      ddbasis(qi, j) = s * s * c2 - x * c1;
    }
    const double norm =
        std::sqrt(grid.weight.dot(grid.basis.col(j).cwiseAbs2()));
    grid.basis.col(j) /= norm;
    dbasis.col(j) /= norm;
    ddbasis.col(j) /= norm;
  }
  grid.analysis = grid.basis.transpose() * grid.weight.asDiagonal();
  grid.d1 = dbasis * grid.analysis;
  grid.d2 = ddbasis * grid.analysis;
  return grid;
}

double mode_eigenvalue(int n, int j) {
  return static_cast<double>(j) * (j + n - 2);
}

double mode_decay_rate(int n, int j) { return (n - 2) / 2.0 + j; }

Eigen::VectorXd analyze(const ThetaGrid& grid, const Eigen::VectorXd& values) {
  return grid.analysis * values;
}

Eigen::VectorXd synthesize(const ThetaGrid& grid,
                           const Eigen::VectorXd& coeffs) {
  return grid.basis * coeffs;
}

LowModeSplit split_low_modes(const ThetaGrid& grid,
                             const Eigen::VectorXd& values) {
  const Eigen::VectorXd cosv = grid.theta.array().cos();
  const double w1 = grid.weight.sum();
  const double wc = grid.weight.dot(cosv.cwiseAbs2());
  LowModeSplit split;
  split.c0 = grid.weight.dot(values) / w1;
  split.c1 = (grid.weight.array() * cosv.array() * values.array()).sum() / wc;
  split.perp = values.array() - split.c0 - split.c1 * cosv.array();
  return split;
}

}  // namespace rgluer
