#pragma once

#include <Eigen/Dense>

namespace rgluer {

// Rotation-invariant spectral data on the cross-section sphere S^{n-1}:
// invariant functions depend only on the polar angle theta, and the
// Laplace-Beltrami eigenfunctions among them are Gegenbauer polynomials
// C_j^{(n-2)/2}(cos theta) with eigenvalue -j(j+n-2). Nodes are Gauss
// points for the weight sin^{n-2} theta, so the discrete basis is
// orthonormal to machine precision and analysis inverts synthesis exactly
// on all resolved modes.
struct ThetaGrid {
  int n = 0;
  Eigen::VectorXd theta;     // K nodes, increasing, inside (0, pi)
  Eigen::VectorXd weight;    // quadrature weights, sin^{n-2} included
  Eigen::MatrixXd basis;     // basis(q, j) = P_j(theta_q), K x K
  Eigen::MatrixXd analysis;  // coefficients = analysis * values
  Eigen::MatrixXd d1;        // d/dtheta acting on node values
  Eigen::MatrixXd d2;        // d^2/dtheta^2 acting on node values

  int points() const { return static_cast<int>(theta.size()); }
};

ThetaGrid make_theta_grid(int n, int points);

double mode_eigenvalue(int n, int j);  // j (j + n - 2)
double mode_decay_rate(int n, int j);  // delta_j = (n-2)/2 + j

Eigen::VectorXd analyze(const ThetaGrid& grid, const Eigen::VectorXd& values);
Eigen::VectorXd synthesize(const ThetaGrid& grid,
                           const Eigen::VectorXd& coeffs);

// C_j^lambda(x) by the three-term recurrence; j < 0 yields 0.
double gegenbauer(int j, double lambda, double x);

// values = c0 + c1 cos(theta) + perp with perp orthogonal to 1 and
// cos(theta) under the sin^{n-2} measure.
struct LowModeSplit {
  double c0 = 0;
  double c1 = 0;
  Eigen::VectorXd perp;
};
LowModeSplit split_low_modes(const ThetaGrid& grid,
                             const Eigen::VectorXd& values);

}  // namespace rgluer
