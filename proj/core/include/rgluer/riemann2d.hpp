#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rgluer {

// Two-dimensional baseline: surfaces foliated by circles in parallel
// planes, generated by the zero-energy solutions of
//   R'' = mu R + 2 R^3,   a' = R^2,
// with R'(0) = 0 and mu R^2(0) + R^4(0) = 1, so that
//   (R')^2 + 1 - mu R^2 - R^4 = 0
// along the whole orbit. mu = 0 is the single-period catenoid-like neck;
// mu = 1 tightens the neck. R blows up at a finite parameter (the planar
// end), so the sample range must stop short of it.
struct Riemann2D {
  double mu = 0;
  std::vector<double> lambda;   // [0, lambda_max], uniform
  std::vector<double> radius;   // R
  std::vector<double> dradius;  // R'
  std::vector<double> center;   // a, offset of the circle center
};

double neck_radius2d(double mu);  // positive root of R^4 + mu R^2 = 1

Riemann2D solve_riemann2d(double mu, double lambda_max, int samples);

// max |(R')^2 + 1 - mu R^2 - R^4| over the stored samples
double energy_defect2d(const Riemann2D& sol);

// The foliated surface over the symmetric range [-lambda_max, lambda_max]
// as a generating map for the periodic-angle curvature evaluator:
//   (A, B, C)(i, k) = (a_i + R_i cos phi_k, R_i sin phi_k, lambda_i).
struct Surface3 {
  std::vector<double> s;
  Eigen::MatrixXd A, B, C;
};
Surface3 riemann2d_surface(const Riemann2D& sol, int nphi);

}  // namespace rgluer
