#pragma once

#include <Eigen/Dense>
#include <span>

#include "rgluer/spherical.hpp"

namespace rgluer {

// Mean curvature (metric trace of the second fundamental form, no 1/n
// normalization) of hypersurfaces of R^{n+1} with an O(n-1) symmetry,
// computed from a generating surface in the 3-space spanned by the axis
// direction, the transverse radius and the vertical direction.

// Invariant form: the generating surface is
//   (a(t,theta) cos theta, a(t,theta) sin theta, c(t,theta)),
// i.e. horizontal displacement parallel to the cross-section direction.
// a and c must be band-limited on the theta grid (true for catenoid
// geometry plus any resolved perturbation), so theta derivatives are
// spectral and the only truncation error is the 3/4-point finite
// difference in t: O(h^2) including the one-sided boundary rows.
// The transverse multiplicity n-2 adds the -(n-2) nu_transverse / B term.
// Orientation: normal = F_t x F_theta, which on the catenoid itself equals
// (-phi^{1-n} z, dphi/phi).
Eigen::MatrixXd mean_curvature_invariant(std::span<const double> tgrid,
                                         const ThetaGrid& theta,
                                         const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& c);

// Periodic form: generating surface (A, B, C)(s, angle) with a uniform
// periodic angle grid (spacing 2 pi / columns), centered differences in
// both directions, multiplicity m >= 0 transverse spheres of radius B
// (m = 0 is an ordinary surface in R^3, used by the 2D baseline).
Eigen::MatrixXd mean_curvature_periodic(std::span<const double> sgrid,
                                        const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& B,
                                        const Eigen::MatrixXd& C, int m);

// Quadratic part of the vertical-graph minimality equation:
//   Xi(u) = (u_11 u_1^2 + 2 u_1r u_1 u_r + u_rr u_r^2) / (1 + u_1^2 + u_r^2),
// so the graph x^{n+1} = u is minimal iff Delta_n u = Xi(u).
double xi_value(double u1, double ur, double u11, double u1r, double urr);

// Minimality defect Delta_n u - Xi(u) of an axisymmetric vertical graph
// sampled on a tensor patch with r > 0 throughout.
Eigen::MatrixXd graph_minimality_defect(std::span<const double> x1,
                                        std::span<const double> r,
                                        const Eigen::MatrixXd& u, int n);

}  // namespace rgluer
