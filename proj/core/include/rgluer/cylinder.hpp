#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rgluer/geometry.hpp"
#include "rgluer/spherical.hpp"

namespace rgluer {

// Fields on a cylinder [lo, hi] x S^{n-1}, restricted to the O(n-1)
// invariant sector: matrix entries field(i, q) at (t_i, theta_q), t uniform.
struct CylinderGrid {
  std::vector<double> t;
  ThetaGrid theta;

  int rows() const { return static_cast<int>(t.size()); }
  double spacing() const { return t[1] - t[0]; }
};
CylinderGrid make_cylinder_grid(int n, double lo, double hi, int nt,
                                int ntheta);

// Conjugated linearized operator
//   L = d^2/dt^2 + Lap_theta - ((n-2)/2)^2 + n(3n-2)/4 phi^{2-2n},
// applied mode-wise; one-sided second-order stencils at the end rows.
Eigen::MatrixXd apply_L(const CatenoidProfile& prof, const CylinderGrid& grid,
                        const Eigen::MatrixXd& w);

// Decaying model extension of boundary data with mode coefficients h (index
// = mode): w(t) = sum_j e^{-delta_j t} h_j P_j. Defined for t >= 0.
Eigen::MatrixXd poisson_extension(const CylinderGrid& grid,
                                  const Eigen::VectorXd& h_modes);

// Two-ended extension used on the neck [-t_eps, t_eps]: data h at both
// boundary spheres identified by the half-turn symmetry (t, z) -> (-t, -z),
//   w_j(t) = (e^{-delta_j (t_eps - t)} + (-1)^j e^{-delta_j (t_eps + t)}) h_j.
// Only modes j >= 2 may be present.
Eigen::MatrixXd shifted_poisson_extension(const CylinderGrid& grid,
                                          const Eigen::VectorXd& h_modes,
                                          double t_eps);

// Extension-by-damping of a right-hand side from the neck grid to a larger
// aligned grid: identity inside, the boundary-row value smoothly rolled off
// over one unit of t, zero beyond.
Eigen::MatrixXd extend_rhs(const CylinderGrid& neck, const CylinderGrid& ext,
                           const Eigen::MatrixXd& f);

// Mode-wise right inverse of L on a symmetric grid. For modes j >= 2,
// apply() solves the tridiagonal system built from the same centred
// interior stencil as apply_L, closed at the two ends by the ghost-node
// radiation condition u' = -sign(t) delta_j u (the decaying direction);
// inverting the identical interior rows makes a Picard fixed point satisfy
// the discrete equation to roundoff rather than to the gap between two
// discretizations. Modes 0 and 1 cannot use that closure: mode 1 owns a
// homogeneous solution decaying at both ends (the horizontal translation
// field), so the closed matrix would be near-singular. They use variation
// of parameters on the closed-form Jacobi pairs (Wronskians -(n-1) and n)
// with the particular solution normalized at the centre. The output is
// averaged with its pullback under (t, z) -> (-t, -z) so the inverse
// commutes with that symmetry for arbitrary data.
//
// The constructor also marches the scaled homogeneous pairs for j >= 2
// (shot from where the potential is below 1e-14); they validate the mode
// ODE structure and are exposed for tests.
class GreenSolver {
 public:
  GreenSolver(const CatenoidProfile& prof, const CylinderGrid& grid);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& f) const;

  // Homogeneous decaying solution of mode j >= 2 (normalized u(far) = 1)
  // and its Wronskian against the reflected partner; exposed for tests.
  const Eigen::MatrixXd& u_plus() const { return u_plus_; }
  double wronskian(int j) const { return wronskian_[j]; }

 private:
  CylinderGrid grid_;
  Eigen::MatrixXd u_minus_, u_plus_;  // homogeneous pairs, rows x modes
  Eigen::VectorXd wronskian_;
  Eigen::VectorXd pot_;  // n(3n-2)/4 phi^{2-2n} at the grid rows
};

// Weighted sup-norm with growth weight (cosh t)^{delta}: max over nodes of
// the weighted values and weighted raw first/second differences in both
// directions, so (cosh t)^delta itself has norm 1 on resolved grids.
double weighted_norm(const CylinderGrid& grid, const Eigen::MatrixXd& w,
                     double delta);

// Exponential rate of the mode-j solution that decays at -infinity,
// propagated to +t_max and fitted on the last half. Positive rate
// (approaching +delta_j) certifies that no decaying kernel exists in the
// mode; j = 1 instead reproduces -delta_1 (the horizontal-translation
// field), a sanity point for the same machinery.
double mode_growth_exponent(const CatenoidProfile& prof, int j, double t_max,
                            int nt);

}  // namespace rgluer
