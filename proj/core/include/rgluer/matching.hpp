#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rgluer/neck.hpp"
#include "rgluer/planar.hpp"

namespace rgluer {

// Dirichlet-to-Neumann map of the paired harmonic extensions on the unit
// sphere: mode j of d_r(w^e_h - w^i_h) at r = 1 is -(n-2+2j) h_j, from
// d_r r^{2-n-j} - d_r r^j there. Diagonal with nonzero entries, hence an
// isomorphism; invert divides by the eigenvalue.
Eigen::VectorXd dtn_operator(int n, const Eigen::VectorXd& h_modes,
                             bool invert = false);

// Placement of the neck induced by the low modes of its boundary data: the
// tilt rho = -h_1 / r_eps trades the mode-1 data for a rotation of the
// planar end, and the vertical offset
//   t = eps^{1/(n-1)} d0 + rho - n/(n-2) 2^{1-n} eps + h_0
// aligns the constant parts of the two local models (the last two terms are
// the value of the opposite-puncture monopole and its gradient at +x*,
// which the planar model carries and the neck does not). h_0 is the
// constant value and h_1 the coefficient of z^1, read from the
// normalized-basis coefficients.
struct GluingParameters {
  double rho = 0;
  double t_offset = 0;
};
GluingParameters gluing_parameters(const PlanarGrid& grid,
                                   const CatenoidProfile& prof,
                                   const Eigen::VectorXd& h_modes);

// Residual of the C^1 matching system on the interface sphere of radius
// r_eps about +x*, mode by mode in the rescaled radial variable
// r = |y| / r_eps:
//   value:      (h_j - hbar_j)           - [vbar_j(1) - v_j(1)]
//   derivative: (j h_j - (2-n-j) hbar_j) - [vbar_j'(1) - v_j'(1)]
// where v is the neck boundary-graph discrepancy and vbar the planar one.
// The monopole, constant, and tilt parts of the two local models cancel
// identically under the gluing_parameters choices, so the residual couples
// only the harmonic-extension split of (h, hbar) to the measured data.
// Derivatives are one-sided five-point stencils on each profile's rings.
struct CauchyMismatch {
  Eigen::VectorXd value_jump;
  Eigen::VectorXd derivative_jump;

  double sup() const;
};
CauchyMismatch cauchy_mismatch(const PlanarGrid& grid,
                               const Eigen::VectorXd& h,
                               const Eigen::VectorXd& h_bar,
                               const NeckBoundaryGraph& neck,
                               const AnnularProfile& plan);

// sup of sum_j m_j P_j over the cross-section sphere (nodes and both poles).
double mode_sup(const PlanarGrid& grid, const Eigen::VectorXd& modes);

struct MatchConfig {
  int modes = 13;          // matched mode count, <= angular nodes
  int neck_rows = 257;     // cylinder rows (odd)
  PlanarGridSpec planar;   // collar_points doubles as the neck's theta count
  double tol = 1e-9;       // outer stop, relative to eps r_eps^2
  // Picard step target of both sub-solvers; a solve whose steps contract
  // hard and then flatten on the roundoff plateau above this also counts.
  double inner_tol = 3e-14;
  int max_outer = 30;
};

struct MatchState {
  Eigen::VectorXd h;      // neck boundary data, normalized-basis modes
  Eigen::VectorXd h_bar;  // planar boundary data
  double rho = 0;         // re-derived from h, never cached
  double t_offset = 0;
  std::vector<double> mismatch_log;  // sup of both jumps per outer iterate
  double c0 = 0;  // first-iterate norm coefficient, |(h,hbar)|_1 / eps r_eps^2
  bool converged = false;
};

// Outer fixed point: from (h, hbar) derive (rho, t), solve the neck with
// the modes >= 2 of h and the planar end with (rho, hbar), measure the
// Cauchy mismatch, and re-solve the mode-wise model system
//   h_j - hbar_j = V_j,  j h_j - (2-n-j) hbar_j = D_j
// (determinant n-2+2j: the value split plus the inverted
// Dirichlet-to-Neumann map) against the measured data. Stops when the
// mismatch sup drops below tol * eps * r_eps^2. A growing mismatch after
// the second iterate or an iterate outside the ball of radius
// 2 c0 eps r_eps^2 throws with the log in the message.
MatchState outer_fixed_point(int n, double eps, const MatchConfig& cfg = {});

}  // namespace rgluer
