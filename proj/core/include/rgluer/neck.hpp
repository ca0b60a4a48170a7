#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rgluer/cylinder.hpp"
#include "rgluer/geometry.hpp"
#include "rgluer/spherical.hpp"

namespace rgluer {

// Nonlinear neck problem at unit scale. The perturbed immersion
//   X_w = X_0 + phi^{(2-n)/2} w (chi nu + (1 - chi) e_{n+1})
// must match the discrete minimality of the unperturbed catenoid, so the
// defect is measured against the baseline:
//   M(w) = phi^{(n+2)/2} [H(X_w) - H(X_0)],
// which kills the quadrature floor of the curvature evaluator and
// linearizes to the conjugated operator L in the core region.
struct NeckProblem {
  CatenoidProfile prof;
  ScaleParameters scales;
  CutoffSpec chi;
  CylinderGrid grid;  // [-t_eps, t_eps]
  CylinderGrid ext;   // aligned extension carrying the damped collar
  GreenSolver green;  // on the extended grid
  Eigen::MatrixXd base_curvature;  // H(X_0) on the neck grid
  double delta_norm = 0;           // weight exponent for step norms
};

NeckProblem make_neck_problem(int n, double eps, int nt, int ntheta);

// Conjugation of physical boundary data (vertical graph values on the
// matching sphere) to the scale of w: h -> eps^{-1/(n-1)} phi^{(n-2)/2} h.
Eigen::VectorXd rescale_boundary_modes(const NeckProblem& prob,
                                       const Eigen::VectorXd& h_modes);

Eigen::MatrixXd curvature_defect(const NeckProblem& prob,
                                 const Eigen::MatrixXd& w);

// Picard iteration v <- G(E(L v - M(w_tilde + v))) from v = 0. The solver
// inverts the same interior stencil the feedback applies, so a fixed point
// drives the defect on the interior rows to roundoff (modes 0 and 1 keep
// the small mismatch of their variation-of-parameters inverse). The end
// rows state the boundary data, not an equation; the defect evaluated
// there by one-sided stencils is a plain O(h^2) consistency quantity and
// is reported separately. Steps are measured in the
// (cosh t)^{delta_norm}-weighted norm.
struct PicardTrace {
  std::vector<double> step_norms;
  double residual = 0;     // sup |M| over interior rows at the final iterate
  double edge_defect = 0;  // sup |M| over the two end rows
  bool converged = false;
};
PicardTrace solve_neck(const NeckProblem& prob, const Eigen::MatrixXd& w_tilde,
                       Eigen::MatrixXd& v, double tol, int max_iter);

// Vertical-graph read-off near the matching sphere: for each requested
// physical radius r <= r_eps and each theta node, solve
//   eps^{1/(n-1)} radial(t, w(t, theta)) = r
// for t > 0 and report the physical height eps^{1/(n-1)} height(t, w).
// Row k of the result corresponds to radii[k].
Eigen::MatrixXd neck_graph(const NeckProblem& prob, const Eigen::MatrixXd& w,
                           std::span<const double> radii);

// Symmetrized model extension whose lower end carries the physical vertical
// data h (modes >= 2, coefficients in the cross-section basis). Two signs
// sit between h and the raw extension data: the half-turn identification of
// the two boundary spheres contributes (-1)^j at the lower one, and the
// blended transverse direction points down there, so the extension is built
// from (-1)^{j+1} rescale(h)_j. The exponentially small data carried by the
// opposite end lands in the boundary-graph discrepancy, not here.
Eigen::MatrixXd lower_end_extension(const NeckProblem& prob,
                                    const Eigen::VectorXd& h_modes);

// Vertical-graph data of the perturbed neck near the lower boundary sphere,
// re-expressed on an annulus of physical radii in [r_eps/2, r_eps] as
// angular mode coefficients per ring (ascending, last ring = r_eps). u0 is
// the model part
//   -eps^{1/(n-1)} d0 + eps/(n-2) |x|^{2-n} + interior extension of h,
// so v_disc = u - u0 collects the catenoid far tail, the far-end data leak
// of the symmetrized extension, and the Picard correction.
struct NeckBoundaryGraph {
  Eigen::VectorXd radii;
  Eigen::MatrixXd u;       // rings x modes
  Eigen::MatrixXd u0;
  Eigen::MatrixXd v_disc;  // u - u0
};

// w is the full solved field (extension plus correction); h_modes the
// physical data the lower end carries, entering only through u0. The radial
// amplitude must cross each ring radius exactly once on the lower half
// column; a second crossing means the graph folds over and throws.
NeckBoundaryGraph boundary_graph(const NeckProblem& prob,
                                 const Eigen::MatrixXd& w,
                                 const Eigen::VectorXd& h_modes,
                                 int rings = 9);

}  // namespace rgluer
