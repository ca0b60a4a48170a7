#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "rgluer/geometry.hpp"
#include "rgluer/spherical.hpp"

namespace rgluer {

// Discretization of the two-puncture exterior domain in axisymmetric
// coordinates (x1, r'), r' = |x_perp|, for the planar-end problem: minimal
// vertical graphs over the hyperplane, punctured at +-x* = (+-1, 0, ..., 0,)
// with balls of radius r_eps excised. Composite grid:
//   - a polar collar around each puncture, conforming to the excised circle:
//     geometric radial rings from r_eps to collar_outer, cross-section Gauss
//     nodes in the polar angle (same invariant basis as the neck module);
//   - a graded tensor background mesh on [-r_out, r_out] x [0, r_out] with
//     the collar cores blanked out;
//   - overset coupling: the collar rim interpolates the background (4x4
//     tensor Lagrange), background fringe nodes interpolate the collars
//     (4-ring Lagrange in log s times spectral synthesis in angle).
// The box circumscribes the ball |x| = r_out; the far-field closure is the
// mode-0 Robin condition d_r w + (n-2)/r w = 0 (exact for the |x|^{2-n}
// monopole tail) written along the outward coordinate direction. The excised
// circles close with homogeneous Dirichlet; the right-inverse ambiguity this
// choice represents is absorbed by the outer matching loop.
struct PlanarGridSpec {
  int collar_rings = 32;   // radial cells per collar (scaled by refine)
  int collar_points = 24;  // angular nodes per ring (2 * J_max)
  double r_out = 20.0;     // outer truncation radius, >= 20
  int refine = 1;          // halves background spacings, doubles ring count
};

enum class PlanarNodeKind : unsigned char {
  kInterior,    // equation row: discrete Laplacian = data
  kOuterRobin,  // background box boundary, far-field closure row
  kCircle,      // collar ring 0 on the excised circle, Dirichlet row
  kFringe,      // background node tied to collar interpolation
  kRim,         // collar outer ring tied to background interpolation
};

struct PlanarNode {
  double x1 = 0;
  double rp = 0;
  PlanarNodeKind kind = PlanarNodeKind::kInterior;
  int side = 0;  // +1 / -1 collar membership, 0 background
  int i = 0;     // background x index, or collar ring
  int j = 0;     // background r' index, or collar angle index
};

struct PlanarOperator;  // assembled sparse system + factorization (internal)

struct PlanarGrid {
  int n = 0;
  ScaleParameters scales;
  double collar_outer = 0;          // outer collar radius
  std::vector<double> xs, rs;       // background tensor coordinates
  std::vector<double> rings;        // collar radii, rings[0] = r_eps
  ThetaGrid polar;                  // collar angular nodes / basis
  Eigen::VectorXd basis_norms;      // Gegenbauer normalizers of polar.basis
  std::vector<PlanarNode> nodes;    // all unknowns, background first
  std::vector<int> bg_id;           // xs.size() * rs.size() -> node or -1
  int collar_base[2] = {-1, -1};    // node offset of the +x* / -x* collar
  std::vector<int> mirror;          // node at (-x1, rp)
  std::shared_ptr<const PlanarOperator> op;

  int count() const { return static_cast<int>(nodes.size()); }
  int bg_at(int ix, int ir) const {
    return bg_id[static_cast<size_t>(ix) * rs.size() + ir];
  }
  int collar_at(int side, int ring, int q) const {
    return collar_base[side > 0 ? 0 : 1] +
           ring * polar.points() + q;
  }
  // Normalized angular basis value P_j(cos(angle)), consistent with
  // polar.basis at the nodes.
  double angular(int j, double cos_angle) const;
};

PlanarGrid make_planar_grid(int n, double eps, PlanarGridSpec spec = {});

// Node values plus the weight exponents the field is measured in; mu tracks
// the far field, nu the puncture collars, both in (2-n, 0).
struct PlanarField {
  Eigen::VectorXd values;
  double mu = 0;
  double nu = 0;
};

// Asymptotic tilt slope of a planar end.
struct EndParameters {
  double rho = 0;
};

// Weighted sup norm: |w| (min(d, 1/2)/(1/2))^{-nu} (max(|x|, 4)/4)^{-mu},
// d = distance to the nearest puncture.
double planar_norm(const PlanarGrid& grid, const PlanarField& w);

// sup |w(x) + w(-x)| over the grid's mirror pairing.
double oddness_defect(const PlanarGrid& grid, const PlanarField& w);

// Model end: (rho - 2^{1-n} eps) x1 + eps/(n-2) (|x-x*|^{2-n} - |x+x*|^{2-n}).
double model_value(int n, const ScaleParameters& scales, EndParameters end,
                   double x1, double rp);
PlanarField model_function(const PlanarGrid& grid, EndParameters end);

// Mode-wise harmonic extension of boundary data on the unit sphere: interior
// sum_j m_j r^j P_j, exterior sum_j m_j r^{2-n-j} P_j. For the exterior side,
// a_h is the coefficient of the raw |x|^{2-n} long-range term and
// remainder_rate the decay exponent of what is left after removing it.
struct HarmonicExtension {
  int n = 0;
  bool exterior = false;
  Eigen::VectorXd modes;
  double a_h = 0;
  double remainder_rate = 0;

  double radial(int j, double r) const;  // r^j or r^{2-n-j}
  double value(const PlanarGrid& grid, double r, double cos_angle) const;
};
HarmonicExtension harmonic_extension(const PlanarGrid& grid,
                                     const Eigen::VectorXd& modes,
                                     bool exterior);

// hat w = w_ext((x - x*)/r_eps) - w_ext(-(x + x*)/r_eps), the rescaled
// exterior extensions about the two punctures, differenced so the pair is
// odd. Point evaluation throws inside either excised ball.
double hat_value(const PlanarGrid& grid, const Eigen::VectorXd& h_modes,
                 double x1, double rp);
PlanarField hat_extension(const PlanarGrid& grid,
                          const Eigen::VectorXd& h_modes);

// Right inverse of the axisymmetric Laplacian
//   d^2/dx1^2 + d^2/dr'^2 + (n-2)/r' d/dr'
// with the grid's boundary closures (Dirichlet 0 on the circles, Robin far
// field). Requires mu, nu in (2-n, 0). One back-substitution on the cached
// factorization.
PlanarField laplace_right_inverse(const PlanarGrid& grid, const PlanarField& f,
                                  double mu, double nu);

// Discrete Laplacian rows: A w with the non-equation rows (Dirichlet,
// Robin, interpolation ties) zeroed.
Eigen::VectorXd apply_laplacian(const PlanarGrid& grid,
                                const Eigen::VectorXd& values);

// Graph nonlinearity Xi(w) = Hess w (grad w, grad w) / (1 + |grad w|^2) with
// the true ambient Hessian restricted to axisymmetric fields (no (n-2)/r'
// curvature term; that belongs to the Laplacian only).
PlanarField xi_nonlinearity(const PlanarGrid& grid, const PlanarField& w);

// Extension over the punctures: identity where the distance to both
// punctures is >= 2 r_eps, the quintic-damped ring trace
// chi(s/r_eps) f(circle point, same angle) on the annuli in between. The
// inside-ball region is off-grid, so the zero extension there never reaches
// the solve.
PlanarField extend_ring_trace(const PlanarGrid& grid, const PlanarField& f);

struct PlanarTrace {
  std::vector<double> step_norms;  // weighted Picard increments
  bool converged = false;
};

// Fixed point v = Gamma(E(Xi(w_model + hat w + v))) from v = 0; returns
// u_bar = w_model + hat w + v. Parameters must satisfy the admissibility
// ball r_eps |rho| + sup|h_bar| <= kappa eps r_eps^2.
struct PlanarSolution {
  PlanarField u_bar;
  PlanarField v;
  PlanarTrace trace;
};
PlanarSolution solve_planar(const PlanarGrid& grid, EndParameters end,
                            const Eigen::VectorXd& h_modes, double tol = 1e-12,
                            int max_iter = 25, double kappa_max = 50.0);

// Local expansion about +x*: u0(y) = rho - n/(n-2) 2^{1-n} eps
// + eps/(n-2) |y|^{2-n} + rho y^1 + w_ext(y/r_eps), y = x - x*.
double expansion_value(const PlanarGrid& grid, EndParameters end,
                       const Eigen::VectorXd& h_modes, double s,
                       double cos_angle);

// Discrepancy u_bar - u0 on the collar rings with radius <= 2 r_eps about
// +x*, one row of angular mode coefficients per ring.
struct AnnularProfile {
  Eigen::VectorXd radii;
  Eigen::MatrixXd modes;  // radii.size() x collar_points
};
AnnularProfile planar_discrepancy(const PlanarGrid& grid,
                                  const PlanarSolution& sol, EndParameters end,
                                  const Eigen::VectorXd& h_modes);

}  // namespace rgluer
