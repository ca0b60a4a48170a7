#include "rgluer/planar.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>

#include "rgluer/numerics.hpp"

namespace rgluer {

// Sparse composite system: equation rows carry the discrete Laplacian,
// boundary and overset rows carry closures/ties. data_mask flags the rows
// whose right-hand side is the field f (1) versus fixed closure data (0).
struct PlanarOperator {
  Eigen::SparseMatrix<double> A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::VectorXd data_mask;
};

namespace {

constexpr double kHoleFactor = 0.52;  // background blanked below this * S_out

double plateau_spacing(double u, std::initializer_list<double> centers,
                       double fine, double coarse, double d0, double ramp) {
  double prod = 1.0;
  for (double c : centers)
    prod *= smoothstep_quintic((std::abs(u - c) - d0) / ramp);
  return fine + (coarse - fine) * prod;
}

// Nodes on [0, L] spaced by equipartition of integral du / h(u); first and
// last node exact.
std::vector<double> graded_axis(double L,
                                const std::function<double(double)>& h,
                                int samples) {
  std::vector<double> u(samples + 1), cum(samples + 1, 0.0);
  for (int k = 0; k <= samples; ++k) u[k] = L * k / samples;
  for (int k = 1; k <= samples; ++k) {
    const double du = u[k] - u[k - 1];
    cum[k] = cum[k - 1] + 0.5 * du * (1.0 / h(u[k]) + 1.0 / h(u[k - 1]));
  }
  const int count = std::max(8, static_cast<int>(std::ceil(cum[samples])));
  std::vector<double> nodes(count + 1);
  nodes[0] = 0.0;
  nodes[count] = L;
  int k = 1;
  for (int m = 1; m < count; ++m) {
    const double target = cum[samples] * m / count;
    while (cum[k] < target) ++k;
    const double w = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
    nodes[m] = u[k - 1] + w * (u[k] - u[k - 1]);
  }
  return nodes;
}

double dist_to(double x1, double rp, double cx) {
  return std::hypot(x1 - cx, rp);
}

// First index of a window of `width` consecutive entries of `xs` that
// brackets x as centrally as possible.
int bracket_window(const std::vector<double>& xs, double x, int width) {
  const int nx = static_cast<int>(xs.size());
  int hi = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) -
                            xs.begin());
  int lo = hi - width / 2 - ((width % 2) ? 0 : 0);
  lo = std::clamp(lo, 0, nx - width);
  return lo;
}

struct BuildContext {
  const PlanarGrid* g = nullptr;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd mask;

  void push(int row, int col, double v) { trip.emplace_back(row, col, v); }
};

}  // namespace

double PlanarGrid::angular(int j, double cos_angle) const {
  return gegenbauer(j, (n - 2) / 2.0, cos_angle) / basis_norms[j];
}

PlanarGrid make_planar_grid(int n, double eps, PlanarGridSpec spec) {
  if (n < 3) throw std::invalid_argument("make_planar_grid: requires n >= 3");
  if (eps <= 0) throw std::invalid_argument("make_planar_grid: eps <= 0");
  if (spec.r_out < 20.0 - 1e-12)
    throw std::invalid_argument("make_planar_grid: r_out < 20");
  if (spec.refine < 1 || spec.collar_rings < 8 || spec.collar_points < 8)
    throw std::invalid_argument("make_planar_grid: resolution too small");

  PlanarGrid g;
  g.n = n;
  const CatenoidProfile prof(n);
  g.scales = compute_scales(prof, eps);
  const double re = g.scales.r_eps;
  g.collar_outer = std::min(4.0 * re, 0.9);
  if (2.15 * re > g.collar_outer)
    throw std::invalid_argument("make_planar_grid: eps too large for collars");

  // Collar rings, geometric from the excised circle.
  const int R = spec.collar_rings * spec.refine;
  const int K = spec.collar_points;
  g.rings.resize(R + 1);
  const double lstep = std::log(g.collar_outer / re) / R;
  for (int k = 0; k <= R; ++k) g.rings[k] = re * std::exp(k * lstep);
  g.rings[0] = re;
  g.rings[R] = g.collar_outer;

  g.polar = make_theta_grid(n, K);
  g.basis_norms.resize(K);
  for (int j = 0; j < K; ++j) {
    double acc = 0.0;
    for (int q = 0; q < K; ++q) {
      const double c = gegenbauer(j, (n - 2) / 2.0, std::cos(g.polar.theta[q]));
      acc += g.polar.weight[q] * c * c;
    }
    g.basis_norms[j] = std::sqrt(acc);
  }

  // Background tensor mesh: spacing has a fine plateau covering each collar
  // and a smooth ramp to the coarse far field; the x half-axis is mirrored
  // so the node set is exactly symmetric.
  const double fine = 0.08 * g.collar_outer / spec.refine;
  const double coarse = 1.25 / spec.refine;
  const double d0 = 1.3 * g.collar_outer;
  const double ramp = 2.2;
  const int samples = 4000 + 4000 * spec.refine;
  const auto hx = [&](double u) {
    return plateau_spacing(u, {-1.0, 1.0}, fine, coarse, d0, ramp);
  };
  const auto hr = [&](double u) {
    return plateau_spacing(u, {0.0}, fine, coarse, d0, ramp);
  };
  const std::vector<double> half = graded_axis(spec.r_out, hx, samples);
  g.xs.resize(2 * half.size() - 1);
  const int nh = static_cast<int>(half.size());
  for (int k = 0; k < nh; ++k) {
    g.xs[nh - 1 - k] = -half[k];
    g.xs[nh - 1 + k] = half[k];
  }
  g.rs = graded_axis(spec.r_out, hr, samples);

  const int nx = static_cast<int>(g.xs.size());
  const int nr = static_cast<int>(g.rs.size());
  const double hole = kHoleFactor * g.collar_outer;
  const auto active = [&](int ix, int ir) {
    return std::min(dist_to(g.xs[ix], g.rs[ir], 1.0),
                    dist_to(g.xs[ix], g.rs[ir], -1.0)) >= hole;
  };

  g.bg_id.assign(static_cast<size_t>(nx) * nr, -1);
  for (int ix = 0; ix < nx; ++ix)
    for (int ir = 0; ir < nr; ++ir) {
      if (!active(ix, ir)) continue;
      const int id = static_cast<int>(g.nodes.size());
      g.bg_id[static_cast<size_t>(ix) * nr + ir] = id;
      PlanarNode nd;
      nd.x1 = g.xs[ix];
      nd.rp = g.rs[ir];
      nd.side = 0;
      nd.i = ix;
      nd.j = ir;
      const bool box = ix == 0 || ix == nx - 1 || ir == nr - 1;
      bool fringe = false;
      static constexpr int kStep[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (const auto& st : kStep) {
        const int jx = ix + st[0], jr = ir + st[1];
        if (jx < 0 || jx >= nx || jr < 0 || jr >= nr) continue;
        if (!active(jx, jr)) fringe = true;
      }
      if (box && fringe)
        throw std::runtime_error("make_planar_grid: hole reaches the box");
      nd.kind = box ? PlanarNodeKind::kOuterRobin
                    : (fringe ? PlanarNodeKind::kFringe
                              : PlanarNodeKind::kInterior);
      g.nodes.push_back(nd);
    }

  for (int side = 0; side < 2; ++side) {
    g.collar_base[side] = static_cast<int>(g.nodes.size());
    const double cx = side == 0 ? 1.0 : -1.0;
    for (int ring = 0; ring <= R; ++ring)
      for (int q = 0; q < K; ++q) {
        PlanarNode nd;
        const double phi = g.polar.theta[q];
        nd.x1 = cx + g.rings[ring] * std::cos(phi);
        nd.rp = g.rings[ring] * std::sin(phi);
        nd.side = side == 0 ? 1 : -1;
        nd.i = ring;
        nd.j = q;
        nd.kind = ring == 0 ? PlanarNodeKind::kCircle
                            : (ring == R ? PlanarNodeKind::kRim
                                         : PlanarNodeKind::kInterior);
        g.nodes.push_back(nd);
      }
  }

  g.mirror.resize(g.nodes.size());
  for (int id = 0; id < g.count(); ++id) {
    const PlanarNode& nd = g.nodes[id];
    if (nd.side == 0) {
      g.mirror[id] = g.bg_at(nx - 1 - nd.i, nd.j);
    } else {
      g.mirror[id] = g.collar_at(-nd.side, nd.i, K - 1 - nd.j);
    }
    if (g.mirror[id] < 0)
      throw std::runtime_error("make_planar_grid: asymmetric blanking");
  }

  // Assemble the composite system.
  BuildContext ctx;
  ctx.g = &g;
  ctx.mask = Eigen::VectorXd::Zero(g.count());
  ctx.trip.reserve(static_cast<size_t>(g.count()) * 32);

  // Spherical part of the Laplacian on collar rings: modes carry
  // -j (j + n - 2).
  Eigen::MatrixXd sphere_op = g.polar.basis;
  for (int j = 0; j < K; ++j) sphere_op.col(j) *= -mode_eigenvalue(n, j);
  sphere_op = sphere_op * g.polar.analysis;

  std::vector<double> lrings(R + 1);
  for (int k = 0; k <= R; ++k) lrings[k] = std::log(g.rings[k]);

  const auto fd3 = [](const double* nodes, double x0, int m) {
    return fd_weights(x0, std::span<const double>(nodes, 3), m);
  };

  for (int id = 0; id < g.count(); ++id) {
    const PlanarNode& nd = g.nodes[id];
    if (nd.side == 0) {
      const int ix = nd.i, ir = nd.j;
      switch (nd.kind) {
        case PlanarNodeKind::kInterior: {
          ctx.mask[id] = 1.0;
          const auto wxx = fd3(&g.xs[ix - 1], g.xs[ix], 2);
          for (int k = 0; k < 3; ++k)
            ctx.push(id, g.bg_at(ix - 1 + k, ir), wxx[k]);
          if (ir == 0) {
            // Axis: d/dr vanishes, (n-2)/r d/dr -> (n-2) d2/dr2; even
            // reflection collapses to 2 (w1 - w0) / r1^2.
            const double c = (n - 1) * 2.0 / (g.rs[1] * g.rs[1]);
            ctx.push(id, g.bg_at(ix, 1), c);
            ctx.push(id, g.bg_at(ix, 0), -c);
          } else {
            const auto wrr = fd3(&g.rs[ir - 1], g.rs[ir], 2);
            const auto wr = fd3(&g.rs[ir - 1], g.rs[ir], 1);
            for (int k = 0; k < 3; ++k)
              ctx.push(id, g.bg_at(ix, ir - 1 + k),
                       wrr[k] + (n - 2) / g.rs[ir] * wr[k]);
          }
          break;
        }
        case PlanarNodeKind::kOuterRobin: {
          // d_r w + (n-2)/r w = 0 along the outward coordinate direction:
          // exact for the |x|^{2-n} monopole tail.
          const double rho2 = nd.x1 * nd.x1 + nd.rp * nd.rp;
          const bool xface =
              (ix == 0 || ix == nx - 1) && std::abs(nd.x1) >= nd.rp;
          if (xface) {
            const int s = ix == 0 ? 0 : nx - 3;
            const auto w1 = fd3(&g.xs[s], g.xs[ix], 1);
            for (int k = 0; k < 3; ++k) {
              const int col = g.bg_at(s + k, ir);
              if (col < 0)
                throw std::runtime_error("make_planar_grid: boundary window");
              ctx.push(id, col, w1[k]);
            }
            ctx.push(id, id, (n - 2) * nd.x1 / rho2);
          } else {
            const int s = nr - 3;
            const auto w1 = fd3(&g.rs[s], g.rs[ir], 1);
            for (int k = 0; k < 3; ++k) {
              const int col = g.bg_at(ix, s + k);
              if (col < 0)
                throw std::runtime_error("make_planar_grid: boundary window");
              ctx.push(id, col, w1[k]);
            }
            ctx.push(id, id, (n - 2) * nd.rp / rho2);
          }
          break;
        }
        case PlanarNodeKind::kFringe: {
          // Tie to the nearest collar: Lagrange in log s across 4 rings,
          // spectral synthesis in the angle.
          const double dp = dist_to(nd.x1, nd.rp, 1.0);
          const double dm = dist_to(nd.x1, nd.rp, -1.0);
          const int side = dp <= dm ? 0 : 1;
          const double cx = side == 0 ? 1.0 : -1.0;
          const double s = std::min(dp, dm);
          const double cosphi = std::clamp((nd.x1 - cx) / s, -1.0, 1.0);
          int kw = bracket_window(lrings, std::log(s), 4);
          kw = std::min(kw, R - 4);  // keep the rim row out of the window
          const auto lr = fd_weights(
              std::log(s), std::span<const double>(&lrings[kw], 4), 0);
          Eigen::VectorXd pv(K);
          for (int j = 0; j < K; ++j) pv[j] = g.angular(j, cosphi);
          const Eigen::VectorXd ang = g.polar.analysis.transpose() * pv;
          ctx.push(id, id, 1.0);
          for (int k = 0; k < 4; ++k)
            for (int q = 0; q < K; ++q)
              ctx.push(id, g.collar_at(side == 0 ? 1 : -1, kw + k, q),
                       -lr[k] * ang[q]);
          break;
        }
        default:
          throw std::runtime_error("make_planar_grid: background kind");
      }
    } else {
      const int ring = nd.i, q = nd.j;
      const int base = g.collar_base[nd.side > 0 ? 0 : 1];
      switch (nd.kind) {
        case PlanarNodeKind::kCircle:
          ctx.push(id, id, 1.0);
          break;
        case PlanarNodeKind::kInterior: {
          ctx.mask[id] = 1.0;
          const double s = g.rings[ring];
          const auto wss = fd3(&g.rings[ring - 1], s, 2);
          const auto ws = fd3(&g.rings[ring - 1], s, 1);
          for (int k = 0; k < 3; ++k)
            ctx.push(id, base + (ring - 1 + k) * K + q,
                     wss[k] + (n - 1) / s * ws[k]);
          for (int qq = 0; qq < K; ++qq)
            ctx.push(id, base + ring * K + qq, sphere_op(q, qq) / (s * s));
          break;
        }
        case PlanarNodeKind::kRim: {
          // Tie to the background: 4x4 tensor Lagrange.
          const int i0 = bracket_window(g.xs, nd.x1, 4);
          const int j0 = bracket_window(g.rs, nd.rp, 4);
          const auto wx =
              fd_weights(nd.x1, std::span<const double>(&g.xs[i0], 4), 0);
          const auto wr =
              fd_weights(nd.rp, std::span<const double>(&g.rs[j0], 4), 0);
          ctx.push(id, id, 1.0);
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
              const int col = g.bg_at(i0 + a, j0 + b);
              if (col < 0 || g.nodes[col].kind == PlanarNodeKind::kFringe)
                throw std::runtime_error(
                    "make_planar_grid: rim donor window unsafe");
              ctx.push(id, col, -wx[a] * wr[b]);
            }
          break;
        }
        default:
          throw std::runtime_error("make_planar_grid: collar kind");
      }
    }
  }

  auto op = std::make_shared<PlanarOperator>();
  op->A.resize(g.count(), g.count());
  op->A.setFromTriplets(ctx.trip.begin(), ctx.trip.end());
  op->A.makeCompressed();
  op->lu.analyzePattern(op->A);
  op->lu.factorize(op->A);
  if (op->lu.info() != Eigen::Success)
    throw std::runtime_error("make_planar_grid: factorization failed");
  op->data_mask = ctx.mask;
  g.op = op;
  return g;
}

double planar_norm(const PlanarGrid& grid, const PlanarField& w) {
  double out = 0.0;
  for (int id = 0; id < grid.count(); ++id) {
    const PlanarNode& nd = grid.nodes[id];
    const double d = std::min(dist_to(nd.x1, nd.rp, 1.0),
                              dist_to(nd.x1, nd.rp, -1.0));
    const double rho = std::hypot(nd.x1, nd.rp);
    const double wt = std::pow(std::min(d, 0.5) / 0.5, -w.nu) *
                      std::pow(std::max(rho, 4.0) / 4.0, -w.mu);
    out = std::max(out, std::abs(w.values[id]) * wt);
  }
  return out;
}

double oddness_defect(const PlanarGrid& grid, const PlanarField& w) {
  double out = 0.0;
  for (int id = 0; id < grid.count(); ++id)
    out = std::max(out,
                   std::abs(w.values[id] + w.values[grid.mirror[id]]));
  return out;
}

double model_value(int n, const ScaleParameters& scales, EndParameters end,
                   double x1, double rp) {
  const double dp = dist_to(x1, rp, 1.0), dm = dist_to(x1, rp, -1.0);
  return (end.rho - std::pow(2.0, 1 - n) * scales.eps) * x1 +
         scales.eps / (n - 2) *
             (std::pow(dp, 2 - n) - std::pow(dm, 2 - n));
}

PlanarField model_function(const PlanarGrid& grid, EndParameters end) {
  PlanarField f;
  f.values.resize(grid.count());
  for (int id = 0; id < grid.count(); ++id)
    f.values[id] = model_value(grid.n, grid.scales, end, grid.nodes[id].x1,
                               grid.nodes[id].rp);
  return f;
}

double HarmonicExtension::radial(int j, double r) const {
  return exterior ? std::pow(r, 2 - n - j) : std::pow(r, j);
}

double HarmonicExtension::value(const PlanarGrid& grid, double r,
                                double cos_angle) const {
  double out = 0.0;
  for (int j = 0; j < modes.size(); ++j) {
    if (modes[j] == 0.0) continue;
    out += modes[j] * radial(j, r) * grid.angular(j, cos_angle);
  }
  return out;
}

HarmonicExtension harmonic_extension(const PlanarGrid& grid,
                                     const Eigen::VectorXd& modes,
                                     bool exterior) {
  if (modes.size() > grid.polar.points())
    throw std::invalid_argument("harmonic_extension: too many modes");
  HarmonicExtension ext;
  ext.n = grid.n;
  ext.exterior = exterior;
  ext.modes = modes;
  if (exterior) {
    ext.a_h = modes.size() > 0 ? modes[0] / grid.basis_norms[0] : 0.0;
    ext.remainder_rate = 1 - grid.n;
    const double scale = modes.cwiseAbs().maxCoeff();
    for (int j = 1; j < modes.size(); ++j)
      if (std::abs(modes[j]) > 1e-14 * scale) {
        ext.remainder_rate = 2 - grid.n - j;
        break;
      }
  }
  return ext;
}

double hat_value(const PlanarGrid& grid, const Eigen::VectorXd& h_modes,
                 double x1, double rp) {
  const double re = grid.scales.r_eps;
  const double dp = dist_to(x1, rp, 1.0), dm = dist_to(x1, rp, -1.0);
  if (dp < re * (1 - 1e-9) || dm < re * (1 - 1e-9))
    throw std::invalid_argument("hat_value: inside an excised ball");
  const HarmonicExtension ext = harmonic_extension(grid, h_modes, true);
  return ext.value(grid, dp / re, std::clamp((x1 - 1.0) / dp, -1.0, 1.0)) -
         ext.value(grid, dm / re, std::clamp(-(x1 + 1.0) / dm, -1.0, 1.0));
}

PlanarField hat_extension(const PlanarGrid& grid,
                          const Eigen::VectorXd& h_modes) {
  const double re = grid.scales.r_eps;
  const HarmonicExtension ext = harmonic_extension(grid, h_modes, true);
  PlanarField f;
  f.mu = 2 - grid.n;
  f.nu = 2 - grid.n;
  f.values.resize(grid.count());
  for (int id = 0; id < grid.count(); ++id) {
    const PlanarNode& nd = grid.nodes[id];
    const double dp = dist_to(nd.x1, nd.rp, 1.0);
    const double dm = dist_to(nd.x1, nd.rp, -1.0);
    f.values[id] =
        ext.value(grid, dp / re, std::clamp((nd.x1 - 1.0) / dp, -1.0, 1.0)) -
        ext.value(grid, dm / re,
                  std::clamp(-(nd.x1 + 1.0) / dm, -1.0, 1.0));
  }
  return f;
}

PlanarField laplace_right_inverse(const PlanarGrid& grid, const PlanarField& f,
                                  double mu, double nu) {
  if (!(mu > 2 - grid.n && mu < 0 && nu > 2 - grid.n && nu < 0))
    throw std::invalid_argument(
        "laplace_right_inverse: weights outside (2-n, 0)");
  if (f.values.size() != grid.count())
    throw std::invalid_argument("laplace_right_inverse: field size");
  const Eigen::VectorXd b =
      grid.op->data_mask.cwiseProduct(f.values);
  PlanarField out;
  out.mu = mu;
  out.nu = nu;
  out.values = grid.op->lu.solve(b);
  return out;
}

Eigen::VectorXd apply_laplacian(const PlanarGrid& grid,
                                const Eigen::VectorXd& values) {
  if (values.size() != grid.count())
    throw std::invalid_argument("apply_laplacian: field size");
  return grid.op->data_mask.cwiseProduct(grid.op->A * values);
}

namespace {

// 4 consecutive background indices along x (dir = 0) or r' (dir = 1), all
// holding values, containing the node; as centered as possible. 4 points keep
// the first-derivative passes at O(h^3) so that composing two of them for the
// Hessian stays O(h^2) even across window-offset transitions near the blanked
// cores, where 3-point passes would drop to O(h).
int value_window(const PlanarGrid& g, int ix, int ir, int dir) {
  const int len = dir == 0 ? static_cast<int>(g.xs.size())
                           : static_cast<int>(g.rs.size());
  const int pos = dir == 0 ? ix : ir;
  const auto ok = [&](int s) {
    if (s < 0 || s + 3 >= len) return false;
    for (int k = 0; k < 4; ++k) {
      const int id = dir == 0 ? g.bg_at(s + k, ir) : g.bg_at(ix, s + k);
      if (id < 0) return false;
    }
    return true;
  };
  // The preference order along x flips with sign(x1) so the stencil choice
  // commutes with the x -> -x mirror; otherwise odd fields pick up O(h^3)
  // parity defects through the Hessian.
  const bool flip = dir == 0 && g.xs[ix] > 0;
  const int pref[2][4] = {{pos - 1, pos - 2, pos, pos - 3},
                          {pos - 2, pos - 1, pos - 3, pos}};
  for (const int s : pref[flip ? 1 : 0]) {
    if (ok(s)) return s;
  }
  throw std::runtime_error("value_window: no admissible stencil");
}

// First derivative of background values along dir at every active
// background node; collar entries untouched.
void bg_derivative(const PlanarGrid& g, const Eigen::VectorXd& v, int dir,
                   Eigen::VectorXd& out) {
  for (int id = 0; id < g.count(); ++id) {
    const PlanarNode& nd = g.nodes[id];
    if (nd.side != 0) continue;
    const int s = value_window(g, nd.i, nd.j, dir);
    const double* axis = dir == 0 ? &g.xs[s] : &g.rs[s];
    const double x0 = dir == 0 ? nd.x1 : nd.rp;
    const auto w = fd_weights(x0, std::span<const double>(axis, 4), 1);
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int col =
          dir == 0 ? g.bg_at(s + k, nd.j) : g.bg_at(nd.i, s + k);
      acc += w[k] * v[col];
    }
    out[id] = acc;
  }
}

// Radial first derivative across collar rings (rows of V); 4-point windows
// for the same composition-order reason as the background.
Eigen::MatrixXd ring_derivative(const PlanarGrid& g, const Eigen::MatrixXd& V) {
  const int R = static_cast<int>(g.rings.size()) - 1;
  Eigen::MatrixXd out(V.rows(), V.cols());
  for (int i = 0; i <= R; ++i) {
    const int s = std::clamp(i - 1, 0, R - 3);
    const auto w =
        fd_weights(g.rings[i], std::span<const double>(&g.rings[s], 4), 1);
    out.row(i) = w[0] * V.row(s) + w[1] * V.row(s + 1) +
                 w[2] * V.row(s + 2) + w[3] * V.row(s + 3);
  }
  return out;
}

}  // namespace

PlanarField xi_nonlinearity(const PlanarGrid& grid, const PlanarField& w) {
  if (w.values.size() != grid.count())
    throw std::invalid_argument("xi_nonlinearity: field size");
  const int K = grid.polar.points();
  const int R = static_cast<int>(grid.rings.size()) - 1;

  PlanarField out;
  out.mu = w.mu - 2;
  out.nu = w.nu - 2;
  out.values.setZero(grid.count());

  // Background: gradient, then Hessian as derivatives of the gradient.
  Eigen::VectorXd gx = Eigen::VectorXd::Zero(grid.count());
  Eigen::VectorXd gr = gx, hxx = gx, hrr = gx, hxr_a = gx, hxr_b = gx;
  bg_derivative(grid, w.values, 0, gx);
  bg_derivative(grid, w.values, 1, gr);
  bg_derivative(grid, gx, 0, hxx);
  bg_derivative(grid, gr, 1, hrr);
  bg_derivative(grid, gr, 0, hxr_a);
  bg_derivative(grid, gx, 1, hxr_b);
  for (int id = 0; id < grid.count(); ++id) {
    if (grid.nodes[id].side != 0) continue;
    const double a = gx[id], b = gr[id];
    const double mixed = 0.5 * (hxr_a[id] + hxr_b[id]);
    out.values[id] = (hxx[id] * a * a + 2.0 * mixed * a * b +
                      hrr[id] * b * b) /
                     (1.0 + a * a + b * b);
  }

  // Collars: polar derivatives, converted to the ambient (x1, r') frame.
  for (int side = 0; side < 2; ++side) {
    const int base = grid.collar_base[side];
    Eigen::MatrixXd V(R + 1, K);
    for (int i = 0; i <= R; ++i)
      for (int q = 0; q < K; ++q) V(i, q) = w.values[base + i * K + q];
    // First derivatives of a smooth axisymmetric field are polynomial in
    // cos(phi) times at most one sin(phi) factor; a second application of the
    // spectral d1 to such a product aliases. d2 and the mixed Ds(d1 .) stay
    // exact, so the Hessian avoids composing d1 with itself.
    const Eigen::MatrixXd gs = ring_derivative(grid, V);
    const Eigen::MatrixXd gphi = V * grid.polar.d1.transpose();
    const Eigen::MatrixXd hss = ring_derivative(grid, gs);
    const Eigen::MatrixXd hsp =
        0.5 * (ring_derivative(grid, gphi) + gs * grid.polar.d1.transpose());
    const Eigen::MatrixXd hpp = V * grid.polar.d2.transpose();
    for (int i = 0; i <= R; ++i) {
      const double s = grid.rings[i];
      for (int q = 0; q < K; ++q) {
        const double c = std::cos(grid.polar.theta[q]);
        const double sn = std::sin(grid.polar.theta[q]);
        const double ws = gs(i, q), wp = gphi(i, q);
        const double a = c * ws - sn / s * wp;       // d/dx1
        const double b = sn * ws + c / s * wp;       // d/dr'
        const double wxx = c * c * hss(i, q) - 2 * c * sn / s * hsp(i, q) +
                           sn * sn / (s * s) * hpp(i, q) +
                           sn * sn / s * ws + 2 * c * sn / (s * s) * wp;
        const double wrr = sn * sn * hss(i, q) + 2 * c * sn / s * hsp(i, q) +
                           c * c / (s * s) * hpp(i, q) + c * c / s * ws -
                           2 * c * sn / (s * s) * wp;
        const double wxr = c * sn * hss(i, q) +
                           (c * c - sn * sn) / s * hsp(i, q) -
                           c * sn / (s * s) * hpp(i, q) - c * sn / s * ws -
                           (c * c - sn * sn) / (s * s) * wp;
        out.values[base + i * K + q] =
            (wxx * a * a + 2.0 * wxr * a * b + wrr * b * b) /
            (1.0 + a * a + b * b);
      }
    }
  }
  return out;
}

PlanarField extend_ring_trace(const PlanarGrid& grid, const PlanarField& f) {
  if (f.values.size() != grid.count())
    throw std::invalid_argument("extend_ring_trace: field size");
  const double re = grid.scales.r_eps;
  const int K = grid.polar.points();
  Eigen::MatrixXd trace(2, K);  // ring-0 mode coefficients per side
  for (int side = 0; side < 2; ++side) {
    Eigen::VectorXd ring0(K);
    for (int q = 0; q < K; ++q)
      ring0[q] = f.values[grid.collar_base[side] + q];
    trace.row(side) = (grid.polar.analysis * ring0).transpose();
  }
  PlanarField out = f;
  for (int id = 0; id < grid.count(); ++id) {
    const PlanarNode& nd = grid.nodes[id];
    const double dp = dist_to(nd.x1, nd.rp, 1.0);
    const double dm = dist_to(nd.x1, nd.rp, -1.0);
    const int side = dp <= dm ? 0 : 1;
    const double s = std::min(dp, dm);
    if (s >= 2.0 * re * (1 - 1e-12)) continue;
    const double cx = side == 0 ? 1.0 : -1.0;
    const double cosphi = std::clamp((nd.x1 - cx) / s, -1.0, 1.0);
    const double chi = smoothstep_quintic(s / re - 1.0);
    double tr = 0.0;
    for (int j = 0; j < K; ++j)
      tr += trace(side, j) * grid.angular(j, cosphi);
    out.values[id] = chi * tr;
  }
  return out;
}

PlanarSolution solve_planar(const PlanarGrid& grid, EndParameters end,
                            const Eigen::VectorXd& h_modes, double tol,
                            int max_iter, double kappa_max) {
  const double re = grid.scales.r_eps;
  const double eps = grid.scales.eps;
  double h_sup = 0.0;
  for (int q = 0; q < grid.polar.points(); ++q) {
    double v = 0.0;
    for (int j = 0; j < h_modes.size(); ++j)
      v += h_modes[j] * grid.angular(j, std::cos(grid.polar.theta[q]));
    h_sup = std::max(h_sup, std::abs(v));
  }
  if (re * std::abs(end.rho) + h_sup > kappa_max * eps * re * re)
    throw std::invalid_argument("solve_planar: parameters outside the ball");

  const double wexp = (2.0 - grid.n) / 2.0;
  PlanarField base = model_function(grid, end);
  if (h_modes.size() > 0) {
    const PlanarField hat = hat_extension(grid, h_modes);
    base.values += hat.values;
  }

  PlanarSolution sol;
  sol.v.mu = wexp;
  sol.v.nu = wexp;
  sol.v.values.setZero(grid.count());
  PlanarField work;
  work.mu = wexp;
  work.nu = wexp;
  for (int it = 0; it < max_iter; ++it) {
    work.values = base.values + sol.v.values;
    const PlanarField rhs = extend_ring_trace(grid, xi_nonlinearity(grid, work));
    PlanarField next = laplace_right_inverse(grid, rhs, wexp, wexp);
    PlanarField diff = next;
    diff.values -= sol.v.values;
    const double step = planar_norm(grid, diff);
    sol.trace.step_norms.push_back(step);
    sol.v.values = next.values;
    if (step <= tol * std::max(1.0, planar_norm(grid, sol.v))) {
      sol.trace.converged = true;
      break;
    }
  }
  sol.u_bar.mu = 0;
  sol.u_bar.nu = 0;
  sol.u_bar.values = base.values + sol.v.values;
  return sol;
}

double expansion_value(const PlanarGrid& grid, EndParameters end,
                       const Eigen::VectorXd& h_modes, double s,
                       double cos_angle) {
  const int n = grid.n;
  const double eps = grid.scales.eps;
  double out = end.rho - n / (n - 2.0) * std::pow(2.0, 1 - n) * eps +
               eps / (n - 2) * std::pow(s, 2 - n) + end.rho * s * cos_angle;
  if (h_modes.size() > 0) {
    const HarmonicExtension ext = harmonic_extension(grid, h_modes, true);
    out += ext.value(grid, s / grid.scales.r_eps, cos_angle);
  }
  return out;
}

AnnularProfile planar_discrepancy(const PlanarGrid& grid,
                                  const PlanarSolution& sol, EndParameters end,
                                  const Eigen::VectorXd& h_modes) {
  const double re = grid.scales.r_eps;
  const int K = grid.polar.points();
  int count = 0;
  while (count < static_cast<int>(grid.rings.size()) &&
         grid.rings[count] <= 2.0 * re * (1 + 1e-9))
    ++count;
  AnnularProfile prof;
  prof.radii.resize(count);
  prof.modes.resize(count, K);
  Eigen::VectorXd ring(K);
  for (int i = 0; i < count; ++i) {
    prof.radii[i] = grid.rings[i];
    for (int q = 0; q < K; ++q) {
      const double c = std::cos(grid.polar.theta[q]);
      ring[q] = sol.u_bar.values[grid.collar_base[0] + i * K + q] -
                expansion_value(grid, end, h_modes, grid.rings[i], c);
    }
    prof.modes.row(i) = (grid.polar.analysis * ring).transpose();
  }
  return prof;
}

}  // namespace rgluer
