#include "rgluer/neck.hpp"

#include <cmath>
#include <stdexcept>

#include "rgluer/curvature.hpp"
#include "rgluer/numerics.hpp"

namespace rgluer {
namespace {

// Cubic Lagrange interpolation along a column of grid values.
double interp_column(std::span<const double> x, const double* y, double t) {
  const int nt = static_cast<int>(x.size());
  const double h = x[1] - x[0];
  int i = static_cast<int>(std::floor((t - x[0]) / h)) - 1;
  i = std::max(0, std::min(nt - 4, i));
  const std::vector<double> w = fd_weights(t, x.subspan(i, 4), 0);
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += w[k] * y[i + k];
  return s;
}

}  // namespace

NeckProblem make_neck_problem(int n, double eps, int nt, int ntheta) {
  if (nt % 2 == 0) throw std::invalid_argument("neck grid needs odd rows");
  CatenoidProfile prof(n);
  const ScaleParameters scales = compute_scales(prof, eps);
  const CutoffSpec chi = make_cutoff(prof, scales);
  CylinderGrid grid =
      make_cylinder_grid(n, -scales.t_eps, scales.t_eps, nt, ntheta);
  const double h = grid.spacing();
  const int m_ext = static_cast<int>(std::ceil(1.0 / h)) + 2;
  CylinderGrid ext =
      make_cylinder_grid(n, -scales.t_eps - m_ext * h,
                         scales.t_eps + m_ext * h, nt + 2 * m_ext, ntheta);

  Eigen::MatrixXd a0(nt, ntheta), c0(nt, ntheta);
  for (int i = 0; i < nt; ++i) {
    a0.row(i).setConstant(prof.phi(grid.t[i]));
    c0.row(i).setConstant(prof.psi(grid.t[i]));
  }
  Eigen::MatrixXd base = mean_curvature_invariant(grid.t, grid.theta, a0, c0);

  GreenSolver green(prof, ext);
  return NeckProblem{std::move(prof), scales,          chi,
                     std::move(grid), std::move(ext),  std::move(green),
                     std::move(base), 0.5 * (n + 1.0)};
}

Eigen::VectorXd rescale_boundary_modes(const NeckProblem& prob,
                                       const Eigen::VectorXd& h_modes) {
  const int n = prob.prof.dimension();
  const double factor =
      std::exp(-std::log(prob.scales.eps) / (n - 1.0) +
               0.5 * (n - 2.0) * prob.prof.log_phi(prob.scales.t_eps));
  return factor * h_modes;
}

Eigen::MatrixXd curvature_defect(const NeckProblem& prob,
                                 const Eigen::MatrixXd& w) {
  const int nt = prob.grid.rows();
  const int K = prob.grid.theta.points();
  if (w.rows() != nt || w.cols() != K)
    throw std::invalid_argument("field does not match neck grid");
  const int n = prob.prof.dimension();
  Eigen::MatrixXd a(nt, K), c(nt, K);
  for (int i = 0; i < nt; ++i) {
    const double t = prob.grid.t[i];
    for (int q = 0; q < K; ++q) {
      const ImmersionAmplitudes amps =
          immerse_amplitudes(prob.prof, prob.chi, t, w(i, q));
      a(i, q) = amps.radial;
      c(i, q) = amps.height;
    }
  }
  Eigen::MatrixXd H = mean_curvature_invariant(prob.grid.t, prob.grid.theta,
                                               a, c);
  H -= prob.base_curvature;
  for (int i = 0; i < nt; ++i)
    H.row(i) *= prob.prof.phi_pow(prob.grid.t[i], 0.5 * (n + 2.0));
  return H;
}

PicardTrace solve_neck(const NeckProblem& prob, const Eigen::MatrixXd& w_tilde,
                       Eigen::MatrixXd& v, double tol, int max_iter) {
  const int nt = prob.grid.rows();
  const int off = (prob.ext.rows() - nt) / 2;
  PicardTrace trace;
  // The operator value fed back into the right-hand side is evaluated on the
  // neck grid, so its end rows are one-sided exactly like the rows the
  // defect evaluator produces there; the solver inverts the identical
  // centred stencil on the interior rows, so a fixed point drives the
  // interior defect to roundoff while the end rows keep an O(h^2)
  // consistency error (the boundary rows state data, not an equation).
  v = Eigen::MatrixXd::Zero(nt, prob.grid.theta.points());
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd M = curvature_defect(prob, w_tilde + v);
    const Eigen::MatrixXd F = apply_L(prob.prof, prob.grid, v) - M;
    const Eigen::MatrixXd g = prob.green.apply(extend_rhs(prob.grid, prob.ext, F));
    const Eigen::MatrixXd v_next = g.middleRows(off, nt);
    const double step = weighted_norm(prob.grid, v_next - v, prob.delta_norm);
    trace.step_norms.push_back(step);
    v = v_next;
    if (!std::isfinite(step) ||
        (it > 2 && step > 10.0 * trace.step_norms.front()))
      break;  // diverging
    if (step < tol) {
      trace.converged = true;
      break;
    }
  }
  const Eigen::MatrixXd M = curvature_defect(prob, w_tilde + v);
  trace.residual = M.middleRows(1, nt - 2).cwiseAbs().maxCoeff();
  trace.edge_defect =
      std::max(M.row(0).cwiseAbs().maxCoeff(), M.row(nt - 1).cwiseAbs().maxCoeff());
  return trace;
}

Eigen::MatrixXd neck_graph(const NeckProblem& prob, const Eigen::MatrixXd& w,
                           std::span<const double> radii) {
  const int K = prob.grid.theta.points();
  const int n = prob.prof.dimension();
  const double unit = std::exp(std::log(prob.scales.eps) / (n - 1.0));
  Eigen::MatrixXd out(radii.size(), K);
  for (int q = 0; q < K; ++q) {
    const double* col = w.col(q).data();
    auto value_at = [&](double t) {
      return interp_column(prob.grid.t, col, t);
    };
    for (size_t k = 0; k < radii.size(); ++k) {
      const double r = radii[k];
      if (r > prob.scales.r_eps * (1.0 + 1e-12) || r <= 0.0)
        throw std::invalid_argument("radius outside the neck graph range");
      auto f = [&](double t) {
        return unit * immerse_amplitudes(prob.prof, prob.chi, t, value_at(t))
                          .radial -
               r;
      };
      const double t_star =
          r == prob.scales.r_eps && f(prob.scales.t_eps) == 0.0
              ? prob.scales.t_eps
              : bisect(f, 0.0, prob.scales.t_eps, 1e-14);
      out(k, q) =
          unit *
          immerse_amplitudes(prob.prof, prob.chi, t_star, value_at(t_star))
              .height;
    }
  }
  return out;
}

Eigen::MatrixXd lower_end_extension(const NeckProblem& prob,
                                    const Eigen::VectorXd& h_modes) {
  const int K = prob.grid.theta.points();
  if (h_modes.size() > K)
    throw std::invalid_argument("more boundary modes than angular nodes");
  Eigen::VectorXd data = Eigen::VectorXd::Zero(K);
  data.head(h_modes.size()) = rescale_boundary_modes(prob, h_modes);
  for (int j = 0; j < K; j += 2) data[j] = -data[j];
  return shifted_poisson_extension(prob.grid, data, prob.scales.t_eps);
}

NeckBoundaryGraph boundary_graph(const NeckProblem& prob,
                                 const Eigen::MatrixXd& w,
                                 const Eigen::VectorXd& h_modes, int rings) {
  const int K = prob.grid.theta.points();
  const int n = prob.prof.dimension();
  if (w.rows() != prob.grid.rows() || w.cols() != K)
    throw std::invalid_argument("field does not match neck grid");
  if (h_modes.size() > K)
    throw std::invalid_argument("more boundary modes than angular nodes");
  if (rings < 5)
    throw std::invalid_argument("derivative stencil needs at least 5 rings");
  const double r_eps = prob.scales.r_eps;
  const double t_eps = prob.scales.t_eps;
  const double unit = std::exp(std::log(prob.scales.eps) / (n - 1.0));
  const int mid = prob.grid.rows() / 2;  // t = 0 row (odd row count)

  NeckBoundaryGraph out;
  out.radii.resize(rings);
  for (int k = 0; k < rings; ++k)
    out.radii[k] = r_eps * (0.5 + 0.5 * k / (rings - 1.0));
  out.radii[rings - 1] = r_eps;

  Eigen::MatrixXd values(rings, K);
  std::vector<double> amp(mid + 1);
  for (int q = 0; q < K; ++q) {
    const double* col = w.col(q).data();
    auto value_at = [&](double t) {
      return interp_column(prob.grid.t, col, t);
    };
    for (int i = 0; i <= mid; ++i)
      amp[i] = unit * immerse_amplitudes(prob.prof, prob.chi, prob.grid.t[i],
                                         w(i, q))
                          .radial;
    for (int k = 0; k < rings; ++k) {
      const double r = out.radii[k];
      double t_star;
      if (std::abs(amp[0] - r) <= 1e-12 * r_eps) {
        t_star = -t_eps;  // boundary ring, amplitude exact up to rounding
      } else {
        // the amplitude must cross r exactly once on t <= 0; count sign
        // alternations node by node (zeros inherit the previous sign)
        int hit = -1, alternations = 0, prev = amp[0] - r >= 0 ? 1 : -1;
        for (int i = 1; i <= mid; ++i) {
          const int sg = amp[i] - r >= 0 ? 1 : -1;
          if (sg != prev) {
            ++alternations;
            if (hit < 0) hit = i;
            prev = sg;
          }
        }
        if (alternations > 1)
          throw std::invalid_argument("neck graph folds over the annulus");
        if (hit < 0)
          throw std::invalid_argument("radius outside the neck graph range");
        auto f = [&](double t) {
          return unit * immerse_amplitudes(prob.prof, prob.chi, t,
                                           value_at(t))
                            .radial -
                 r;
        };
        t_star = bisect(f, prob.grid.t[hit - 1], prob.grid.t[hit], 1e-14);
      }
      values(k, q) =
          unit *
          immerse_amplitudes(prob.prof, prob.chi, t_star, value_at(t_star))
              .height;
    }
  }

  out.u.resize(rings, K);
  for (int k = 0; k < rings; ++k)
    out.u.row(k) =
        (prob.grid.theta.analysis * values.row(k).transpose()).transpose();
  out.u0 = Eigen::MatrixXd::Zero(rings, K);
  const double p0 = prob.grid.theta.basis(0, 0);  // constant basis value
  for (int k = 0; k < rings; ++k) {
    const double r = out.radii[k];
    out.u0(k, 0) = (-unit * prob.prof.d0() +
                    prob.scales.eps / (n - 2.0) * std::pow(r, 2.0 - n)) /
                   p0;
    const double rhat = r / r_eps;
    for (int j = 0; j < h_modes.size(); ++j)
      out.u0(k, j) += h_modes[j] * std::pow(rhat, j);
  }
  out.v_disc = out.u - out.u0;
  return out;
}

}  // namespace rgluer
