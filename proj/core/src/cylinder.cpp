#include "rgluer/cylinder.hpp"

#include <cmath>
#include <stdexcept>

#include "rgluer/numerics.hpp"

namespace rgluer {
namespace {

double potential_coefficient(int n) { return 0.25 * n * (3.0 * n - 2.0); }

double log_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

// First t with phi^{2-2n} <= tiny; the decaying pair is seeded there.
double negligible_potential_t(const CatenoidProfile& prof, double tiny) {
  const int n = prof.dimension();
  const double target = -std::log(tiny) / (2.0 * n - 2.0);
  double hi = 1.0;
  while (prof.log_phi(hi) < target) hi *= 2.0;
  return bisect([&](double t) { return prof.log_phi(t) - target; }, 0.0, hi,
                1e-12);
}

// RK4 on m'' = 2 delta m' - P(t) m. Marching toward smaller t is the stable
// direction for the solution with m -> const (u ~ e^{-delta t}).
void march_scaled(const std::function<double(double)>& P, double delta,
                  double t0, double t1, double& m, double& p, int steps) {
  const double h = (t1 - t0) / steps;
  auto f = [&](double t, double mv, double pv, double& dm, double& dp) {
    dm = pv;
    dp = 2.0 * delta * pv - P(t) * mv;
  };
  double t = t0;
  for (int s = 0; s < steps; ++s) {
    double k1m, k1p, k2m, k2p, k3m, k3p, k4m, k4p;
    f(t, m, p, k1m, k1p);
    f(t + 0.5 * h, m + 0.5 * h * k1m, p + 0.5 * h * k1p, k2m, k2p);
    f(t + 0.5 * h, m + 0.5 * h * k2m, p + 0.5 * h * k2p, k3m, k3p);
    f(t + h, m + h * k3m, p + h * k3p, k4m, k4p);
    m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    t = t0 + (s + 1) * h;
  }
}

}  // namespace

CylinderGrid make_cylinder_grid(int n, double lo, double hi, int nt,
                                int ntheta) {
  if (nt < 5 || hi <= lo) throw std::invalid_argument("bad cylinder grid");
  CylinderGrid g;
  g.t.resize(nt);
  const double h = (hi - lo) / (nt - 1);
  for (int i = 0; i < nt; ++i) g.t[i] = lo + i * h;
  g.t.back() = hi;
  g.theta = make_theta_grid(n, ntheta);
  return g;
}

Eigen::MatrixXd apply_L(const CatenoidProfile& prof, const CylinderGrid& grid,
                        const Eigen::MatrixXd& w) {
  const int nt = grid.rows();
  const int K = grid.theta.points();
  if (w.rows() != nt || w.cols() != K)
    throw std::invalid_argument("field does not match grid");
  const int n = prof.dimension();
  const double V = potential_coefficient(n);

  Eigen::VectorXd pot(nt);
  for (int i = 0; i < nt; ++i)
    pot[i] = V * prof.phi_pow(grid.t[i], 2.0 - 2.0 * n);

  Eigen::MatrixXd coeffs = w * grid.theta.analysis.transpose();
  Eigen::MatrixXd out(nt, K);
  for (int j = 0; j < K; ++j) {
    const double dj = mode_decay_rate(n, j);
    std::span<const double> col(coeffs.col(j).data(), nt);
    for (int i = 0; i < nt; ++i) {
      const double d2 = fd_derivative(grid.t, col, i, 2);
      out(i, j) = d2 + (pot[i] - dj * dj) * coeffs(i, j);
    }
  }
  return out * grid.theta.basis.transpose();
}

Eigen::MatrixXd poisson_extension(const CylinderGrid& grid,
                                  const Eigen::VectorXd& h_modes) {
  const int nt = grid.rows();
  const int K = grid.theta.points();
  if (h_modes.size() != K) throw std::invalid_argument("mode count mismatch");
  Eigen::MatrixXd coeffs(nt, K);
  for (int j = 0; j < K; ++j) {
    const double dj = mode_decay_rate(grid.theta.n, j);
    for (int i = 0; i < nt; ++i)
      coeffs(i, j) = std::exp(-dj * grid.t[i]) * h_modes[j];
  }
  return coeffs * grid.theta.basis.transpose();
}

Eigen::MatrixXd shifted_poisson_extension(const CylinderGrid& grid,
                                          const Eigen::VectorXd& h_modes,
                                          double t_eps) {
  const int nt = grid.rows();
  const int K = grid.theta.points();
  if (h_modes.size() != K) throw std::invalid_argument("mode count mismatch");
  if (h_modes[0] != 0.0 || h_modes[1] != 0.0)
    throw std::invalid_argument("shifted extension is defined for modes >= 2");
  Eigen::MatrixXd coeffs(nt, K);
  coeffs.col(0).setZero();
  coeffs.col(1).setZero();
  for (int j = 2; j < K; ++j) {
    const double dj = mode_decay_rate(grid.theta.n, j);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (int i = 0; i < nt; ++i) {
      const double t = grid.t[i];
      coeffs(i, j) = (std::exp(-dj * (t_eps - t)) +
                      sign * std::exp(-dj * (t_eps + t))) *
                     h_modes[j];
    }
  }
  return coeffs * grid.theta.basis.transpose();
}

Eigen::MatrixXd extend_rhs(const CylinderGrid& neck, const CylinderGrid& ext,
                           const Eigen::MatrixXd& f) {
  const double h = neck.spacing();
  if (std::abs(ext.spacing() - h) > 1e-12 * h ||
      ext.theta.points() != neck.theta.points() || ext.theta.n != neck.theta.n)
    throw std::invalid_argument("grids are not aligned");
  const int off = static_cast<int>(std::lround((neck.t[0] - ext.t[0]) / h));
  const int nt = neck.rows();
  if (off < 0 || off + nt > ext.rows() ||
      std::abs(ext.t[off] - neck.t[0]) > 1e-9)
    throw std::invalid_argument("neck grid does not sit inside extended grid");

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ext.rows(), f.cols());
  out.middleRows(off, nt) = f;
  for (int i = off + nt; i < ext.rows(); ++i) {
    const double s = ext.t[i] - neck.t[nt - 1];
    if (s >= 1.0) break;
    out.row(i) = (1.0 - smoothstep_quintic(s)) * f.row(nt - 1);
  }
  for (int i = off - 1; i >= 0; --i) {
    const double s = neck.t[0] - ext.t[i];
    if (s >= 1.0) break;
    out.row(i) = (1.0 - smoothstep_quintic(s)) * f.row(0);
  }
  return out;
}

GreenSolver::GreenSolver(const CatenoidProfile& prof, const CylinderGrid& grid)
    : grid_(grid) {
  const int nt = grid_.rows();
  const int K = grid_.theta.points();
  const int n = prof.dimension();
  if (nt % 2 == 0 || std::abs(grid_.t[0] + grid_.t[nt - 1]) > 1e-9)
    throw std::invalid_argument("Green solver needs a symmetric grid");
  const int center = (nt - 1) / 2;
  const double hi = grid_.t[nt - 1];
  const double h = grid_.spacing();
  const double V = potential_coefficient(n);
  auto P = [&](double t) { return V * prof.phi_pow(t, 2.0 - 2.0 * n); };

  pot_.resize(nt);
  for (int i = 0; i < nt; ++i) pot_[i] = P(grid_.t[i]);

  const double delta_max = mode_decay_rate(n, K - 1);
  if (delta_max * hi > 280.0)
    throw std::invalid_argument(
        "mode count times half-length exceeds the scaled-pair range");

  u_minus_.resize(nt, K);
  u_plus_.resize(nt, K);
  Eigen::MatrixXd du_plus(nt, K), du_minus(nt, K);
  wronskian_.resize(K);

  const double t_seed = std::max(hi, negligible_potential_t(prof, 1e-14));
  for (int j = 2; j < K; ++j) {
    const double dj = mode_decay_rate(n, j);
    // u_+ = e^{-delta t} m with m(t_seed) = 1, m'(t_seed) = 0; the scaled
    // form keeps every stored value inside double range.
    double m = 1.0, p = 0.0;
    if (t_seed > hi) {
      const int steps =
          std::max(8, static_cast<int>(std::ceil((t_seed - hi) * (dj + 1.0) /
                                                 0.3)));
      march_scaled(P, dj, t_seed, hi, m, p, steps);
    }
    const int substeps = std::max(4, static_cast<int>(std::ceil(dj * h)));
    for (int i = nt - 1; i >= 0; --i) {
      if (i < nt - 1)
        march_scaled(P, dj, grid_.t[i + 1], grid_.t[i], m, p, substeps);
      const double e = std::exp(-dj * grid_.t[i]);
      u_plus_(i, j) = e * m;
      du_plus(i, j) = e * (p - dj * m);
    }
    for (int i = 0; i < nt; ++i) {
      u_minus_(i, j) = u_plus_(nt - 1 - i, j);
      du_minus(i, j) = -du_plus(nt - 1 - i, j);
    }
  }
  const JacobiFamily minus_family[2] = {JacobiFamily::kVerticalTranslation,
                                        JacobiFamily::kHorizontalTranslation};
  const JacobiFamily plus_family[2] = {JacobiFamily::kDilation,
                                       JacobiFamily::kRotation};
  for (int j = 0; j < 2 && j < K; ++j) {
    for (int i = 0; i < nt; ++i) {
      const double t = grid_.t[i];
      u_minus_(i, j) = jacobi_amplitude(prof, minus_family[j], t);
      du_minus(i, j) = jacobi_amplitude_dt(prof, minus_family[j], t);
      u_plus_(i, j) = jacobi_amplitude(prof, plus_family[j], t);
      du_plus(i, j) = jacobi_amplitude_dt(prof, plus_family[j], t);
    }
  }
  for (int j = 0; j < K; ++j) {
    wronskian_[j] = u_minus_(center, j) * du_plus(center, j) -
                    du_minus(center, j) * u_plus_(center, j);
    if (std::abs(wronskian_[j]) < 1e-12)
      throw std::runtime_error("degenerate homogeneous pair");
  }
}

Eigen::MatrixXd GreenSolver::apply(const Eigen::MatrixXd& f) const {
  const int nt = grid_.rows();
  const int K = grid_.theta.points();
  if (f.rows() != nt || f.cols() != K)
    throw std::invalid_argument("field does not match grid");
  const double h = grid_.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const int n = grid_.theta.n;
  const int center = (nt - 1) / 2;

  Eigen::MatrixXd coeffs = f * grid_.theta.analysis.transpose();
  Eigen::MatrixXd out(nt, K);
  std::vector<double> diag(nt), rhs(nt), prod_m(nt), prod_p(nt);

  // Modes j >= 2: Thomas solve of the centred stencil; eliminating the ghost
  // nodes doubles the first and last off-diagonal couplings and adds
  // -2 delta / h to the corner diagonal entries. The matrix is diagonally
  // dominated by -2/h^2, so elimination without pivoting is stable. This
  // closure is only usable where no homogeneous solution decays at both
  // ends; mode 1 has one (the horizontal translation field phi^{-n/2}),
  // which would make the closed matrix near-singular, so modes 0 and 1 use
  // variation of parameters on the Jacobi pairs with the particular
  // solution normalized at the centre instead.
  auto solve_mode = [&](int j, const Eigen::VectorXd& fj) {
    Eigen::VectorXd g(nt);
    if (j >= 2) {
      const double dj = mode_decay_rate(n, j);
      for (int i = 0; i < nt; ++i) {
        diag[i] = -2.0 * inv_h2 + pot_[i] - dj * dj;
        rhs[i] = fj[i];
      }
      diag[0] -= 2.0 * dj / h;
      diag[nt - 1] -= 2.0 * dj / h;
      for (int i = 1; i < nt; ++i) {
        const double sub = (i == nt - 1) ? 2.0 * inv_h2 : inv_h2;
        const double sup = (i == 1) ? 2.0 * inv_h2 : inv_h2;
        const double m = sub / diag[i - 1];
        diag[i] -= m * sup;
        rhs[i] -= m * rhs[i - 1];
      }
      g[nt - 1] = rhs[nt - 1] / diag[nt - 1];
      for (int i = nt - 2; i >= 0; --i) {
        const double sup = (i == 0) ? 2.0 * inv_h2 : inv_h2;
        g[i] = (rhs[i] - sup * g[i + 1]) / diag[i];
      }
    } else {
      for (int i = 0; i < nt; ++i) {
        prod_m[i] = u_minus_(i, j) * fj[i];
        prod_p[i] = u_plus_(i, j) * fj[i];
      }
      const std::vector<double> Pm = trapezoid_prefix(grid_.t, prod_m);
      const std::vector<double> Pp = trapezoid_prefix(grid_.t, prod_p);
      for (int i = 0; i < nt; ++i)
        g[i] = (u_plus_(i, j) * (Pm[i] - Pm[center]) -
                u_minus_(i, j) * (Pp[i] - Pp[center])) /
               wronskian_[j];
    }
    return g;
  };

  for (int j = 0; j < K; ++j) {
    const Eigen::VectorXd fj = coeffs.col(j);
    const Eigen::VectorXd ga = solve_mode(j, fj);
    const Eigen::VectorXd gb = solve_mode(j, fj.reverse());
    // Average with the pullback under (t, z) -> (-t, -z); the mode parity
    // factors cancel pairwise, leaving a plain reversal per mode. The matrix
    // already commutes with the reversal, so this only cancels the
    // elimination-direction roundoff bias.
    out.col(j) = 0.5 * (ga + gb.reverse());
  }
  return out * grid_.theta.basis.transpose();
}

double weighted_norm(const CylinderGrid& grid, const Eigen::MatrixXd& w,
                     double delta) {
  const int nt = grid.rows();
  const int K = grid.theta.points();
  if (w.rows() != nt || w.cols() != K)
    throw std::invalid_argument("field does not match grid");
  Eigen::VectorXd wt(nt);
  for (int i = 0; i < nt; ++i) wt[i] = std::exp(-delta * log_cosh(grid.t[i]));

  double norm = 0.0;
  auto take = [&](double v, int i) { norm = std::max(norm, std::abs(v) * wt[i]); };
  for (int i = 0; i < nt; ++i) {
    for (int q = 0; q < K; ++q) {
      take(w(i, q), i);
      if (i + 1 < nt) take(w(i + 1, q) - w(i, q), i);
      if (q + 1 < K) take(w(i, q + 1) - w(i, q), i);
      if (i > 0 && i + 1 < nt)
        take(w(i + 1, q) - 2.0 * w(i, q) + w(i - 1, q), i);
      if (q > 0 && q + 1 < K)
        take(w(i, q + 1) - 2.0 * w(i, q) + w(i, q - 1), i);
    }
  }
  return norm;
}

double mode_growth_exponent(const CatenoidProfile& prof, int j, double t_max,
                            int nt) {
  const int n = prof.dimension();
  const double dj = mode_decay_rate(n, j);
  const double V = potential_coefficient(n);
  std::vector<double> times(nt);
  const double h = 2.0 * t_max / (nt - 1);
  for (int i = 0; i < nt; ++i) times[i] = -t_max + i * h;
  auto c = [&](double t) {
    return dj * dj - V * prof.phi_pow(t, 2.0 - 2.0 * n);
  };
  const int substeps = std::max(4, static_cast<int>(std::ceil(dj * h / 0.2)));
  const LogTrajectory traj =
      integrate_ode2_log(c, times, 1.0, dj, substeps);
  // Fit on the last quarter only: the well around t = 0 bends the local
  // rate, and for the decaying mode the fit must also stay clear of the
  // integrator's tiny growing-direction contamination.
  const int start = 3 * nt / 4;
  std::span<const double> tt(times.data() + start, times.size() - start);
  std::span<const double> ll(traj.log_abs_v.data() + start,
                             traj.log_abs_v.size() - start);
  return fit_line(tt, ll).slope;
}

}  // namespace rgluer
