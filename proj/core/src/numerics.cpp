#include "rgluer/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace rgluer {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need two or more paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] == 0.0)
      throw std::invalid_argument("log_log_slope: needs x > 0 and y != 0");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::fabs(y[i]));
  }
  return fit_line(lx, ly).slope;
}

double log_linear_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> ly(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) throw std::invalid_argument("log_linear_slope: y == 0");
    ly[i] = std::log(std::fabs(y[i]));
  }
  std::vector<double> xv(x.begin(), x.end());
  return fit_line(xv, ly).slope;
}

double smoothstep_quintic(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double rel_tol, double abs_tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("bisect: endpoints do not bracket a root");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::max(1.0, std::fabs(mid)) + abs_tol)
      return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

double newton_bisect(const std::function<double(double)>& f,
                     const std::function<double(double)>& df, double lo,
                     double hi, double abs_tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("newton_bisect: endpoints do not bracket");
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double fx = f(x);
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = df(x);
    double xn = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) <= abs_tol) return xn;
    x = xn;
  }
  return x;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (a == b) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  return GK::integrate(f, a, b, 12, tol);
}

std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        std::span<const double> grid,
                                        double tol) {
  std::vector<double> out(grid.size(), 0.0);
  for (size_t i = 1; i < grid.size(); ++i)
    out[i] = out[i - 1] + integrate(f, grid[i - 1], grid[i], tol);
  return out;
}

Quadrature1D gauss_gegenbauer(int points, double alpha) {
  if (points < 1) throw std::invalid_argument("gauss_gegenbauer: points < 1");
  if (alpha <= -1.0)
    throw std::invalid_argument("gauss_gegenbauer: alpha must exceed -1");
  // Jacobi matrix for the symmetric Jacobi weight (1-x^2)^alpha: zero diagonal,
  // off-diagonal b_k with b_k^2 = k (k + 2 alpha) / ((2k + 2 alpha)^2 - 1).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double kk = static_cast<double>(k);
    const double denom = (2 * kk + 2 * alpha) * (2 * kk + 2 * alpha) - 1.0;
    const double b2 = kk * (kk + 2 * alpha) / denom;
    const double b = std::sqrt(b2);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_gegenbauer: eigen decomposition failed");
  // mu0 = int_{-1}^{1} (1-x^2)^alpha dx = 2^(2 alpha + 1) B(alpha+1, alpha+1).
  const double mu0 = std::exp((2 * alpha + 1) * std::log(2.0) +
                              2 * std::lgamma(alpha + 1.0) -
                              std::lgamma(2 * alpha + 2.0));
  Quadrature1D q;
  q.nodes = es.eigenvalues();
  q.weights.resize(points);
  for (int i = 0; i < points; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    q.weights[i] = mu0 * v0 * v0;
  }
  return q;
}

std::vector<double> fd_weights(double x0, std::span<const double> nodes,
                               int m) {
  // Fornberg's recursion for derivative weights on arbitrary nodes. Row i
  // must be formed from row i-1 before that row is updated in the j sweep.
  const int nd = static_cast<int>(nodes.size()) - 1;
  if (nd < m) throw std::invalid_argument("fd_weights: stencil too small");
  std::vector<std::vector<double>> c(
      nd + 1, std::vector<double>(static_cast<size_t>(m) + 1, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  for (int i = 1; i <= nd; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nodes.size());
  for (size_t j = 0; j < nodes.size(); ++j) w[j] = c[j][m];
  return w;
}

double fd_derivative(std::span<const double> x, std::span<const double> y,
                     int i, int m) {
  const int n = static_cast<int>(x.size());
  if (n < 4) throw std::invalid_argument("fd_derivative: grid too small");
  int lo;
  int width = (m == 2) ? 4 : 3;
  if (i >= 1 && i <= n - 2 && m <= 2) {
    lo = i - 1;
    width = 3;
  } else {
    lo = (i == 0) ? 0 : n - width;
  }
  std::vector<double> nodes(x.begin() + lo, x.begin() + lo + width);
  const auto w = fd_weights(x[i], nodes, m);
  double out = 0.0;
  for (int j = 0; j < width; ++j) out += w[j] * y[lo + j];
  return out;
}

void integrate_ode2(const std::function<double(double)>& c,
                    std::span<const double> times, double v0, double dv0,
                    std::vector<double>& v, std::vector<double>& dv,
                    int substeps) {
  const size_t nt = times.size();
  v.assign(nt, 0.0);
  dv.assign(nt, 0.0);
  if (nt == 0) return;
  double y = v0, yp = dv0;
  v[0] = y;
  dv[0] = yp;
  for (size_t i = 1; i < nt; ++i) {
    const double h = (times[i] - times[i - 1]) / substeps;
    double t = times[i - 1];
    for (int s = 0; s < substeps; ++s) {
      // RK4 on (v, v') with v'' = c(t) v.
      const double k1v = yp, k1p = c(t) * y;
      const double k2v = yp + 0.5 * h * k1p,
                   k2p = c(t + 0.5 * h) * (y + 0.5 * h * k1v);
      const double k3v = yp + 0.5 * h * k2p,
                   k3p = c(t + 0.5 * h) * (y + 0.5 * h * k2v);
      const double k4v = yp + h * k3p, k4p = c(t + h) * (y + h * k3v);
      y += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      yp += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      t += h;
    }
    v[i] = y;
    dv[i] = yp;
  }
}

LogTrajectory integrate_ode2_log(const std::function<double(double)>& c,
                                 std::span<const double> times, double v0,
                                 double dv0, int substeps) {
  LogTrajectory out;
  const size_t nt = times.size();
  out.log_abs_v.assign(nt, 0.0);
  out.sign_v.assign(nt, 0);
  if (nt == 0) return out;
  double y = v0, yp = dv0, logscale = 0.0;
  auto record = [&](size_t i) {
    out.log_abs_v[i] =
        (y == 0.0) ? -std::numeric_limits<double>::infinity()
                   : std::log(std::fabs(y)) + logscale;
    out.sign_v[i] = (y > 0) - (y < 0);
  };
  record(0);
  for (size_t i = 1; i < nt; ++i) {
    const double h = (times[i] - times[i - 1]) / substeps;
    double t = times[i - 1];
    for (int s = 0; s < substeps; ++s) {
      const double k1v = yp, k1p = c(t) * y;
      const double k2v = yp + 0.5 * h * k1p,
                   k2p = c(t + 0.5 * h) * (y + 0.5 * h * k1v);
      const double k3v = yp + 0.5 * h * k2p,
                   k3p = c(t + 0.5 * h) * (y + 0.5 * h * k2v);
      const double k4v = yp + h * k3p, k4p = c(t + h) * (y + h * k3v);
      y += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      yp += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      t += h;
      const double mag = std::max(std::fabs(y), std::fabs(yp));
      if (mag > 1e100) {
        y /= mag;
        yp /= mag;
        logscale += std::log(mag);
      }
    }
    record(i);
  }
  return out;
}

std::vector<double> trapezoid_prefix(std::span<const double> x,
                                     std::span<const double> y) {
  std::vector<double> out(x.size(), 0.0);
  for (size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

double log_gamma(double x) { return std::lgamma(x); }

double polar_weight_total(int n) {
  // integral of sin^{n-2} over [0, pi] = sqrt(pi) Gamma((n-1)/2) / Gamma(n/2).
  return std::exp(0.5 * std::log(kPi) + std::lgamma((n - 1) / 2.0) -
                  std::lgamma(n / 2.0));
}

}  // namespace rgluer
