#include "rgluer/curvature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "rgluer/numerics.hpp"

namespace rgluer {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& u, const Vec3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
          u[0] * v[1] - u[1] * v[0]};
}

double dot(const Vec3& u, const Vec3& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

// Trace of the second fundamental form for one node given first/second
// derivatives of the generating surface and the transverse multiplicity.
double trace_node(const Vec3& Ft, const Vec3& Fth, const Vec3& Ftt,
                  const Vec3& Ftth, const Vec3& Fthth, double B, int m) {
  const Vec3 N = cross(Ft, Fth);
  const double nn = std::sqrt(dot(N, N));
  const Vec3 nu = {N[0] / nn, N[1] / nn, N[2] / nn};
  const double E = dot(Ft, Ft), F = dot(Ft, Fth), G = dot(Fth, Fth);
  const double btt = dot(nu, Ftt), bts = dot(nu, Ftth), bss = dot(nu, Fthth);
  double H = (G * btt - 2.0 * F * bts + E * bss) / (E * G - F * F);
  if (m > 0) H -= m * nu[1] / B;
  return H;
}

// d/dt of every column by the 3/4-point rule.
Eigen::MatrixXd ddt(std::span<const double> t, const Eigen::MatrixXd& f,
                    int order) {
  Eigen::MatrixXd out(f.rows(), f.cols());
  std::vector<double> col(f.rows());
  for (int q = 0; q < f.cols(); ++q) {
    for (int i = 0; i < f.rows(); ++i) col[i] = f(i, q);
    for (int i = 0; i < f.rows(); ++i)
      out(i, q) = fd_derivative(t, col, i, order);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd mean_curvature_invariant(std::span<const double> tgrid,
                                         const ThetaGrid& theta,
                                         const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& c) {
  const int nt = static_cast<int>(tgrid.size());
  const int K = theta.points();
  if (a.rows() != nt || a.cols() != K || c.rows() != nt || c.cols() != K)
    throw std::invalid_argument("mean_curvature_invariant: field shape");
  const int m = theta.n - 2;

  const Eigen::MatrixXd a_s = a * theta.d1.transpose();
  const Eigen::MatrixXd a_ss = a * theta.d2.transpose();
  const Eigen::MatrixXd c_s = c * theta.d1.transpose();
  const Eigen::MatrixXd c_ss = c * theta.d2.transpose();
  const Eigen::MatrixXd a_t = ddt(tgrid, a, 1);
  const Eigen::MatrixXd a_tt = ddt(tgrid, a, 2);
  const Eigen::MatrixXd a_ts = ddt(tgrid, a_s, 1);
  const Eigen::MatrixXd c_t = ddt(tgrid, c, 1);
  const Eigen::MatrixXd c_tt = ddt(tgrid, c, 2);
  const Eigen::MatrixXd c_ts = ddt(tgrid, c_s, 1);

  Eigen::MatrixXd H(nt, K);
  for (int i = 0; i < nt; ++i) {
    for (int q = 0; q < K; ++q) {
      const double co = std::cos(theta.theta[q]);
      const double si = std::sin(theta.theta[q]);
      const Vec3 Ft = {a_t(i, q) * co, a_t(i, q) * si, c_t(i, q)};
      const Vec3 Fth = {a_s(i, q) * co - a(i, q) * si,
                        a_s(i, q) * si + a(i, q) * co, c_s(i, q)};
      const Vec3 Ftt = {a_tt(i, q) * co, a_tt(i, q) * si, c_tt(i, q)};
      const Vec3 Ftth = {a_ts(i, q) * co - a_t(i, q) * si,
                         a_ts(i, q) * si + a_t(i, q) * co, c_ts(i, q)};
      const Vec3 Fthth = {a_ss(i, q) * co - 2.0 * a_s(i, q) * si -
                              a(i, q) * co,
                          a_ss(i, q) * si + 2.0 * a_s(i, q) * co -
                              a(i, q) * si,
                          c_ss(i, q)};
      H(i, q) = trace_node(Ft, Fth, Ftt, Ftth, Fthth, a(i, q) * si, m);
    }
  }
  return H;
}

Eigen::MatrixXd mean_curvature_periodic(std::span<const double> sgrid,
                                        const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& B,
                                        const Eigen::MatrixXd& C, int m) {
  const int ns = static_cast<int>(sgrid.size());
  const int M = static_cast<int>(A.cols());
  if (A.rows() != ns || B.rows() != ns || C.rows() != ns || B.cols() != M ||
      C.cols() != M)
    throw std::invalid_argument("mean_curvature_periodic: field shape");
  const double h = 2.0 * kPi / M;
  auto wrap = [M](int q) { return (q % M + M) % M; };

  auto dth = [&](const Eigen::MatrixXd& f, int i, int q, int order) {
    const double fm = f(i, wrap(q - 1)), f0 = f(i, q), fp = f(i, wrap(q + 1));
    return order == 1 ? (fp - fm) / (2.0 * h) : (fp - 2.0 * f0 + fm) / (h * h);
  };

  const Eigen::MatrixXd A_t = ddt(sgrid, A, 1), A_tt = ddt(sgrid, A, 2);
  const Eigen::MatrixXd B_t = ddt(sgrid, B, 1), B_tt = ddt(sgrid, B, 2);
  const Eigen::MatrixXd C_t = ddt(sgrid, C, 1), C_tt = ddt(sgrid, C, 2);

  Eigen::MatrixXd H(ns, M);
  for (int i = 0; i < ns; ++i) {
    for (int q = 0; q < M; ++q) {
      const Vec3 Ft = {A_t(i, q), B_t(i, q), C_t(i, q)};
      const Vec3 Fth = {dth(A, i, q, 1), dth(B, i, q, 1), dth(C, i, q, 1)};
      const Vec3 Ftt = {A_tt(i, q), B_tt(i, q), C_tt(i, q)};
      const Vec3 Ftth = {dth(A_t, i, q, 1), dth(B_t, i, q, 1),
                         dth(C_t, i, q, 1)};
      const Vec3 Fthth = {dth(A, i, q, 2), dth(B, i, q, 2), dth(C, i, q, 2)};
      H(i, q) = trace_node(Ft, Fth, Ftt, Ftth, Fthth, B(i, q), m);
    }
  }
  return H;
}

double xi_value(double u1, double ur, double u11, double u1r, double urr) {
  return (u11 * u1 * u1 + 2.0 * u1r * u1 * ur + urr * ur * ur) /
         (1.0 + u1 * u1 + ur * ur);
}

Eigen::MatrixXd graph_minimality_defect(std::span<const double> x1,
                                        std::span<const double> r,
                                        const Eigen::MatrixXd& u, int n) {
  const int nx = static_cast<int>(x1.size());
  const int nr = static_cast<int>(r.size());
  if (u.rows() != nx || u.cols() != nr)
    throw std::invalid_argument("graph_minimality_defect: field shape");

  Eigen::MatrixXd u_1(nx, nr), u_11(nx, nr), u_r(nx, nr), u_rr(nx, nr);
  std::vector<double> line(std::max(nx, nr));
  for (int j = 0; j < nr; ++j) {
    for (int i = 0; i < nx; ++i) line[i] = u(i, j);
    std::span<const double> ls(line.data(), nx);
    for (int i = 0; i < nx; ++i) {
      u_1(i, j) = fd_derivative(x1, ls, i, 1);
      u_11(i, j) = fd_derivative(x1, ls, i, 2);
    }
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nr; ++j) line[j] = u(i, j);
    std::span<const double> ls(line.data(), nr);
    for (int j = 0; j < nr; ++j) {
      u_r(i, j) = fd_derivative(r, ls, j, 1);
      u_rr(i, j) = fd_derivative(r, ls, j, 2);
    }
  }
  Eigen::MatrixXd u_1r(nx, nr);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nr; ++j) line[j] = u_1(i, j);
    std::span<const double> ls(line.data(), nr);
    for (int j = 0; j < nr; ++j) u_1r(i, j) = fd_derivative(r, ls, j, 1);
  }

  Eigen::MatrixXd defect(nx, nr);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nr; ++j) {
      const double lap =
          u_11(i, j) + u_rr(i, j) + (n - 2) / r[j] * u_r(i, j);
      defect(i, j) = lap - xi_value(u_1(i, j), u_r(i, j), u_11(i, j),
                                    u_1r(i, j), u_rr(i, j));
    }
  return defect;
}

}  // namespace rgluer
