#include "rgluer/curvature.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "rgluer/geometry.hpp"
#include "rgluer/numerics.hpp"

using namespace rgluer;

namespace {

std::vector<double> uniform(double a, double b, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = a + (b - a) * i / (count - 1);
  return g;
}

double catenoid_sup_H(int n, int nt) {
  const CatenoidProfile prof(n);
  const auto tg = uniform(-1.5, 1.5, nt);
  const auto theta = make_theta_grid(n, 12);
  Eigen::MatrixXd a(nt, theta.points()), c(nt, theta.points());
  for (int i = 0; i < nt; ++i) {
    a.row(i).setConstant(prof.phi(tg[i]));
    c.row(i).setConstant(prof.psi(tg[i]));
  }
  return mean_curvature_invariant(tg, theta, a, c).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("catenoid discrete mean curvature vanishes at second order") {
  for (int n : {3, 4}) {
    const double coarse = catenoid_sup_H(n, 65);
    const double fine = catenoid_sup_H(n, 129);
    CHECK(coarse < 1e-2);
    CHECK(fine < coarse);
    const double order = std::log2(coarse / fine);
    CHECK(order > 1.6);
    CHECK(order < 2.4);
  }
}

TEST_CASE("round sphere has constant mean curvature n") {
  // S^n parametrized as (sin t * z, cos t): both evaluator branches must see
  // |H| = n with consistent sign.
  for (int n : {3, 4}) {
    const int nt = 201;
    const auto tg = uniform(0.4, kPi - 0.4, nt);
    const auto theta = make_theta_grid(n, 10);
    Eigen::MatrixXd a(nt, theta.points()), c(nt, theta.points());
    for (int i = 0; i < nt; ++i) {
      a.row(i).setConstant(std::sin(tg[i]));
      c.row(i).setConstant(std::cos(tg[i]));
    }
    const Eigen::MatrixXd H = mean_curvature_invariant(tg, theta, a, c);
    const double dev = (H.cwiseAbs().array() - n).abs().maxCoeff();
    CHECK(dev < 2e-3);
    CHECK(H.maxCoeff() * H.minCoeff() > 0.0);  // single sign
  }
}

TEST_CASE("periodic evaluator: cylinder and sphere in R^3") {
  const int nt = 101, M = 64;
  const auto sg = uniform(-1.0, 1.0, nt);
  Eigen::MatrixXd A(nt, M), B(nt, M), C(nt, M);

  // Cylinder of radius 2: |H| = 1/2.
  for (int i = 0; i < nt; ++i)
    for (int q = 0; q < M; ++q) {
      const double th = 2.0 * kPi * q / M;
      A(i, q) = 2.0 * std::cos(th);
      B(i, q) = 2.0 * std::sin(th);
      C(i, q) = sg[i];
    }
  Eigen::MatrixXd H = mean_curvature_periodic(sg, A, B, C, 0);
  CHECK((H.cwiseAbs().array() - 0.5).abs().maxCoeff() < 2e-3);

  // Unit sphere band: |H| = 2.
  const auto lat = uniform(0.5, kPi - 0.5, nt);
  for (int i = 0; i < nt; ++i)
    for (int q = 0; q < M; ++q) {
      const double th = 2.0 * kPi * q / M;
      A(i, q) = std::sin(lat[i]) * std::cos(th);
      B(i, q) = std::sin(lat[i]) * std::sin(th);
      C(i, q) = std::cos(lat[i]);
    }
  H = mean_curvature_periodic(lat, A, B, C, 0);
  CHECK((H.cwiseAbs().array() - 2.0).abs().maxCoeff() < 3e-3);
}

TEST_CASE("xi quadratic part: pinned value") {
  // u = x r at the point (1,1): u_1 = u_r = 1, u_1r = 1, pure cross term.
  CHECK(xi_value(1.0, 1.0, 0.0, 1.0, 0.0) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(xi_value(0.0, 0.0, 5.0, 7.0, 11.0) == 0.0);
}

TEST_CASE("graph minimality defect vanishes on the catenoid end graph") {
  // The upper catenoid end is the vertical graph u(rho) = psi(tau(rho)) over
  // an annulus; Delta_n u = Xi(u) exactly, so the defect is pure truncation.
  for (int n : {3, 4}) {
    const CatenoidProfile prof(n);
    auto tau = [&](double rho) {
      auto g = [&](double t) { return prof.log_phi(t) - std::log(rho); };
      double hi = 1.0;
      while (g(hi) < 0.0) hi *= 2.0;
      return bisect(g, 0.0, hi, 0.0, 1e-14);
    };
    auto sup_defect = [&](int pts) {
      const auto x1 = uniform(0.9, 1.7, pts);
      const auto r = uniform(1.1, 1.9, pts);
      Eigen::MatrixXd u(pts, pts);
      for (int i = 0; i < pts; ++i)
        for (int j = 0; j < pts; ++j)
          u(i, j) = prof.psi(tau(std::hypot(x1[i], r[j])));
      return graph_minimality_defect(x1, r, u, n).cwiseAbs().maxCoeff();
    };
    const double coarse = sup_defect(33), fine = sup_defect(65);
    const double order = std::log2(coarse / fine);
    CHECK(coarse < 1e-3);
    CHECK(order > 1.6);
    CHECK(order < 2.6);
  }
}
