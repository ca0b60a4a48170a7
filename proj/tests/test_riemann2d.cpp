#include "rgluer/riemann2d.hpp"

#include <cmath>

#include "doctest.h"
#include "rgluer/curvature.hpp"

using namespace rgluer;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  double s = f(a) + f(b);
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("neck radius solves R^4 + mu R^2 = 1") {
  CHECK(neck_radius2d(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  // R0^2 at mu = 1 is the golden-ratio conjugate
  CHECK(neck_radius2d(1.0) ==
        doctest::Approx(0.7861513777574233).epsilon(1e-14));
  for (double mu : {0.0, 0.5, 1.0}) {
    const double r = neck_radius2d(mu);
    CHECK(r * r * (mu + r * r) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("zero-energy orbits conserve the first integral") {
  for (double mu : {0.0, 1.0}) {
    const Riemann2D sol = solve_riemann2d(mu, 1.2, 241);
    CHECK(energy_defect2d(sol) < 1e-10);
    for (size_t i = 1; i < sol.radius.size(); ++i) {
      CHECK(sol.radius[i] > sol.radius[i - 1]);  // monotone toward the end
      CHECK(sol.center[i] > sol.center[i - 1]);
    }
  }
}

TEST_CASE("planar-end parameter matches the lemniscatic integral") {
  // int_1^inf dR / sqrt(R^4 - 1) after R -> 1/u, u^2 = sin(beta^2) becomes a
  // smooth integrand; evaluated with a plain Simpson rule as an oracle.
  auto f = [](double beta) {
    const double x = beta * beta;
    const double ratio = x < 1e-6 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return 1.0 / std::sqrt(ratio);
  };
  const double blow_up = simpson(f, 0.0, std::sqrt(M_PI / 2.0), 4000);
  // Gamma(1/4)^2 / (4 sqrt(2 pi))
  CHECK(blow_up == doctest::Approx(1.3110287771460598).epsilon(1e-10));

  const Riemann2D sol = solve_riemann2d(0.0, 1.30, 33);
  const double R_end = sol.radius.back();
  CHECK(R_end > 50.0);
  const double est = 1.30 + 1.0 / R_end + 0.1 * std::pow(R_end, -5.0);
  CHECK(est == doctest::Approx(blow_up).epsilon(1e-8));
}

TEST_CASE("foliation rows are exact circles and the surface is minimal") {
  for (double mu : {0.0, 1.0}) {
    double sup[2];
    for (int r = 0; r < 2; ++r) {
      const Riemann2D sol = solve_riemann2d(mu, 1.0, r == 0 ? 101 : 201);
      const Surface3 surf = riemann2d_surface(sol, r == 0 ? 48 : 96);

      const int half = static_cast<int>(sol.lambda.size());
      for (int i = 0; i < surf.A.rows(); i += 17) {
        const int k = std::abs(i - (half - 1));
        const double a = (i < half - 1 ? -1.0 : 1.0) * sol.center[k];
        for (int q = 0; q < surf.A.cols(); q += 7) {
          const double dx = surf.A(i, q) - a;
          const double rad = std::hypot(dx, surf.B(i, q));
          CHECK(std::abs(rad - sol.radius[k]) < 1e-13 * (1.0 + rad));
        }
      }

      const Eigen::MatrixXd H =
          mean_curvature_periodic(surf.s, surf.A, surf.B, surf.C, 0);
      sup[r] = H.cwiseAbs().maxCoeff();
    }
    CHECK(sup[0] < 5e-2);
    const double order = std::log2(sup[0] / sup[1]);
    CHECK(order > 1.6);
    CHECK(order < 2.4);
  }
}
