#include "rgluer/riemann2d.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace rgluer {

double neck_radius2d(double mu) {
  return std::sqrt(0.5 * (-mu + std::sqrt(mu * mu + 4.0)));
}

Riemann2D solve_riemann2d(double mu, double lambda_max, int samples) {
  namespace ode = boost::numeric::odeint;
  if (samples < 2 || lambda_max <= 0)
    throw std::invalid_argument("bad sample range");
  using State = std::array<double, 3>;  // R, R', a

  Riemann2D sol;
  sol.mu = mu;
  sol.lambda.resize(samples);
  for (int i = 0; i < samples; ++i)
    sol.lambda[i] = lambda_max * i / (samples - 1);

  auto system = [mu](const State& y, State& dy, double) {
    if (y[0] > 1e8)
      throw std::overflow_error("sample range reaches the planar end");
    dy[0] = y[1];
    dy[1] = mu * y[0] + 2.0 * y[0] * y[0] * y[0];
    dy[2] = y[0] * y[0];
  };
  State y = {neck_radius2d(mu), 0.0, 0.0};
  auto observer = [&sol](const State& s, double) {
    sol.radius.push_back(s[0]);
    sol.dradius.push_back(s[1]);
    sol.center.push_back(s[2]);
  };
  auto stepper =
      ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_fehlberg78<State>());
  ode::integrate_times(stepper, system, y, sol.lambda.begin(),
                       sol.lambda.end(), 1e-4, observer);
  return sol;
}

double energy_defect2d(const Riemann2D& sol) {
  double worst = 0.0;
  for (size_t i = 0; i < sol.radius.size(); ++i) {
    const double R = sol.radius[i];
    const double R2 = R * R;
    const double e =
        sol.dradius[i] * sol.dradius[i] + 1.0 - sol.mu * R2 - R2 * R2;
    worst = std::max(worst, std::abs(e));
  }
  return worst;
}

Surface3 riemann2d_surface(const Riemann2D& sol, int nphi) {
  const int half = static_cast<int>(sol.lambda.size());
  const int rows = 2 * half - 1;
  Surface3 surf;
  surf.s.resize(rows);
  surf.A.resize(rows, nphi);
  surf.B.resize(rows, nphi);
  surf.C.resize(rows, nphi);
  for (int i = 0; i < rows; ++i) {
    // reflection: R even, a odd in lambda
    const int k = std::abs(i - (half - 1));
    const double sign = i < half - 1 ? -1.0 : 1.0;
    const double lam = sign * sol.lambda[k];
    const double R = sol.radius[k];
    const double a = sign * sol.center[k];
    surf.s[i] = lam;
    for (int q = 0; q < nphi; ++q) {
      const double phi = 2.0 * M_PI * q / nphi;
      surf.A(i, q) = a + R * std::cos(phi);
      surf.B(i, q) = R * std::sin(phi);
      surf.C(i, q) = lam;
    }
  }
  return surf;
}

}  // namespace rgluer
