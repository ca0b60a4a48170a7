#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <span>
#include <vector>

// Small numerical toolbox shared by every module: least-squares fits,
// bracketed root finding, adaptive quadrature, Gauss-Gegenbauer rules,
// finite-difference weights on arbitrary stencils, and fixed-step
// integration of linear second-order ODEs sampled on a grid.
namespace rgluer {

inline constexpr double kPi = 3.14159265358979323846;

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Ordinary least squares of y against x. Requires x.size() == y.size() >= 2.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Slope of log|y| against log x; every x must be positive and every y nonzero.
double log_log_slope(std::span<const double> x, std::span<const double> y);

// Slope of log|y| against x (exponential-rate fit).
double log_linear_slope(std::span<const double> x, std::span<const double> y);

// Quintic smoothstep: 0 for u <= 0, 1 for u >= 1, C^2 across the ends.
double smoothstep_quintic(double u);

// Bisection on a bracketing interval [lo, hi] (f(lo), f(hi) of opposite sign).
// Stops when the bracket width drops below rel_tol * max(1, |root|) + abs_tol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double rel_tol, double abs_tol = 0.0);

// Newton refinement seeded by bisection; falls back to bisection whenever a
// Newton step leaves the bracket. abs_tol bounds the final x increment.
double newton_bisect(const std::function<double(double)>& f,
                     const std::function<double(double)>& df, double lo,
                     double hi, double abs_tol);

// Adaptive Gauss-Kronrod integral of f over [a, b] with relative target tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13);

// Prefix integrals of f along a sorted grid: result[i] = integral from grid[0]
// to grid[i], each interval evaluated with the adaptive rule.
std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        std::span<const double> grid,
                                        double tol = 1e-13);

struct Quadrature1D {
  Eigen::VectorXd nodes;    // ascending in (-1, 1)
  Eigen::VectorXd weights;  // positive, sum = moment of the weight function
};

// Gauss rule for the weight (1 - x^2)^alpha on (-1, 1), alpha > -1.
// alpha = 0 reproduces Gauss-Legendre. Nodes/weights via Golub-Welsch.
Quadrature1D gauss_gegenbauer(int points, double alpha);

// Finite-difference weights (Fornberg) for the m-th derivative at x0 using the
// given stencil nodes. Exact for polynomials of degree stencil.size()-1.
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int m);

// Derivative of sampled values at index i along a sorted grid using a centered
// 3-point stencil (one-sided 3/4-point second-order stencil at the ends).
// m = 1 or 2.
double fd_derivative(std::span<const double> x, std::span<const double> y,
                     int i, int m);

// Integrates v'' = c(t) v from (v0, dv0) at times[0], returning v and v' at
// every entry of `times` (strictly monotone). Classic RK4 with `substeps`
// sub-intervals between consecutive samples.
void integrate_ode2(const std::function<double(double)>& c,
                    std::span<const double> times, double v0, double dv0,
                    std::vector<double>& v, std::vector<double>& dv,
                    int substeps = 4);

// Same propagation but renormalized so exponential growth never overflows:
// returns log|v(t_i)| (and v's sign) rather than v itself. Entries where v
// crosses zero carry sign 0.
struct LogTrajectory {
  std::vector<double> log_abs_v;
  std::vector<int> sign_v;
};
LogTrajectory integrate_ode2_log(const std::function<double(double)>& c,
                                 std::span<const double> times, double v0,
                                 double dv0, int substeps = 4);

// Trapezoid prefix sums of samples y on grid x: out[i] = sum up to x[i].
std::vector<double> trapezoid_prefix(std::span<const double> x,
                                     std::span<const double> y);

// ln Gamma wrapper used for sphere-volume normalizations.
double log_gamma(double x);

// Surface measure |S^{n-1}| / |S^{n-2}| = integral of sin^{n-2} over [0, pi].
double polar_weight_total(int n);

}  // namespace rgluer
