#include "rgluer/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "rgluer/numerics.hpp"

namespace rgluer {

namespace {

// log cosh without overflow: |x| + log1p(e^{-2|x|}) - log 2.
double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace

CatenoidProfile::CatenoidProfile(int n) : n_(n) {
  if (n < 3) throw std::invalid_argument("CatenoidProfile: requires n >= 3");
  // Cumulative psi on a uniform cache out to where the integrand has
  // decayed below 1e-19 for every n >= 3.
  const double t_hi = 44.0;
  const int cells = static_cast<int>(std::ceil(t_hi / cache_dt_));
  psi_cache_.assign(cells + 1, 0.0);
  auto f = [this](double t) { return phi_pow(t, 2.0 - n_); };
  for (int k = 1; k <= cells; ++k)
    psi_cache_[k] =
        psi_cache_[k - 1] + integrate(f, (k - 1) * cache_dt_, k * cache_dt_);
  // Tail from the asymptotic phi^{2-n} ~ 2^{(n-2)/(n-1)} e^{-(n-2)t}.
  const double tail = std::exp((n_ - 2.0) / (n_ - 1.0) * std::log(2.0) -
                               (n_ - 2.0) * cells * cache_dt_) /
                      (n_ - 2.0);
  d0_ = psi_cache_.back() + tail;
}

double CatenoidProfile::log_phi(double t) const {
  return log_cosh((n_ - 1) * t) / (n_ - 1);
}

double CatenoidProfile::phi(double t) const { return std::exp(log_phi(t)); }

double CatenoidProfile::phi_pow(double t, double p) const {
  return std::exp(p * log_phi(t));
}

double CatenoidProfile::dphi(double t) const {
  // sinh((n-1)t) phi^{2-n} = sign(t) exp(log sinh((n-1)|t|)) phi^{2-n}
  if (t == 0.0) return 0.0;
  const double a = std::fabs((n_ - 1) * t);
  const double log_sinh = a + std::log1p(-std::exp(-2.0 * a)) - std::log(2.0);
  const double v = std::exp(log_sinh + (2.0 - n_) * log_phi(t));
  return t > 0 ? v : -v;
}

double CatenoidProfile::ddphi(double t) const {
  return phi(t) + (n_ - 2) * phi_pow(t, 3.0 - 2.0 * n_);
}

double CatenoidProfile::psi(double t) const {
  const double a = std::fabs(t);
  const double sign = (t >= 0) ? 1.0 : -1.0;
  const double span = cache_dt_ * (static_cast<double>(psi_cache_.size()) - 1);
  if (a >= span) {
    const double tail = std::exp((n_ - 2.0) / (n_ - 1.0) * std::log(2.0) -
                                 (n_ - 2.0) * a) /
                        (n_ - 2.0);
    return sign * (d0_ - tail);
  }
  const auto k = static_cast<size_t>(a / cache_dt_);
  auto f = [this](double s) { return phi_pow(s, 2.0 - n_); };
  return sign * (psi_cache_[k] + integrate(f, k * cache_dt_, a));
}

ScaleParameters compute_scales(const CatenoidProfile& prof, double eps) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("compute_scales: eps must be in (0, 1)");
  const int n = prof.dimension();
  // Solve (n-1) log phi(t) = -n/(3n-2) log eps by bisection.
  const double target = -(static_cast<double>(n) / (3.0 * n - 2.0)) *
                        std::log(eps);
  auto g = [&](double t) { return (n - 1) * prof.log_phi(t) - target; };
  double hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  ScaleParameters s;
  s.eps = eps;
  s.t_eps = bisect(g, 0.0, hi, 0.0, 1e-14);
  s.r_eps = std::exp(std::log(eps) / (n - 1) + prof.log_phi(s.t_eps));
  return s;
}

double CutoffSpec::operator()(double t) const {
  const double a = std::fabs(t);
  if (a >= t_zero) return 0.0;
  const double start = t_zero - width;
  if (a <= start) return 1.0;
  return 1.0 - smoothstep_quintic((a - start) / width);
}

CutoffSpec make_cutoff(const CatenoidProfile& prof, const ScaleParameters& s) {
  // Radius 0.8 r_eps in unit scale is phi = 0.8 phi(t_eps).
  const double log_target = std::log(0.8) + prof.log_phi(s.t_eps);
  auto g = [&](double t) { return prof.log_phi(t) - log_target; };
  const double tau = bisect(g, 0.0, s.t_eps, 0.0, 1e-13);
  CutoffSpec chi;
  chi.t_zero = std::max(std::min(s.t_eps - 0.5, tau), 0.5 * s.t_eps);
  chi.width = std::min(1.0, 0.4 * chi.t_zero);
  return chi;
}

ImmersionAmplitudes immerse_amplitudes(const CatenoidProfile& prof,
                                       const CutoffSpec& chi, double t,
                                       double w) {
  const int n = prof.dimension();
  const double c = chi(t);
  const double amp = prof.phi_pow(t, (2.0 - n) / 2.0) * w;
  ImmersionAmplitudes a;
  // Normal = (-phi^{1-n} z, dphi/phi); blended transverse direction is
  // chi*normal + sign(t)*(1-chi)*e_{n+1}.  The sign keeps the blend aligned
  // with the normal's vertical component on both halves; without it the
  // direction degenerates on the lower ramp.
  a.radial = prof.phi(t) - c * prof.phi_pow(t, 1.0 - n) * amp;
  const double vertical = t < 0.0 ? -(1.0 - c) : (1.0 - c);
  a.height = prof.psi(t) +
             amp * (c * prof.dphi(t) / prof.phi(t) + vertical);
  return a;
}

int jacobi_mode(JacobiFamily family) {
  switch (family) {
    case JacobiFamily::kVerticalTranslation:
    case JacobiFamily::kDilation:
      return 0;
    case JacobiFamily::kHorizontalTranslation:
    case JacobiFamily::kRotation:
      return 1;
  }
  throw std::invalid_argument("jacobi_mode: unknown family");
}

double jacobi_amplitude(const CatenoidProfile& prof, JacobiFamily family,
                        double t) {
  const int n = prof.dimension();
  switch (family) {
    case JacobiFamily::kVerticalTranslation:
      return prof.phi_pow(t, (n - 4.0) / 2.0) * prof.dphi(t);
    case JacobiFamily::kDilation:
      return prof.phi_pow(t, (n - 4.0) / 2.0) *
             (prof.phi(t) * prof.dpsi(t) - prof.psi(t) * prof.dphi(t));
    case JacobiFamily::kHorizontalTranslation:
      return prof.phi_pow(t, -n / 2.0);
    case JacobiFamily::kRotation:
      return prof.phi_pow(t, (n - 4.0) / 2.0) *
             (prof.psi(t) * prof.dpsi(t) + prof.phi(t) * prof.dphi(t));
  }
  throw std::invalid_argument("jacobi_amplitude: unknown family");
}

double jacobi_amplitude_dt(const CatenoidProfile& prof, JacobiFamily family,
                           double t) {
  const int n = prof.dimension();
  const double phi = prof.phi(t);
  const double dphi = prof.dphi(t);
  const double ddphi = prof.ddphi(t);
  const double psi = prof.psi(t);
  const double dpsi = prof.dpsi(t);
  const double ddpsi = (2.0 - n) * prof.phi_pow(t, 1.0 - n) * dphi;
  const double half = (n - 4.0) / 2.0;
  switch (family) {
    case JacobiFamily::kVerticalTranslation:
      return half * prof.phi_pow(t, half - 1.0) * dphi * dphi +
             prof.phi_pow(t, half) * ddphi;
    case JacobiFamily::kDilation:
      return half * prof.phi_pow(t, half - 1.0) * dphi *
                 (phi * dpsi - psi * dphi) +
             prof.phi_pow(t, half) * (phi * ddpsi - psi * ddphi);
    case JacobiFamily::kHorizontalTranslation:
      return -(n / 2.0) * prof.phi_pow(t, -n / 2.0 - 1.0) * dphi;
    case JacobiFamily::kRotation:
      return half * prof.phi_pow(t, half - 1.0) * dphi *
                 (psi * dpsi + phi * dphi) +
             prof.phi_pow(t, half) *
                 (dpsi * dpsi + psi * ddpsi + dphi * dphi + phi * ddphi);
  }
  throw std::invalid_argument("jacobi_amplitude_dt: unknown family");
}

}  // namespace rgluer
