#pragma once

#include <vector>

namespace rgluer {

// Profile of the unit n-catenoid: phi(t) = cosh((n-1)t)^{1/(n-1)},
// psi(t) = int_0^t phi^{2-n}. All closed forms are evaluated through
// log(cosh) so large |t| cannot overflow.
class CatenoidProfile {
 public:
  explicit CatenoidProfile(int n);

  int dimension() const { return n_; }

  double log_phi(double t) const;
  double phi(double t) const;
  double phi_pow(double t, double p) const;  // phi(t)^p, stable for any p
  double dphi(double t) const;               // sinh((n-1)t) phi^{2-n}
  double ddphi(double t) const;              // phi + (n-2) phi^{3-2n}
  double psi(double t) const;                // odd in t
  double dpsi(double t) const { return phi_pow(t, 2.0 - n_); }
  double d0() const { return d0_; }          // lim_{t->inf} psi

 private:
  int n_;
  double d0_ = 0;
  double cache_dt_ = 0.25;
  std::vector<double> psi_cache_;  // psi(k * cache_dt_), k >= 0
};

// Neck scales: phi^{n-1}(t_eps) = eps^{-n/(3n-2)}, r_eps = eps^{1/(n-1)} phi(t_eps).
struct ScaleParameters {
  double eps = 0;
  double t_eps = 0;
  double r_eps = 0;
};
ScaleParameters compute_scales(const CatenoidProfile& prof, double eps);

// Blend between the catenoid normal (chi = 1, core) and the vertical
// direction (chi = 0, boundary collar). chi = 0 for |t| >= t_zero with a
// quintic-smoothstep ramp of the given width below it.
struct CutoffSpec {
  double t_zero = 0;
  double width = 1;
  double operator()(double t) const;
};
// t_zero = min(t_eps - 1/2, radius reaching 0.8 r_eps), floored at t_eps/2;
// keeps the perturbation vertical on the whole extraction annulus while the
// transition never crosses the waist.
CutoffSpec make_cutoff(const CatenoidProfile& prof, const ScaleParameters& s);

// Unit-scale generating amplitudes of the perturbed immersion
//   X_w = X_0 + phi^{(2-n)/2} w [chi nu + (1-chi) e_{n+1}] :
// the point at cross-section angle theta sits at
//   radial * (cos theta, sin theta-direction) + height * e_{n+1}.
// The normal's horizontal part is parallel to the cross-section direction,
// so radial does not depend on theta except through w.
struct ImmersionAmplitudes {
  double radial = 0;
  double height = 0;
};
ImmersionAmplitudes immerse_amplitudes(const CatenoidProfile& prof,
                                       const CutoffSpec& chi, double t,
                                       double w);

// Conjugated amplitudes of the four geometric Jacobi fields. Mode 0:
// vertical translation (odd), dilation (even, value 1 at t = 0); mode 1:
// horizontal translation (decays both ends), rotation (grows both ends).
enum class JacobiFamily {
  kVerticalTranslation,
  kDilation,
  kHorizontalTranslation,
  kRotation,
};
int jacobi_mode(JacobiFamily family);
double jacobi_amplitude(const CatenoidProfile& prof, JacobiFamily family,
                        double t);
double jacobi_amplitude_dt(const CatenoidProfile& prof, JacobiFamily family,
                           double t);

}  // namespace rgluer
