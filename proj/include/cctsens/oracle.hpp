#ifndef CCTSENS_ORACLE_HPP
#define CCTSENS_ORACLE_HPP

#include <cmath>

#include "cctsens/cct.hpp"

namespace cctsens {

struct FdSpec {
  double delta = 1e-3;    // relative perturbation, scaled by max(1, |p|)
  double cct_tol = 1e-4;  // bisection bracket tolerance for the oracle runs
};

// Brute-force central-difference CCT sensitivity. Never shares a code path
// with the formula module beyond the models themselves.
inline double fd_cct_sensitivity(const Scenario& sc, const Vec& p0, int param_index,
                                 const FdSpec& spec = {}, const CctOptions& base = {}) {
  if (spec.delta <= 0.0) throw InvalidParameter("FD perturbation must be positive");
  if (spec.cct_tol >= 0.01) throw InvalidParameter("oracle tolerance must beat 0.01 s");
  const double dp = spec.delta * std::max(1.0, std::abs(p0[param_index]));
  CctOptions opts = base;
  opts.bracket_tol = spec.cct_tol;

  Vec p_hi = p0, p_lo = p0;
  p_hi[param_index] += dp;
  p_lo[param_index] -= dp;
  const CriticalResult hi = find_cct(sc, p_hi, opts);
  const CriticalResult lo = find_cct(sc, p_lo, opts);
  if (hi.category != lo.category)
    throw CategoryChanged("perturbed runs straddle a mode transition");
  return (hi.t_cr - lo.t_cr) / (2.0 * dp);
}

// Closed-form SMIB fault-on solution (EV/X = 0):
//   omega(t) = (Pm/D)(1 - e^{-Dt/M})
//   delta(t) = delta0 + (Pm/D) t - (Pm M / D^2)(1 - e^{-Dt/M})
// with analytic Pm and M partials.
struct FaultOnClosedForm {
  double delta, omega;
  double ddelta_dPm, domega_dPm;
  double ddelta_dM, domega_dM;
};

inline FaultOnClosedForm closed_form_faulton(double Pm, double M, double D, double delta0,
                                             double t) {
  if (D <= 0.0 || M <= 0.0) throw InvalidParameter("D and M must be positive");
  const double E = std::exp(-D * t / M);
  FaultOnClosedForm r;
  r.omega = (Pm / D) * (1.0 - E);
  r.delta = delta0 + (Pm / D) * t - (Pm * M / (D * D)) * (1.0 - E);
  r.domega_dPm = (1.0 - E) / D;
  r.ddelta_dPm = t / D - (M / (D * D)) * (1.0 - E);
  r.domega_dM = -(Pm * t / (M * M)) * E;
  r.ddelta_dM = -(Pm / (D * D)) * (1.0 - E) + (Pm * t / (D * M)) * E;
  return r;
}

}  // namespace cctsens

#endif  // CCTSENS_ORACLE_HPP
