#ifndef CCTSENS_EQUILIBRIUM_HPP
#define CCTSENS_EQUILIBRIUM_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <vector>

#include "cctsens/model.hpp"

namespace cctsens {

enum class EquilibriumKind { Sep, Uep, Degenerate };

struct Equilibrium {
  Vec x;
  EquilibriumKind kind = EquilibriumKind::Degenerate;
  int uep_type = 0;  // number of eigenvalues with positive real part
  std::vector<std::complex<double>> eigenvalues;

  bool is_sep() const { return kind == EquilibriumKind::Sep; }
  bool is_type1_uep() const { return kind == EquilibriumKind::Uep && uep_type == 1; }
};

namespace detail {

inline Equilibrium classify_equilibrium(const ParametricModel& model, const Vec& x,
                                        const Vec& p) {
  Equilibrium eq;
  eq.x = x;
  Eigen::EigenSolver<Mat> es(model.jac_x(x, p));
  if (es.info() != Eigen::Success)
    throw EigenFailure("eigen decomposition failed at equilibrium");
  int n_pos = 0, n_zero = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    eq.eigenvalues.push_back(lam);
    if (std::abs(lam.real()) <= 1e-8)
      ++n_zero;
    else if (lam.real() > 0)
      ++n_pos;
  }
  if (n_zero > 0) {
    eq.kind = EquilibriumKind::Degenerate;
  } else if (n_pos == 0) {
    eq.kind = EquilibriumKind::Sep;
  } else {
    eq.kind = EquilibriumKind::Uep;
    eq.uep_type = n_pos;
  }
  return eq;
}

}  // namespace detail

// Newton solve of f(x,p) = 0 from x_guess; ||f||_inf <= 1e-10, at most 50
// iterations.
inline Equilibrium find_equilibrium(const ParametricModel& model, const Vec& p,
                                    const Vec& x_guess, double tol = 1e-10,
                                    int max_iter = 50) {
  Vec x = x_guess;
  for (int it = 0; it < max_iter; ++it) {
    const Vec fx = model.f(x, p);
    if (!fx.allFinite()) throw NoConvergence("nonfinite residual in Newton iteration");
    if (fx.lpNorm<Eigen::Infinity>() <= tol)
      return detail::classify_equilibrium(model, x, p);
    const Mat J = model.jac_x(x, p);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e12)
      throw SingularJacobian("Jacobian condition estimate exceeds 1e12");
    x -= svd.solve(fx);
  }
  throw NoConvergence("Newton iteration cap (50) reached");
}

enum class BoundaryClass { Stable, Unstable, SemiSaddle, BadSet };

struct PseudoEpClass {
  Vec point;
  BoundaryClass cls = BoundaryClass::BadSet;
  double Hdot = 0.0;
};

// Classify a point on the feasibility boundary {H = 0} as a pseudo EP of
// the time-scaled system H*f. The single nonzero eigenvalue of the
// linearization equals Hdot, so the class depends only on its sign; the
// tangential case splits into semi-saddle (grad H != 0, Hddot != 0) and
// bad-set points.
inline PseudoEpClass classify_boundary_point(const ConstraintSet& h,
                                             const ParametricModel& model, const Vec& x,
                                             const Vec& p, double zero_tol = 1e-8) {
  if (std::abs(h.H(x, p)) > zero_tol)
    throw NotOnBoundary("|H(x,p)| exceeds boundary tolerance");
  PseudoEpClass out;
  out.point = x;
  out.Hdot = h.Hdot(model, x, p);
  if (out.Hdot < -zero_tol) {
    out.cls = BoundaryClass::Stable;
  } else if (out.Hdot > zero_tol) {
    out.cls = BoundaryClass::Unstable;
  } else {
    const double grad_norm = h.gradH_x(x, p).norm();
    const double hddot = h.Hddot(model, x, p);
    out.cls = (grad_norm > zero_tol && std::abs(hddot) > zero_tol)
                  ? BoundaryClass::SemiSaddle
                  : BoundaryClass::BadSet;
  }
  return out;
}

}  // namespace cctsens

#endif  // CCTSENS_EQUILIBRIUM_HPP
