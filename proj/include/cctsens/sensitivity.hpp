#ifndef CCTSENS_SENSITIVITY_HPP
#define CCTSENS_SENSITIVITY_HPP

#include <Eigen/Eigenvalues>
#include <optional>
#include <string>
#include <vector>

#include "cctsens/cct.hpp"

namespace cctsens {

// Sensitivity of an equilibrium branch x_e(p) of f(x,p)=0:
//   dx_e/dp = -(df/dx)^{-1} (df/dp),   one column per parameter.
inline Mat equilibrium_sensitivity(const ParametricModel& model, const Vec& x_e,
                                   const Vec& p) {
  const Mat J = model.jac_x(x_e, p);
  Eigen::FullPivLU<Mat> lu(J);
  if (!lu.isInvertible())
    throw SingularJacobian("state Jacobian singular at the equilibrium");
  return -lu.solve(model.jac_p(x_e, p));
}

// M4: pre-fault SEP sensitivity (starting point of the fault-on trajectory).
inline Mat sep_sensitivity(const ParametricModel& pre, const Equilibrium& sep,
                           const Vec& p) {
  return equilibrium_sensitivity(pre, sep.x, p);
}

// O6: CUEP sensitivity along its one-dimensional solution branch.
inline Mat cuep_sensitivity(const ParametricModel& post, const Equilibrium& cuep,
                            const Vec& p) {
  return equilibrium_sensitivity(post, cuep.x, p);
}

// Left eigenvector of the unique eigenvalue with positive real part, unit
// length, sign fixed by a positive first nonzero component.
inline Vec unstable_left_eigenvector(const ParametricModel& model, const Vec& x_e,
                                     const Vec& p) {
  const Mat Jt = model.jac_x(x_e, p).transpose();
  Eigen::EigenSolver<Mat> es(Jt);
  if (es.info() != Eigen::Success) throw EigenFailure("eigen decomposition failed");
  int idx = -1;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i].real() > 1e-10) {
      if (idx >= 0) throw EigenFailure("more than one unstable eigenvalue");
      idx = i;
    }
  }
  if (idx < 0) throw EigenFailure("no unstable eigenvalue");
  Vec w = es.eigenvectors().col(idx).real();
  if (es.eigenvectors().col(idx).imag().norm() > 1e-9 * w.norm())
    throw EigenFailure("unstable eigenvector is not real");
  w.normalize();
  for (int i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > 1e-12) {
      if (w[i] < 0) w = -w;
      break;
    }
  }
  return w;
}

// Per-parameter ingredient bundle of the category formulas.
struct SensIngredients {
  int category = 0;
  Mat M1;       // dphi_fault/dx0 at (x_s0_pre, t_cr)
  Vec M2;       // f_fault(x_cr)
  Vec M3;       // dphi_fault/dp column
  Vec M4;       // pre-fault SEP sensitivity column
  RowVec M5;    // dH_comb/dx at x_cr             (category 1)
  double M6 = 0.0;  // -dH_comb/dp at x_cr        (category 1)
  Mat O1;       // dphi_post/dx0 at (x_cr, T)     (categories 2, 3)
  Vec O2;       // f_post(x_T)
  Vec O3;       // dphi_post/dp column
  Mat O4;       // [dH/dx ; d(Hdot)/dx] at x_T    (category 2)
  Vec O5;       // -[dH/dp ; d(Hdot)/dp] column   (category 2)
  Vec O6;       // CUEP sensitivity column        (category 3)
  Vec w;        // unstable left eigenvector      (category 3)
};

// Everything parameter-independent, assembled once per critical result and
// sliced per scalar parameter.
struct SensAssembly {
  int category = 0;
  Mat M1, M3_all, M4_all;
  Vec M2;
  RowVec M5, M6_all;
  Mat O1, O3_all, O4, O5_all, O6_all;
  Vec O2, w;
  Vec x_cr, x_T;
};

inline SensAssembly assemble_sensitivity(const Scenario& sc, const Vec& p,
                                         const CriticalResult& result,
                                         const CctOptions& opts = {}) {
  SensAssembly a;
  a.category = result.category;
  a.M4_all = sep_sensitivity(sc.pre, result.sep_pre, p);

  IntegrateOptions io = opts.integ();
  io.with_sens = true;
  const SensTrajectory ftraj =
      integrate(sc.fault, nullptr, result.sep_pre.x, p, result.t_cr, io);
  a.x_cr = ftraj.x_end();
  a.M1 = ftraj.phi_x.back();
  a.M3_all = ftraj.phi_p.back();
  a.M2 = sc.fault.f(a.x_cr, p);

  const ConstraintSet h_comb = ConstraintSet::combined(sc.h_fault, sc.h_post);
  if (result.category == 1) {
    a.M5 = h_comb.gradH_x(a.x_cr, p);
    a.M6_all = -h_comb.gradH_p(a.x_cr, p, sc.post.n_params);
    return a;
  }

  if (!result.T || !result.x_T)
    throw Ambiguous("critical result carries no boundary anchor");
  const SensTrajectory ptraj = integrate(sc.post, nullptr, a.x_cr, p, *result.T, io);
  a.x_T = ptraj.x_end();
  a.O1 = ptraj.phi_x.back();
  a.O3_all = ptraj.phi_p.back();
  a.O2 = sc.post.f(a.x_T, p);

  if (result.category == 2) {
    if (std::abs(sc.h_post.H(*result.x_T, p)) > opts.anchor_h_tol ||
        std::abs(sc.h_post.Hdot(sc.post, *result.x_T, p)) > opts.anchor_h_tol)
      throw NonTransversal("grazing anchor residuals exceed tolerance");
    a.O4.resize(2, sc.post.dim);
    a.O4.row(0) = sc.h_post.gradH_x(a.x_T, p);
    a.O4.row(1) = sc.h_post.gradHdot_x(sc.post, a.x_T, p);
    a.O5_all.resize(2, sc.post.n_params);
    a.O5_all.row(0) = -sc.h_post.gradH_p(a.x_T, p, sc.post.n_params);
    a.O5_all.row(1) = -sc.h_post.gradHdot_p(sc.post, a.x_T, p);
    return a;
  }

  if (result.category != 3 || !result.cuep)
    throw Ambiguous("unexpected category in sensitivity assembly");
  if (!result.cuep->is_type1_uep())
    throw CuepNotType1("anchored equilibrium is not a type-1 UEP");
  a.O6_all = cuep_sensitivity(sc.post, *result.cuep, p);
  a.w = unstable_left_eigenvector(sc.post, result.cuep->x, p);
  return a;
}

inline SensIngredients slice_ingredients(const SensAssembly& a, int param_index) {
  SensIngredients g;
  g.category = a.category;
  g.M1 = a.M1;
  g.M2 = a.M2;
  g.M3 = a.M3_all.col(param_index);
  g.M4 = a.M4_all.col(param_index);
  if (a.category == 1) {
    g.M5 = a.M5;
    g.M6 = a.M6_all[param_index];
  } else {
    g.O1 = a.O1;
    g.O2 = a.O2;
    g.O3 = a.O3_all.col(param_index);
    if (a.category == 2) {
      g.O4 = a.O4;
      g.O5 = a.O5_all.col(param_index);
    } else {
      g.O6 = a.O6_all.col(param_index);
      g.w = a.w;
    }
  }
  return g;
}

inline SensIngredients compute_ingredients(const Scenario& sc, const Vec& p,
                                           const CriticalResult& result, int param_index,
                                           const CctOptions& opts = {}) {
  return slice_ingredients(assemble_sensitivity(sc, p, result, opts), param_index);
}

// dt_cl/dp = (M5 M2)^{-1} (M6 - M5 (M1 M4 + M3))
inline double category1_sensitivity(const SensIngredients& g,
                                    double* denominator = nullptr) {
  const double denom = g.M5.dot(g.M2);
  if (denominator) *denominator = std::abs(denom);
  if (std::abs(denom) <= 1e-10)
    throw NonTransversal("fault trajectory tangent to the combined boundary");
  return (g.M6 - g.M5.dot(g.M1 * g.M4 + g.M3)) / denom;
}

// Solves the 2x2 grazing system; first component is the CCT sensitivity,
// second the end-time sensitivity.
inline std::pair<double, double> category2_sensitivity(const SensIngredients& g,
                                                       double* denominator = nullptr) {
  Mat A(2, 2);
  A.col(0) = g.O4 * (g.O1 * g.M2);
  A.col(1) = g.O4 * g.O2;
  const double det = A.determinant();
  if (denominator) *denominator = std::abs(det);
  if (std::abs(det) <= 1e-10)
    throw NonTransversal("degenerate graze geometry (near-singular 2x2 system)");
  const Vec rhs = g.O5 - g.O4 * (g.O1 * (g.M1 * g.M4 + g.M3) + g.O3);
  const Vec sol = A.lu().solve(rhs);
  return {sol[0], sol[1]};
}

// dt_cl/dp = w (O6 - O3 - O1 (M1 M4 + M3)) / (w O1 M2)
inline double category3_sensitivity(const SensIngredients& g,
                                    double* denominator = nullptr) {
  const double denom = g.w.dot(g.O1 * g.M2);
  if (denominator) *denominator = std::abs(denom);
  if (std::abs(denom) <= 1e-10)
    throw NonTransversal("fault trajectory tangent to the CUEP stable manifold");
  return g.w.dot(g.O6 - g.O3 - g.O1 * (g.M1 * g.M4 + g.M3)) / denom;
}

inline double dispatch_sensitivity(const SensIngredients& g, double* denominator = nullptr) {
  switch (g.category) {
    case 1: return category1_sensitivity(g, denominator);
    case 2: return category2_sensitivity(g, denominator).first;
    case 3: return category3_sensitivity(g, denominator);
    default: throw Ambiguous("ingredients carry no category");
  }
}

struct ParamSensitivity {
  std::string param;
  int category = 0;
  double dtcr_dp = 0.0;
  double denominator = 0.0;
  std::optional<std::string> error;  // NonTransversal at mode transitions
};

struct SensitivityReport {
  int category = 0;
  std::vector<ParamSensitivity> entries;
};

// Scalar-parameter loop over the shared assembly.
inline SensitivityReport compute_sensitivities(const Scenario& sc, const Vec& p,
                                               const CriticalResult& result,
                                               const CctOptions& opts = {}) {
  const SensAssembly a = assemble_sensitivity(sc, p, result, opts);
  SensitivityReport report;
  report.category = a.category;
  for (int k = 0; k < sc.pre.n_params; ++k) {
    ParamSensitivity e;
    e.param = sc.param_names[k];
    e.category = a.category;
    try {
      e.dtcr_dp = dispatch_sensitivity(slice_ingredients(a, k), &e.denominator);
    } catch (const Error& err) {
      e.error = err.name();
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace cctsens

#endif  // CCTSENS_SENSITIVITY_HPP
