#ifndef CCTSENS_MULTIMACHINE_HPP
#define CCTSENS_MULTIMACHINE_HPP

#include <cmath>
#include <numbers>

#include "cctsens/scenario.hpp"

namespace cctsens {

// Classical multi-machine model on a network reduced to the internal
// generator buses,
//   delta_i_dot = omega_i
//   M_i omega_i_dot = Pm_i - Pe_i(delta) - D_i omega_i ,
//   Pe_i = sum_j E_i E_j (G_ij cos(delta_i - delta_j) + B_ij sin(delta_i - delta_j))
// with uniform damping D_i / M_i. Angles and speeds are expressed relative
// to the last machine so that equilibria are isolated; the state is
// (delta_1r .. delta_{m-1}r, omega_1r .. omega_{m-1}r), dim 2(m-1).
// Parameter vector p = [Pm_1 .. Pm_m].
struct MachineDataset {
  int m = 0;       // machine count
  Vec M;           // inertias
  Vec Pm;          // mechanical powers (base values of p)
  Vec E;           // internal voltages
  Mat G_pre, B_pre, G_fault, B_fault, G_post, B_post;  // reduced admittances
  double d_over_m = 4.0;
  double angle_limit = std::numbers::pi / 2;  // h = limit - (delta_a - delta_b)
  int pair_a = 0, pair_b = 1;
  double t_max = 20.0;
  Vec delta_guess;  // absolute angle guess, reference machine entry ignored
};

namespace detail {

// Electrical power at machine i for absolute angles.
inline double electrical_power(const Vec& E, const Mat& G, const Mat& B, const Vec& dabs,
                               int i) {
  double pe = 0.0;
  for (int j = 0; j < E.size(); ++j) {
    const double dij = dabs[i] - dabs[j];
    pe += E[i] * E[j] * (G(i, j) * std::cos(dij) + B(i, j) * std::sin(dij));
  }
  return pe;
}

// dPe_i / ddelta_j (absolute angles).
inline double electrical_power_ddelta(const Vec& E, const Mat& G, const Mat& B,
                                      const Vec& dabs, int i, int j) {
  if (i == j) {
    double s = 0.0;
    for (int k = 0; k < E.size(); ++k) {
      if (k == i) continue;
      const double dik = dabs[i] - dabs[k];
      s += E[i] * E[k] * (-G(i, k) * std::sin(dik) + B(i, k) * std::cos(dik));
    }
    return s;
  }
  const double dij = dabs[i] - dabs[j];
  return E[i] * E[j] * (G(i, j) * std::sin(dij) - B(i, j) * std::cos(dij));
}

inline ParametricModel multimachine_topology(const std::string& name,
                                             const MachineDataset& ds, const Mat& G,
                                             const Mat& B) {
  const int m = ds.m;
  const int nrel = m - 1;
  const Vec E = ds.E;
  const Vec M = ds.M;
  const double lam = ds.d_over_m;

  auto absolute_angles = [nrel](const Vec& x) {
    Vec dabs = Vec::Zero(nrel + 1);
    dabs.head(nrel) = x.head(nrel);
    return dabs;  // reference angle fixed at 0
  };

  ParametricModel model;
  model.name = name;
  model.dim = 2 * nrel;
  model.n_params = m;
  model.f = [=](const Vec& x, const Vec& p) {
    const Vec dabs = absolute_angles(x);
    const double accel_ref = (p[m - 1] - electrical_power(E, G, B, dabs, m - 1)) / M[m - 1];
    Vec dx(2 * nrel);
    for (int i = 0; i < nrel; ++i) {
      dx[i] = x[nrel + i];
      const double accel_i = (p[i] - electrical_power(E, G, B, dabs, i)) / M[i];
      dx[nrel + i] = accel_i - accel_ref - lam * x[nrel + i];
    }
    return dx;
  };
  model.jac_x = [=](const Vec& x, const Vec&) {
    const Vec dabs = absolute_angles(x);
    Mat J = Mat::Zero(2 * nrel, 2 * nrel);
    for (int i = 0; i < nrel; ++i) {
      J(i, nrel + i) = 1.0;
      for (int j = 0; j < nrel; ++j) {
        J(nrel + i, j) = -electrical_power_ddelta(E, G, B, dabs, i, j) / M[i] +
                         electrical_power_ddelta(E, G, B, dabs, m - 1, j) / M[m - 1];
      }
      J(nrel + i, nrel + i) -= lam;
    }
    return J;
  };
  model.jac_p = [=](const Vec&, const Vec&) {
    Mat J = Mat::Zero(2 * nrel, m);
    for (int i = 0; i < nrel; ++i) {
      J(nrel + i, i) = 1.0 / M[i];
      J(nrel + i, m - 1) = -1.0 / M[m - 1];
    }
    return J;
  };
  return model;
}

inline ConstraintSet multimachine_constraints(const MachineDataset& ds) {
  const int nrel = ds.m - 1;
  Vec a = Vec::Zero(2 * nrel);
  if (ds.pair_a < nrel) a[ds.pair_a] -= 1.0;
  if (ds.pair_b < nrel) a[ds.pair_b] += 1.0;
  ConstraintSet h;
  h.add(linear_constraint("angle_pair_limit", ds.angle_limit, a, Vec::Zero(ds.m)));
  return h;
}

inline void check_dataset(const MachineDataset& ds) {
  if (ds.m < 2) throw InvalidParameter("at least two machines required");
  auto check_len = [&](const Vec& v, const char* what) {
    if (v.size() != ds.m) throw DimensionMismatch(std::string(what) + " length != machine count");
  };
  check_len(ds.M, "M");
  check_len(ds.Pm, "Pm");
  check_len(ds.E, "E");
  auto check_mat = [&](const Mat& A, const char* what) {
    if (A.rows() != ds.m || A.cols() != ds.m)
      throw DimensionMismatch(std::string(what) + " is not m x m");
  };
  check_mat(ds.G_pre, "G_pre");
  check_mat(ds.B_pre, "B_pre");
  check_mat(ds.G_fault, "G_fault");
  check_mat(ds.B_fault, "B_fault");
  check_mat(ds.G_post, "G_post");
  check_mat(ds.B_post, "B_post");
  if ((ds.M.array() <= 0.0).any()) throw InvalidParameter("inertias must be positive");
  if (ds.d_over_m <= 0.0) throw InvalidParameter("D/M must be positive");
  if (ds.pair_a < 0 || ds.pair_b < 0 || ds.pair_a >= ds.m || ds.pair_b >= ds.m ||
      ds.pair_a == ds.pair_b)
    throw InvalidParameter("invalid constrained machine pair");
}

}  // namespace detail

inline Scenario multimachine_model(const MachineDataset& ds) {
  detail::check_dataset(ds);
  const int nrel = ds.m - 1;

  Scenario sc;
  sc.name = "multimachine";
  sc.pre = detail::multimachine_topology("mm-pre", ds, ds.G_pre, ds.B_pre);
  sc.fault = detail::multimachine_topology("mm-fault", ds, ds.G_fault, ds.B_fault);
  sc.post = detail::multimachine_topology("mm-post", ds, ds.G_post, ds.B_post);
  sc.h_fault = detail::multimachine_constraints(ds);
  sc.h_post = detail::multimachine_constraints(ds);
  sc.p0 = ds.Pm;
  for (int i = 0; i < ds.m; ++i) sc.param_names.push_back("Pm" + std::to_string(i + 1));
  sc.t_max = ds.t_max;

  sc.x_guess = Vec::Zero(2 * nrel);
  if (ds.delta_guess.size() == ds.m) {
    for (int i = 0; i < nrel; ++i)
      sc.x_guess[i] = ds.delta_guess[i] - ds.delta_guess[ds.m - 1];
  }
  sc.box_lo = Vec::Zero(2 * nrel);
  sc.box_hi = Vec::Zero(2 * nrel);
  for (int i = 0; i < nrel; ++i) {
    sc.box_lo[i] = -std::numbers::pi;
    sc.box_hi[i] = std::numbers::pi;
    sc.box_lo[nrel + i] = -5.0;
    sc.box_hi[nrel + i] = 5.0;
  }

  validate_scenario(sc);
  return sc;
}

}  // namespace cctsens

#endif  // CCTSENS_MULTIMACHINE_HPP
