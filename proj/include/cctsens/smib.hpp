#ifndef CCTSENS_SMIB_HPP
#define CCTSENS_SMIB_HPP

#include <cmath>

#include "cctsens/scenario.hpp"

namespace cctsens {

// Single-machine infinite-bus swing dynamics
//   delta_dot = omega
//   M omega_dot = Pm - (EV/X) sin(delta) - D omega
// with parameter vector p = [Pm, M, delta_max, omega_max] and constraints
//   h = [delta_max - delta, omega_max - omega]
// from the out-of-step relay and an over-frequency ride-through limit.
// The fault is on the infinite bus (EV/X drops to zero) and is cleared
// without a topology change.
struct SmibParams {
  double Pm = 0.6;
  double M = 0.25;
  double delta_max = 2.4434;
  double omega_max = 1.0;
  double D = 0.5;
  double evx_pre = 1.0;
  double evx_fault = 0.0;
  double evx_post = 1.0;
  double t_max = 10.0;
};

namespace detail {

inline ParametricModel smib_topology(const std::string& name, double evx, double D) {
  ParametricModel m;
  m.name = name;
  m.dim = 2;
  m.n_params = 4;
  m.f = [evx, D](const Vec& x, const Vec& p) {
    Vec dx(2);
    dx[0] = x[1];
    dx[1] = (p[0] - evx * std::sin(x[0]) - D * x[1]) / p[1];
    return dx;
  };
  m.jac_x = [evx, D](const Vec& x, const Vec& p) {
    Mat J(2, 2);
    J << 0.0, 1.0, -evx * std::cos(x[0]) / p[1], -D / p[1];
    return J;
  };
  m.jac_p = [evx, D](const Vec& x, const Vec& p) {
    Mat J = Mat::Zero(2, 4);
    J(1, 0) = 1.0 / p[1];
    J(1, 1) = -(p[0] - evx * std::sin(x[0]) - D * x[1]) / (p[1] * p[1]);
    return J;
  };
  return m;
}

inline ConstraintSet smib_constraints() {
  ConstraintSet h;
  // delta_max - delta > 0 ; parameter slot 2
  h.add(linear_constraint("angle_limit", 0.0, (Vec(2) << -1, 0).finished(),
                          (Vec(4) << 0, 0, 1, 0).finished()));
  // omega_max - omega > 0 ; parameter slot 3
  h.add(linear_constraint("speed_limit", 0.0, (Vec(2) << 0, -1).finished(),
                          (Vec(4) << 0, 0, 0, 1).finished()));
  return h;
}

}  // namespace detail

inline Scenario smib_model(const SmibParams& sp = SmibParams{}) {
  if (sp.M <= 0.0) throw InvalidParameter("SMIB inertia M must be positive");
  if (sp.delta_max <= 0.0) throw InvalidParameter("delta_max must be positive");
  if (sp.omega_max <= 0.0) throw InvalidParameter("omega_max must be positive");

  Scenario sc;
  sc.name = "smib";
  sc.pre = detail::smib_topology("smib-pre", sp.evx_pre, sp.D);
  sc.fault = detail::smib_topology("smib-fault", sp.evx_fault, sp.D);
  sc.post = detail::smib_topology("smib-post", sp.evx_post, sp.D);
  sc.h_fault = detail::smib_constraints();
  sc.h_post = detail::smib_constraints();
  sc.p0 = (Vec(4) << sp.Pm, sp.M, sp.delta_max, sp.omega_max).finished();
  sc.param_names = {"Pm", "M", "delta_max", "omega_max"};
  sc.t_max = sp.t_max;

  const double s = std::clamp(sp.Pm / sp.evx_post, -1.0, 1.0);
  sc.x_guess = (Vec(2) << std::asin(s), 0.0).finished();
  sc.box_lo = (Vec(2) << -1.5, -(sp.omega_max + 2.0)).finished();
  sc.box_hi = (Vec(2) << sp.delta_max + 1.5, sp.omega_max + 2.0).finished();

  validate_scenario(sc);
  return sc;
}

}  // namespace cctsens

#endif  // CCTSENS_SMIB_HPP
