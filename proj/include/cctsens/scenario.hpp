#ifndef CCTSENS_SCENARIO_HPP
#define CCTSENS_SCENARIO_HPP

#include <cmath>
#include <string>
#include <vector>

#include "cctsens/equilibrium.hpp"
#include "cctsens/model.hpp"

namespace cctsens {

// Pre-fault / fault-on / post-fault model triple plus the constraint sets
// active during the fault-on and post-fault phases.
struct Scenario {
  std::string name;
  ParametricModel pre;
  ParametricModel fault;
  ParametricModel post;
  ConstraintSet h_fault;
  ConstraintSet h_post;
  Vec p0;
  std::vector<std::string> param_names;
  double t_max = 10.0;

  Vec x_guess;         // Newton seed for the pre-fault SEP
  Vec box_lo, box_hi;  // state window for validation seeding and CSR defaults

  int param_index(const std::string& pname) const {
    for (size_t i = 0; i < param_names.size(); ++i)
      if (param_names[i] == pname) return static_cast<int>(i);
    throw InvalidParameter("unknown parameter name: " + pname);
  }
};

namespace detail {

inline void boundary_seed_grid(const Scenario& sc, const Constraint& c, const Vec& p,
                               std::vector<Vec>& seeds) {
  const int n = sc.post.dim;
  const int per_dim = (n <= 2) ? 9 : 3;
  std::vector<int> idx(n, 0);
  const int total = static_cast<int>(std::pow(per_dim, n));
  for (int cell = 0; cell < total; ++cell) {
    int rem = cell;
    Vec x(n);
    for (int d = 0; d < n; ++d) {
      const int i = rem % per_dim;
      rem /= per_dim;
      x[d] = sc.box_lo[d] + (sc.box_hi[d] - sc.box_lo[d]) * i / (per_dim - 1);
    }
    // project onto {h_k = 0} along the constraint gradient
    bool ok = true;
    for (int it = 0; it < 8; ++it) {
      const double hv = c.h(x, p);
      const RowVec g = c.grad_x(x, p);
      const double gn2 = g.squaredNorm();
      if (gn2 < 1e-16) { ok = false; break; }
      x -= g.transpose() * (hv / gn2);
      if (std::abs(c.h(x, p)) < 1e-12) break;
    }
    if (ok && std::abs(c.h(x, p)) < 1e-9) seeds.push_back(x);
  }
}

}  // namespace detail

// Assumption A1 as a runtime check: no equilibrium of the post-fault system
// may lie on the post-fault feasibility boundary. Equilibria are hunted by
// Newton refinement from seeds projected onto each constraint's boundary.
inline void validate_scenario(const Scenario& sc) {
  if (sc.pre.dim != sc.fault.dim || sc.pre.dim != sc.post.dim)
    throw DimensionMismatch("pre/fault/post state dimensions differ");
  if (sc.pre.n_params != sc.fault.n_params || sc.pre.n_params != sc.post.n_params)
    throw DimensionMismatch("pre/fault/post parameter lengths differ");
  if (static_cast<int>(sc.param_names.size()) != sc.pre.n_params)
    throw DimensionMismatch("param_names length does not match parameter vector");

  std::vector<Vec> seeds;
  for (const auto& c : sc.h_post.constraints())
    detail::boundary_seed_grid(sc, c, sc.p0, seeds);
  for (const auto& seed : seeds) {
    Equilibrium eq;
    try {
      eq = find_equilibrium(sc.post, sc.p0, seed);
    } catch (const Error&) {
      continue;  // seed did not converge; not evidence of a violation
    }
    if (std::abs(sc.h_post.H(eq.x, sc.p0)) <= 1e-8)
      throw ScenarioRejected("post-fault equilibrium lies on the feasibility boundary (A1)");
  }
}

}  // namespace cctsens

#endif  // CCTSENS_SCENARIO_HPP
