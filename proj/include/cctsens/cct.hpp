#ifndef CCTSENS_CCT_HPP
#define CCTSENS_CCT_HPP

#include <cmath>
#include <optional>

#include "cctsens/integrator.hpp"
#include "cctsens/scenario.hpp"

namespace cctsens {

struct CctOptions {
  double step = 1e-3;
  double bracket_tol = 0.01;      // bisection exit width on |t_stable - t_unstable|
  double cat1_h_tol = 1e-5;       // |H_comb| at clearing for a category-1 verdict
  double anchor_h_tol = 1e-4;     // residuals |H|, |Hdot| at the category-2 anchor
  double sep_return_tol = 1e-3;   // ||x(t_max) - x_sep|| for the return test
  double graze_threshold = 1e-5;
  double fnorm_threshold = 1e-3;
  double t_max = -1.0;            // <= 0: use the scenario horizon
  int max_iter = 200;

  IntegrateOptions integ() const {
    IntegrateOptions io;
    io.step = step;
    io.graze_threshold = graze_threshold;
    io.fnorm_threshold = fnorm_threshold;
    return io;
  }
};

struct CriticalResult {
  double t_cr = 0.0;      // CCT (clearing time of the near-critical trajectory)
  Vec x_cr;               // fault-on state at t_cr
  int category = 0;       // 1, 2 or 3
  std::optional<double> T;      // post-fault time to the boundary anchor
  std::optional<Vec> x_T;       // boundary anchor state
  std::optional<Equilibrium> cuep;  // category 3 only
  double t_stable = 0.0;
  double t_unstable = 0.0;
  int iterations = 0;
  bool tie_ambiguous = false;  // H event and ||f||-min event coincided exactly
  Equilibrium sep_pre;
  Equilibrium sep_post;
};

namespace detail {

struct TrialOutcome {
  bool stable = false;
  double t_cl = 0.0;
  SensTrajectory post_traj;
  std::optional<Event> h_event;
};

class CctSearch {
 public:
  CctSearch(const Scenario& sc, const Vec& p, const CctOptions& opts)
      : sc_(sc), p_(p), opts_(opts), io_(opts.integ()) {
    t_max_ = opts.t_max > 0.0 ? opts.t_max : sc.t_max;
    h_comb_ = ConstraintSet::combined(sc.h_fault, sc.h_post);

    sep_pre_ = find_equilibrium(sc_.pre, p_, sc_.x_guess);
    if (!sep_pre_.is_sep())
      throw BracketFailure("pre-fault equilibrium from the scenario seed is not a SEP");
    sep_post_ = find_equilibrium(sc_.post, p_, sep_pre_.x);
    if (!sep_post_.is_sep())
      throw BracketFailure("post-fault equilibrium near the pre-fault SEP is not a SEP");
    if (h_comb_.H(sep_pre_.x, p_) <= 0.0)
      throw BracketFailure("pre-fault SEP violates the combined constraints");

    fault_traj_ = integrate(sc_.fault, &h_comb_, sep_pre_.x, p_, t_max_, io_);
  }

  CriticalResult run() {
    const auto exit = first_h_event(fault_traj_);
    if (!exit)
      throw NoFeasibleExit("sustained fault trajectory never leaves the feasibility region");
    double t_stable = 0.0;
    double t_unstable = exit->time;

    TrialOutcome base = trial(0.0);
    if (!base.stable)
      throw BracketFailure("clearing immediately is already unstable or infeasible");

    std::optional<TrialOutcome> last_unstable;
    CriticalResult res;
    int iter = 0;
    bool resolved = false;
    while (iter < opts_.max_iter) {
      if (t_unstable - t_stable < opts_.bracket_tol) {
        if (!last_unstable) last_unstable = trial(t_unstable);
        if (try_resolve(t_stable, t_unstable, *last_unstable, res)) {
          resolved = true;
          break;
        }
      }
      if (t_unstable - t_stable < 1e-12) break;  // bracket exhausted unresolved
      const double t_cl = 0.5 * (t_stable + t_unstable);
      TrialOutcome out = trial(t_cl);
      ++iter;
      if (out.stable) {
        t_stable = t_cl;
      } else {
        t_unstable = t_cl;
        last_unstable = std::move(out);
      }
    }
    if (!resolved)
      throw Ambiguous("no boundary event found on the near-critical unstable trajectory");
    res.t_stable = t_stable;
    res.t_unstable = t_unstable;
    res.iterations = iter;
    res.sep_pre = sep_pre_;
    res.sep_post = sep_post_;
    return res;
  }

  // Classification for an externally supplied converged bracket.
  CriticalResult classify(double t_stable, double t_unstable) {
    TrialOutcome out = trial(t_unstable);
    CriticalResult res;
    if (!try_resolve(t_stable, t_unstable, out, res))
      throw Ambiguous("no boundary event found on the unstable-side trajectory");
    res.t_stable = t_stable;
    res.t_unstable = t_unstable;
    res.sep_pre = sep_pre_;
    res.sep_post = sep_post_;
    return res;
  }

 private:
  static std::optional<Event> first_h_event(const SensTrajectory& traj) {
    for (const auto& ev : traj.events)
      if (ev.kind == Event::Kind::HZeroCrossing || ev.kind == Event::Kind::HGraze)
        return ev;
    return std::nullopt;
  }

  TrialOutcome trial(double t_cl) {
    TrialOutcome out;
    out.t_cl = t_cl;
    const Vec x_cl = fault_traj_.state_at(t_cl);
    out.post_traj = integrate(sc_.post, &sc_.h_post, x_cl, p_, t_max_, io_);
    out.h_event = first_h_event(out.post_traj);
    const bool returned =
        (out.post_traj.x_end() - sep_post_.x).norm() <= opts_.sep_return_tol;
    out.stable = !out.h_event && returned;
    return out;
  }

  // Interior local minimum of H along the trajectory with the smallest |H|,
  // refined on the dense interpolant. This is the grazing-point candidate.
  std::optional<std::pair<double, double>> h_argmin(const SensTrajectory& traj) const {
    const auto& ts = traj.times;
    std::optional<std::pair<double, double>> best;  // (t, H)
    std::vector<double> Hv(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) Hv[i] = sc_.h_post.H(traj.states[i], p_);
    auto Ht = [&](double t) { return sc_.h_post.H(traj.state_at(t), p_); };
    for (size_t i = 1; i + 1 < ts.size(); ++i) {
      if (Hv[i] <= Hv[i - 1] && Hv[i] <= Hv[i + 1]) {
        const double t = golden_min(Ht, ts[i - 1], ts[i + 1], io_.event_time_tol);
        const double hm = Ht(t);
        if (!best || std::abs(hm) < std::abs(best->second)) best = {t, hm};
      }
    }
    return best;
  }

  bool try_resolve(double t_stable, double t_unstable, const TrialOutcome& near_critical,
                   CriticalResult& res) {
    const Vec x_cr = fault_traj_.state_at(t_unstable);
    res.t_cr = t_unstable;
    res.x_cr = x_cr;

    // Category 1: clearing state already on the combined feasibility boundary.
    if (std::abs(h_comb_.H(x_cr, p_)) <= opts_.cat1_h_tol) {
      res.category = 1;
      return true;
    }

    // ||f|| also dips near the SEP on a stable trajectory; anchors may only
    // come from the unstable side of the bracket.
    if (near_critical.stable) return false;

    const auto& t1 = near_critical.h_event;
    const auto t2 = detect_fnorm_min(near_critical.post_traj, sc_.post, p_, io_);
    if (!t1 && !t2) return false;

    bool use_h;
    if (t1 && t2) {
      res.tie_ambiguous = std::abs(t1->time - t2->time) <= 1e-9;
      use_h = res.tie_ambiguous || t1->time <= t2->time;
    } else {
      use_h = static_cast<bool>(t1);
    }

    if (use_h) {
      // Category 2 anchor: the grazing point, where both H and Hdot vanish.
      const auto anchor = h_argmin(near_critical.post_traj);
      if (!anchor) return false;
      const Vec x_T = near_critical.post_traj.state_at(anchor->first);
      if (std::abs(anchor->second) > opts_.anchor_h_tol) return false;
      if (std::abs(sc_.h_post.Hdot(sc_.post, x_T, p_)) > opts_.anchor_h_tol) return false;
      res.category = 2;
      res.T = anchor->first;
      res.x_T = x_T;
      return true;
    }

    // Category 3: ||f||-minimum seeds Newton refinement of the CUEP.
    Equilibrium cuep = find_equilibrium(sc_.post, p_, t2->state);
    if (!cuep.is_type1_uep())
      throw CuepNotType1("refined equilibrium does not have exactly one unstable eigenvalue");
    // Re-anchor x_T to the trajectory point closest to the refined CUEP.
    const auto& traj = near_critical.post_traj;
    auto dist = [&](double t) { return (traj.state_at(t) - cuep.x).norm(); };
    const double lo = std::max(traj.times.front(), t2->time - 0.5);
    const double hi = std::min(traj.times.back(), t2->time + 0.5);
    const double tT = golden_min(dist, lo, hi, io_.event_time_tol);
    res.category = 3;
    res.T = tT;
    res.x_T = traj.state_at(tT);
    res.cuep = cuep;
    return true;
  }

  const Scenario& sc_;
  Vec p_;
  CctOptions opts_;
  IntegrateOptions io_;
  double t_max_ = 0.0;
  ConstraintSet h_comb_;
  Equilibrium sep_pre_, sep_post_;
  SensTrajectory fault_traj_;
};

}  // namespace detail

// The bisection algorithm: returns the CCT, the near-critical clearing
// state, the failure category, and the boundary anchor (x_T, T). The
// bracket keeps shrinking past bracket_tol until the anchor is resolved.
inline CriticalResult find_cct(const Scenario& sc, const Vec& p,
                               const CctOptions& opts = {}) {
  return detail::CctSearch(sc, p, opts).run();
}

inline CriticalResult find_cct(const Scenario& sc, const CctOptions& opts = {}) {
  return find_cct(sc, sc.p0, opts);
}

// Deterministic category + anchor for a converged bracket.
inline CriticalResult classify_category(const Scenario& sc, const Vec& p, double t_stable,
                                        double t_unstable, const CctOptions& opts = {}) {
  return detail::CctSearch(sc, p, opts).classify(t_stable, t_unstable);
}

}  // namespace cctsens

#endif  // CCTSENS_CCT_HPP
