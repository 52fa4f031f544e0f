#ifndef CCTSENS_INTEGRATOR_HPP
#define CCTSENS_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cctsens/model.hpp"

namespace cctsens {

struct Event {
  enum class Kind { HZeroCrossing, HGraze, FNormLocalMin, HorizonReached };
  Kind kind;
  double time = 0.0;
  Vec state;
  double value = 0.0;  // H at the event, or the ||f|| minimum
};

struct IntegrateOptions {
  double step = 1e-3;
  bool with_sens = false;
  double event_time_tol = 1e-8;
  double graze_threshold = 1e-5;   // H local minimum at or below this grazes
  double fnorm_threshold = 1e-3;   // ||f|| local minimum at or below this counts
};

// Time-gridded trajectory with optional variational matrices
// Phi_x = dphi/dx0 and Phi_p = dphi/dp, plus detected events.
struct SensTrajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> derivs;  // f(x_k, p), kept for dense interpolation
  std::vector<Mat> phi_x;   // empty unless integrated with sensitivities
  std::vector<Mat> phi_p;
  std::vector<Event> events;

  double t_end() const { return times.back(); }
  const Vec& x_end() const { return states.back(); }

  // Cubic Hermite interpolation of the state; exact at grid nodes.
  Vec state_at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const size_t i = static_cast<size_t>(it - times.begin()) - 1;
    const double h = times[i + 1] - times[i];
    const double s = (t - times[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * states[i] + h10 * h * derivs[i] + h01 * states[i + 1] +
           h11 * h * derivs[i + 1];
  }
};

namespace detail {

// One classical RK4 step of the state together with its variational
// systems Phi_x' = A Phi_x and Phi_p' = A Phi_p + B, A = df/dx, B = df/dp.
struct RkStage {
  Vec x;
  Mat px, pp;
};

inline void rk4_step(const ParametricModel& model, const Vec& p, double h, Vec& x,
                     Mat* phi_x, Mat* phi_p) {
  const bool sens = phi_x != nullptr;
  auto rhs = [&](const Vec& xs, const Mat& pxs, const Mat& pps, RkStage& out) {
    out.x = model.f(xs, p);
    if (sens) {
      const Mat A = model.jac_x(xs, p);
      out.px = A * pxs;
      out.pp = A * pps + model.jac_p(xs, p);
    }
  };
  RkStage k1, k2, k3, k4;
  const Mat zero;
  const Mat& px0 = sens ? *phi_x : zero;
  const Mat& pp0 = sens ? *phi_p : zero;
  rhs(x, px0, pp0, k1);
  rhs(x + 0.5 * h * k1.x, sens ? Mat(px0 + 0.5 * h * k1.px) : zero,
      sens ? Mat(pp0 + 0.5 * h * k1.pp) : zero, k2);
  rhs(x + 0.5 * h * k2.x, sens ? Mat(px0 + 0.5 * h * k2.px) : zero,
      sens ? Mat(pp0 + 0.5 * h * k2.pp) : zero, k3);
  rhs(x + h * k3.x, sens ? Mat(px0 + h * k3.px) : zero,
      sens ? Mat(pp0 + h * k3.pp) : zero, k4);
  x += (h / 6.0) * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  if (sens) {
    *phi_x += (h / 6.0) * (k1.px + 2 * k2.px + 2 * k3.px + k4.px);
    *phi_p += (h / 6.0) * (k1.pp + 2 * k2.pp + 2 * k3.pp + k4.pp);
  }
}

// Golden-section search for the minimizer of g on [a,b].
template <typename F>
double golden_min(F&& g, double a, double b, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > tol) {
    if (g1 < g2) {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - invphi * (b - a);
      g1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + invphi * (b - a);
      g2 = g(x2);
    }
  }
  return 0.5 * (a + b);
}

template <typename F>
double bisect_root(F&& g, double a, double b, double ga, double tol) {
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if ((ga <= 0.0) == (gm <= 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Earliest H-zero-crossing or H-graze event along an already computed
// trajectory; nullopt when neither occurs. Event times are refined on the
// dense interpolant to the integrator's time tolerance.
inline std::optional<Event> detect_feasibility_exit(const SensTrajectory& traj,
                                                    const ConstraintSet& h, const Vec& p,
                                                    const IntegrateOptions& opts = {}) {
  if (h.empty()) return std::nullopt;
  auto Ht = [&](double t) { return h.H(traj.state_at(t), p); };
  const size_t n = traj.times.size();
  std::vector<double> Hv(n);
  for (size_t i = 0; i < n; ++i) Hv[i] = h.H(traj.states[i], p);

  for (size_t i = 0; i + 1 < n; ++i) {
    if (Hv[i] > 0.0 && Hv[i + 1] <= 0.0) {
      const double t = detail::bisect_root(Ht, traj.times[i], traj.times[i + 1], Hv[i],
                                           opts.event_time_tol);
      Event ev{Event::Kind::HZeroCrossing, t, traj.state_at(t), Ht(t)};
      return ev;
    }
    // interior local minimum that grazes the boundary
    if (i > 0 && Hv[i] <= Hv[i - 1] && Hv[i] <= Hv[i + 1] &&
        Hv[i] <= 10 * opts.graze_threshold) {
      const double t =
          detail::golden_min(Ht, traj.times[i - 1], traj.times[i + 1], opts.event_time_tol);
      const double hm = Ht(t);
      if (hm <= opts.graze_threshold && hm > 0.0) {
        Event ev{Event::Kind::HGraze, t, traj.state_at(t), hm};
        return ev;
      }
    }
  }
  return std::nullopt;
}

// Earliest interior local minimum of ||f(x(t),p)||_2 at or below the
// threshold; nullopt otherwise.
inline std::optional<Event> detect_fnorm_min(const SensTrajectory& traj,
                                             const ParametricModel& model, const Vec& p,
                                             const IntegrateOptions& opts = {}) {
  auto g = [&](double t) { return model.f(traj.state_at(t), p).norm(); };
  const size_t n = traj.times.size();
  for (size_t i = 1; i + 1 < n; ++i) {
    const double gi = traj.derivs[i].norm();
    if (gi <= traj.derivs[i - 1].norm() && gi <= traj.derivs[i + 1].norm() &&
        gi <= 10 * opts.fnorm_threshold) {
      const double t =
          detail::golden_min(g, traj.times[i - 1], traj.times[i + 1], opts.event_time_tol);
      const double gm = g(t);
      if (gm <= opts.fnorm_threshold) {
        Event ev{Event::Kind::FNormLocalMin, t, traj.state_at(t), gm};
        return ev;
      }
    }
  }
  return std::nullopt;
}

// Fixed-step RK4 integration of the model, optionally augmented with the
// variational systems. Feasibility events are detected when a constraint
// set is supplied; detection never stops the integration.
inline SensTrajectory integrate(const ParametricModel& model, const ConstraintSet* h,
                                const Vec& x0, const Vec& p, double t_end,
                                const IntegrateOptions& opts = {}) {
  if (t_end < 0.0) throw InvalidParameter("t_end must be nonnegative");
  SensTrajectory traj;
  const int n_full = static_cast<int>(std::floor(t_end / opts.step + 1e-9));
  traj.times.reserve(n_full + 2);

  Vec x = x0;
  Mat px, pp;
  if (opts.with_sens) {
    px = Mat::Identity(model.dim, model.dim);
    pp = Mat::Zero(model.dim, model.n_params);
  }
  auto push = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.derivs.push_back(model.f(x, p));
    if (opts.with_sens) {
      traj.phi_x.push_back(px);
      traj.phi_p.push_back(pp);
    }
  };
  push(0.0);
  double t = 0.0;
  for (int i = 0; i < n_full; ++i) {
    detail::rk4_step(model, p, opts.step, x, opts.with_sens ? &px : nullptr,
                     opts.with_sens ? &pp : nullptr);
    if (!x.allFinite()) throw StepFailure("nonfinite state during integration");
    t = (i + 1) * opts.step;
    push(t);
  }
  if (t_end - t > 1e-12) {  // partial last step landing exactly on t_end
    detail::rk4_step(model, p, t_end - t, x, opts.with_sens ? &px : nullptr,
                     opts.with_sens ? &pp : nullptr);
    if (!x.allFinite()) throw StepFailure("nonfinite state during integration");
    push(t_end);
  }

  if (h != nullptr) {
    if (auto ev = detect_feasibility_exit(traj, *h, p, opts)) traj.events.push_back(*ev);
  }
  traj.events.push_back(Event{Event::Kind::HorizonReached, t_end, x, 0.0});
  return traj;
}

}  // namespace cctsens

#endif  // CCTSENS_INTEGRATOR_HPP
