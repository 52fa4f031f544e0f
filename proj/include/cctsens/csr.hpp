#ifndef CCTSENS_CSR_HPP
#define CCTSENS_CSR_HPP

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "cctsens/cct.hpp"

namespace cctsens {

enum class CellLabel { InsideCsr, InfeasibleExit, Unstable };

struct CsrGridSpec {
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;
  int nx = 201, ny = 201;
  double t_max = -1.0;  // <= 0: use the scenario horizon
  double step = 1e-3;
  double sep_tol = 1e-3;
};

struct BoundarySample {
  PseudoEpClass cls;
  int constraint_index = 0;
};

struct CsrGrid {
  CsrGridSpec spec;
  std::vector<CellLabel> labels;  // row-major, y outer, x inner
  std::vector<BoundarySample> boundary_samples;
  std::vector<Vec> semi_saddles;
  std::vector<Equilibrium> ueps_in_feasible_region;
  Equilibrium sep;

  CellLabel label_at(int ix, int iy) const { return labels[iy * spec.nx + ix]; }
  double x_of(int ix) const { return spec.x_lo + (spec.x_hi - spec.x_lo) * ix / (spec.nx - 1); }
  double y_of(int iy) const { return spec.y_lo + (spec.y_hi - spec.y_lo) * iy / (spec.ny - 1); }
};

namespace detail {

// Project a point onto {h_k = 0} along the constraint gradient.
inline bool project_to_constraint(const Constraint& c, const Vec& p, Vec& x) {
  for (int it = 0; it < 10; ++it) {
    const double hv = c.h(x, p);
    if (std::abs(hv) < 1e-13) return true;
    const RowVec g = c.grad_x(x, p);
    const double gn2 = g.squaredNorm();
    if (gn2 < 1e-16) return false;
    x -= g.transpose() * (hv / gn2);
  }
  return std::abs(c.h(x, p)) < 1e-10;
}

}  // namespace detail

// Grid the constrained stability region of a 2-D scenario's post-fault
// system, sample and classify the feasibility boundary, locate semi-saddles
// and any UEP sitting inside the feasible region.
inline CsrGrid map_csr(const Scenario& sc, const Vec& p, const CsrGridSpec& spec) {
  if (sc.post.dim != 2)
    throw DimensionUnsupported("CSR mapping is implemented for 2-D scenarios only");
  CsrGrid grid;
  grid.spec = spec;
  const double t_max = spec.t_max > 0.0 ? spec.t_max : sc.t_max;
  grid.sep = find_equilibrium(sc.post, p, sc.x_guess);

  IntegrateOptions io;
  io.step = spec.step;

  // Cell classification, parallel over rows.
  grid.labels.assign(static_cast<size_t>(spec.nx) * spec.ny, CellLabel::Unstable);
  auto classify_row = [&](int iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      Vec x0(2);
      x0 << grid.x_of(ix), grid.y_of(iy);
      CellLabel label;
      if (sc.h_post.H(x0, p) <= 0.0) {
        label = CellLabel::InfeasibleExit;
      } else {
        SensTrajectory traj;
        try {
          traj = integrate(sc.post, &sc.h_post, x0, p, t_max, io);
        } catch (const StepFailure&) {
          grid.labels[iy * spec.nx + ix] = CellLabel::Unstable;
          continue;
        }
        const bool exited = detect_feasibility_exit(traj, sc.h_post, p, io).has_value();
        if (exited)
          label = CellLabel::InfeasibleExit;
        else if ((traj.x_end() - grid.sep.x).norm() <= spec.sep_tol)
          label = CellLabel::InsideCsr;
        else
          label = CellLabel::Unstable;
      }
      grid.labels[iy * spec.nx + ix] = label;
    }
  };
  {
    const unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> workers;
    std::atomic<int> next_row{0};
    for (unsigned w = 0; w < n_workers; ++w)
      workers.emplace_back([&] {
        for (int iy; (iy = next_row.fetch_add(1)) < spec.ny;) classify_row(iy);
      });
    for (auto& th : workers) th.join();
  }

  // Boundary sampling by 1-D root finding along grid lines, per constraint.
  const auto& constraints = sc.h_post.constraints();
  for (size_t k = 0; k < constraints.size(); ++k) {
    const auto& c = constraints[k];
    std::vector<Vec> samples;
    auto scan = [&](bool along_x) {
      const int outer = along_x ? spec.ny : spec.nx;
      const int inner = along_x ? spec.nx : spec.ny;
      for (int io_idx = 0; io_idx < outer; ++io_idx) {
        for (int ii = 0; ii + 1 < inner; ++ii) {
          Vec a(2), b(2);
          if (along_x) {
            a << grid.x_of(ii), grid.y_of(io_idx);
            b << grid.x_of(ii + 1), grid.y_of(io_idx);
          } else {
            a << grid.x_of(io_idx), grid.y_of(ii);
            b << grid.x_of(io_idx), grid.y_of(ii + 1);
          }
          double ha = c.h(a, p), hb = c.h(b, p);
          if (ha == 0.0) samples.push_back(a);
          if ((ha > 0) == (hb > 0)) continue;
          double lo = 0.0, hi = 1.0;
          while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            const Vec xm = a + mid * (b - a);
            if ((c.h(xm, p) > 0) == (ha > 0))
              lo = mid;
            else
              hi = mid;
          }
          samples.push_back(a + 0.5 * (lo + hi) * (b - a));
        }
      }
    };
    scan(true);
    scan(false);

    // Order along the boundary by the tangent direction and classify.
    if (samples.empty()) continue;
    const RowVec g0 = c.grad_x(samples.front(), p);
    Vec tangent(2);
    tangent << -g0[1], g0[0];
    if (tangent.norm() > 0) tangent.normalize();
    std::sort(samples.begin(), samples.end(), [&](const Vec& a, const Vec& b) {
      return tangent.dot(a) < tangent.dot(b);
    });
    std::vector<double> hdots(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      BoundarySample bs;
      bs.cls = classify_boundary_point(sc.h_post, sc.post, samples[i], p, 1e-6);
      bs.constraint_index = static_cast<int>(k);
      hdots[i] = bs.cls.Hdot;
      grid.boundary_samples.push_back(bs);
    }

    // Semi-saddles: bisection on Hdot between adjacent samples of opposite sign.
    for (size_t i = 0; i + 1 < samples.size(); ++i) {
      if ((hdots[i] > 0) == (hdots[i + 1] > 0)) continue;
      Vec a = samples[i], b = samples[i + 1];
      double hda = hdots[i];
      while ((b - a).norm() > 1e-8) {
        Vec mid = 0.5 * (a + b);
        if (!detail::project_to_constraint(c, p, mid)) break;
        const double hdm = sc.h_post.Hdot(sc.post, mid, p);
        if ((hdm > 0) == (hda > 0)) {
          a = mid;
          hda = hdm;
        } else {
          b = mid;
        }
      }
      grid.semi_saddles.push_back(0.5 * (a + b));
    }
  }

  // UEPs of the original system inside the feasible region, from coarse seeds.
  std::vector<Vec> found;
  const int seeds = 9;
  for (int iy = 0; iy < seeds; ++iy) {
    for (int ix = 0; ix < seeds; ++ix) {
      Vec seed(2);
      seed << spec.x_lo + (spec.x_hi - spec.x_lo) * ix / (seeds - 1),
          spec.y_lo + (spec.y_hi - spec.y_lo) * iy / (seeds - 1);
      Equilibrium eq;
      try {
        eq = find_equilibrium(sc.post, p, seed);
      } catch (const Error&) {
        continue;
      }
      if (eq.kind != EquilibriumKind::Uep) continue;
      if (sc.h_post.H(eq.x, p) <= 0.0) continue;
      if (eq.x[0] < spec.x_lo - 0.5 || eq.x[0] > spec.x_hi + 0.5 ||
          eq.x[1] < spec.y_lo - 0.5 || eq.x[1] > spec.y_hi + 0.5)
        continue;
      bool dup = false;
      for (const auto& f : found)
        if ((f - eq.x).norm() < 1e-6) { dup = true; break; }
      if (dup) continue;
      found.push_back(eq.x);
      grid.ueps_in_feasible_region.push_back(eq);
    }
  }
  return grid;
}

}  // namespace cctsens

#endif  // CCTSENS_CSR_HPP
