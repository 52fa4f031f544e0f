#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "cctsens/multimachine.hpp"
#include "cctsens/smib.hpp"

using namespace cctsens;

namespace {

// Central finite differences of f against the analytic Jacobians.
void check_jacobians(const ParametricModel& model, const Vec& x, const Vec& p,
                     double rel_tol = 1e-5) {
  const double h = 1e-6;
  Mat fd_x(model.dim, model.dim);
  for (int j = 0; j < model.dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    fd_x.col(j) = (model.f(xp, p) - model.f(xm, p)) / (2 * h);
  }
  const Mat Jx = model.jac_x(x, p);
  REQUIRE((fd_x - Jx).norm() <= rel_tol * std::max(1.0, Jx.norm()));

  Mat fd_p(model.dim, model.n_params);
  for (int j = 0; j < model.n_params; ++j) {
    Vec pp = p, pm = p;
    pp[j] += h;
    pm[j] -= h;
    fd_p.col(j) = (model.f(x, pp) - model.f(x, pm)) / (2 * h);
  }
  const Mat Jp = model.jac_p(x, p);
  REQUIRE((fd_p - Jp).norm() <= rel_tol * std::max(1.0, Jp.norm()));
}

void check_constraint_gradients(const ConstraintSet& h, int n, int np, const Vec& x,
                                const Vec& p) {
  const double step = 1e-6;
  for (const auto& c : h.constraints()) {
    RowVec fd_x(n), fd_p(np);
    for (int j = 0; j < n; ++j) {
      Vec xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      fd_x[j] = (c.h(xp, p) - c.h(xm, p)) / (2 * step);
    }
    for (int j = 0; j < np; ++j) {
      Vec pp = p, pm = p;
      pp[j] += step;
      pm[j] -= step;
      fd_p[j] = (c.h(x, pp) - c.h(x, pm)) / (2 * step);
    }
    REQUIRE((fd_x - c.grad_x(x, p)).norm() <= 1e-5 * std::max(1.0, fd_x.norm()));
    REQUIRE((fd_p - c.grad_p(x, p)).norm() <= 1e-5 * std::max(1.0, fd_p.norm()));
  }
}

MachineDataset toy_three_machine() {
  MachineDataset ds;
  ds.m = 3;
  ds.M = (Vec(3) << 0.05, 0.05, 0.2).finished();
  ds.E = (Vec(3) << 1.05, 1.05, 1.0).finished();
  auto sym = [](double d12, double d13, double d23, double diag) {
    Mat A(3, 3);
    A << diag, d12, d13, d12, diag, d23, d13, d23, diag;
    return A;
  };
  ds.G_pre = sym(0.05, 0.05, 0.05, 0.1);
  ds.B_pre = sym(0.9, 0.7, 0.8, -2.5);
  ds.G_fault = sym(0.0, 0.0, 0.05, 0.1);
  ds.B_fault = sym(0.0, 0.05, 0.7, -2.5);
  ds.G_post = sym(0.0, 0.05, 0.05, 0.1);
  ds.B_post = sym(0.0, 0.7, 0.8, -2.5);
  // mechanical inputs balancing the pre-fault network at a chosen angle set
  const Vec dabs = (Vec(3) << 0.35, 0.2, 0.0).finished();
  ds.Pm.resize(3);
  for (int i = 0; i < 3; ++i)
    ds.Pm[i] = detail::electrical_power(ds.E, ds.G_pre, ds.B_pre, dabs, i);
  ds.delta_guess = dabs;
  return ds;
}

}  // namespace

TEST_CASE("SMIB analytic Jacobians match finite differences at random points") {
  const Scenario sc = smib_model();
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> ang(-3.0, 3.0), spd(-2.0, 2.0);
  std::uniform_real_distribution<double> pm(0.1, 0.9), inertia(0.1, 0.5);
  for (int i = 0; i < 100; ++i) {
    const Vec x = (Vec(2) << ang(rng), spd(rng)).finished();
    const Vec p = (Vec(4) << pm(rng), inertia(rng), 2.4, 1.0).finished();
    check_jacobians(sc.pre, x, p);
    check_jacobians(sc.fault, x, p);
    check_jacobians(sc.post, x, p);
    check_constraint_gradients(sc.h_post, 2, 4, x, p);
  }
}

TEST_CASE("multimachine analytic Jacobians match finite differences") {
  const Scenario sc = multimachine_model(toy_three_machine());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ang(-1.0, 1.0), spd(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vec x = (Vec(4) << ang(rng), ang(rng), spd(rng), spd(rng)).finished();
    check_jacobians(sc.pre, x, sc.p0);
    check_jacobians(sc.fault, x, sc.p0);
    check_jacobians(sc.post, x, sc.p0);
    check_constraint_gradients(sc.h_post, 4, 3, x, sc.p0);
  }
}

TEST_CASE("H is the exact product of the constraint values") {
  const Scenario sc = smib_model();
  const Vec x = (Vec(2) << 1.0, 0.3).finished();
  const double h1 = sc.p0[2] - x[0];
  const double h2 = sc.p0[3] - x[1];
  REQUIRE(sc.h_post.H(x, sc.p0) == h1 * h2);
}

TEST_CASE("find_equilibrium locates the SMIB SEP and UEP") {
  const Scenario sc = smib_model();

  SECTION("Pm=0 balances at the origin") {
    Vec p = sc.p0;
    p[0] = 0.0;
    const auto eq = find_equilibrium(sc.post, p, Vec::Zero(2));
    REQUIRE(eq.x.norm() <= 1e-10);
    REQUIRE(eq.is_sep());
  }

  // Independent oracle: bisection root of Pm - sin(delta) on the two branches.
  auto bisect_sin = [](double pm, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((pm - std::sin(lo) > 0) == (pm - std::sin(mid) > 0))
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  SECTION("SEP branch") {
    const double expected = bisect_sin(0.6, 0.0, std::numbers::pi / 2);
    const auto eq = find_equilibrium(sc.post, sc.p0, (Vec(2) << 0.5, 0).finished());
    REQUIRE(eq.is_sep());
    REQUIRE(std::abs(eq.x[0] - expected) <= 1e-9);
    REQUIRE(std::abs(eq.x[0] - 0.64350) <= 1e-4);
    REQUIRE(std::abs(eq.x[1]) <= 1e-10);
  }

  SECTION("UEP branch is type 1") {
    const double expected = bisect_sin(0.6, std::numbers::pi / 2, std::numbers::pi);
    const auto eq = find_equilibrium(sc.post, sc.p0, (Vec(2) << 3.0, 0).finished());
    REQUIRE(eq.kind == EquilibriumKind::Uep);
    REQUIRE(eq.uep_type == 1);
    REQUIRE(std::abs(eq.x[0] - expected) <= 1e-9);
    REQUIRE(std::abs(eq.x[0] - 2.49809) <= 1e-4);
  }

  SECTION("SEP/UEP pair is supplementary") {
    const auto sep = find_equilibrium(sc.post, sc.p0, (Vec(2) << 0.5, 0).finished());
    const auto uep = find_equilibrium(sc.post, sc.p0, (Vec(2) << 3.0, 0).finished());
    REQUIRE(std::sin(sep.x[0]) == Catch::Approx(0.6).margin(1e-10));
    REQUIRE(std::sin(uep.x[0]) == Catch::Approx(0.6).margin(1e-10));
    REQUIRE(uep.x[0] == Catch::Approx(std::numbers::pi - sep.x[0]).margin(1e-9));
  }

  SECTION("residual satisfies the equilibrium tolerance") {
    const auto eq = find_equilibrium(sc.post, sc.p0, (Vec(2) << 0.5, 0).finished());
    REQUIRE(sc.post.f(eq.x, sc.p0).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("classify_boundary_point on the angle limit") {
  // single-constraint set H = delta_max - delta
  ConstraintSet h;
  h.add(linear_constraint("angle_limit", 0.0, (Vec(2) << -1, 0).finished(),
                          (Vec(4) << 0, 0, 1, 0).finished()));
  const Scenario sc = smib_model();
  const Vec p = sc.p0;

  SECTION("moving toward the boundary is stable") {
    const auto c = classify_boundary_point(h, sc.post, (Vec(2) << 2.4434, 0.5).finished(), p);
    REQUIRE(c.cls == BoundaryClass::Stable);
    REQUIRE(c.Hdot == Catch::Approx(-0.5));
  }
  SECTION("moving away is unstable") {
    const auto c = classify_boundary_point(h, sc.post, (Vec(2) << 2.4434, -0.5).finished(), p);
    REQUIRE(c.cls == BoundaryClass::Unstable);
    REQUIRE(c.Hdot == Catch::Approx(0.5));
  }
  SECTION("tangential point is a semi-saddle with the oracle Hddot") {
    const auto c = classify_boundary_point(h, sc.post, (Vec(2) << 2.4434, 0.0).finished(), p);
    REQUIRE(c.cls == BoundaryClass::SemiSaddle);
    // arithmetic oracle: Hddot = -(Pm - sin delta)/M at omega = 0
    const double expected = -(0.6 - std::sin(2.4434)) / 0.25;
    REQUIRE(expected == Catch::Approx(0.171).margin(5e-3));
    REQUIRE(h.Hddot(sc.post, (Vec(2) << 2.4434, 0.0).finished(), p) ==
            Catch::Approx(expected).margin(1e-12));
  }
  SECTION("off-boundary point is rejected") {
    REQUIRE_THROWS_AS(
        classify_boundary_point(h, sc.post, (Vec(2) << 2.0, 0.0).finished(), p),
        NotOnBoundary);
  }
}

TEST_CASE("boundary classification is invariant under positive field rescaling") {
  const Scenario sc = smib_model();
  ConstraintSet h;
  h.add(linear_constraint("angle_limit", 0.0, (Vec(2) << -1, 0).finished(),
                          (Vec(4) << 0, 0, 1, 0).finished()));
  ParametricModel scaled = sc.post;
  const auto base_f = sc.post.f;
  const auto base_jx = sc.post.jac_x;
  scaled.f = [base_f](const Vec& x, const Vec& p) { return (3.7 * base_f(x, p)).eval(); };
  scaled.jac_x = [base_jx](const Vec& x, const Vec& p) { return (3.7 * base_jx(x, p)).eval(); };

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> spd(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Vec x = (Vec(2) << 2.4434, spd(rng)).finished();
    const auto a = classify_boundary_point(h, sc.post, x, sc.p0);
    const auto b = classify_boundary_point(h, scaled, x, sc.p0);
    REQUIRE(a.cls == b.cls);
  }
}

TEST_CASE("smib_model examples and validation") {
  SECTION("base scenario matches the study point") {
    const Scenario sc = smib_model();
    REQUIRE(sc.p0.size() == 4);
    REQUIRE(sc.p0[0] == 0.6);
    REQUIRE(sc.p0[2] == 2.4434);
    REQUIRE(sc.h_post.count() == 2);
  }
  SECTION("fault-on field drops the electrical torque") {
    const Scenario sc = smib_model();
    const Vec fx = sc.fault.f((Vec(2) << 0.6435, 0.0).finished(), sc.p0);
    REQUIRE(fx[0] == 0.0);
    REQUIRE(fx[1] == Catch::Approx(2.4));  // Pm / M
  }
  SECTION("post field vanishes at the SEP") {
    const Scenario sc = smib_model();
    const auto sep = find_equilibrium(sc.post, sc.p0, sc.x_guess);
    REQUIRE(sc.post.f(sep.x, sc.p0).norm() <= 1e-10);
  }
  SECTION("invalid parameters are rejected") {
    SmibParams sp;
    sp.M = -1.0;
    REQUIRE_THROWS_AS(smib_model(sp), InvalidParameter);
    sp = SmibParams{};
    sp.delta_max = 0.0;
    REQUIRE_THROWS_AS(smib_model(sp), InvalidParameter);
  }
  SECTION("A1: delta_max on the post-fault UEP rejects the scenario") {
    const Scenario base = smib_model();
    const auto uep = find_equilibrium(base.post, base.p0, (Vec(2) << 3.0, 0).finished());
    SmibParams sp;
    sp.delta_max = uep.x[0];
    REQUIRE_THROWS_AS(smib_model(sp), ScenarioRejected);
  }
}

TEST_CASE("multimachine_model examples") {
  SECTION("three-machine scenario carries the pair constraint") {
    const Scenario sc = multimachine_model(toy_three_machine());
    REQUIRE(sc.post.dim == 4);
    REQUIRE(sc.h_post.count() == 1);
    // h = pi/2 - (delta_1 - delta_2)
    const Vec x = (Vec(4) << 0.3, 0.1, 0, 0).finished();
    REQUIRE(sc.h_post.constraints()[0].h(x, sc.p0) ==
            Catch::Approx(std::numbers::pi / 2 - 0.2));
  }
  SECTION("field vanishes at the computed SEP") {
    const Scenario sc = multimachine_model(toy_three_machine());
    const auto sep = find_equilibrium(sc.pre, sc.p0, sc.x_guess);
    REQUIRE(sc.pre.f(sep.x, sc.p0).lpNorm<Eigen::Infinity>() <= 1e-10);
    REQUIRE(sep.is_sep());
  }
  SECTION("symmetric two-machine toy has its relative SEP at zero") {
    MachineDataset ds;
    ds.m = 2;
    ds.M = (Vec(2) << 0.1, 0.1).finished();
    ds.E = (Vec(2) << 1.0, 1.0).finished();
    Mat G(2, 2), B(2, 2);
    G << 0.0, 0.0, 0.0, 0.0;
    B << -1.0, 1.0, 1.0, -1.0;
    ds.G_pre = ds.G_fault = ds.G_post = G;
    ds.B_pre = ds.B_fault = ds.B_post = B;
    ds.Pm = Vec::Zero(2);
    const Scenario sc = multimachine_model(ds);
    const auto sep = find_equilibrium(sc.pre, sc.p0, Vec::Zero(2));
    REQUIRE(sep.x.norm() <= 1e-10);
  }
  SECTION("dimension mismatches are rejected") {
    MachineDataset ds = toy_three_machine();
    ds.M = Vec::Ones(2);
    REQUIRE_THROWS_AS(multimachine_model(ds), DimensionMismatch);
  }
}
