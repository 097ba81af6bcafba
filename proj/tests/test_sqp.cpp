#include "support.hpp"

#include "trussred/limit.hpp"
#include "trussred/sqp.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>

using namespace trussred;
using namespace trussred::sqp;

TEST_CASE("armijo backtracking") {
  auto sq = [](const Vec& z) { return z.squaredNorm(); };
  LineSearchResult r = armijo_search(sq, Vec{{1.0, 0.0}}, 1.0, Vec{{-1.0, 0.0}}, Vec{{2.0, 0.0}}, 0.01, 0.8, 50);
  CHECK(r.success);
  CHECK(r.tau == 0);
  CHECK(r.step == 1.0);
  CHECK(r.f_new == 0.0);

  // Ascent direction: nothing can pass a strict-decrease test.
  r = armijo_search(sq, Vec{{1.0, 0.0}}, 1.0, Vec{{1.0, 0.0}}, Vec{{2.0, 0.0}}, 0.01, 0.8, 50);
  CHECK_FALSE(r.success);
  CHECK(r.evaluations == 51);

  // 5 x^2 from x = 1 along d = -1 reaches the minimizer with the full step.
  auto five = [](const Vec& z) { return 5 * z.squaredNorm(); };
  r = armijo_search(five, Vec{{1.0}}, 5.0, Vec{{-1.0}}, Vec{{10.0}}, 0.01, 0.8, 50);
  CHECK(r.tau == 0);

  // 5 (x - 2)^2 from x = 3 with d = -2 overshoots to the mirror point; the
  // first backtrack lands at 1.4 and passes.
  auto shifted = [](const Vec& z) { return 5 * (z[0] - 2) * (z[0] - 2); };
  r = armijo_search(shifted, Vec{{3.0}}, 5.0, Vec{{-2.0}}, Vec{{10.0}}, 0.01, 0.8, 50);
  CHECK(r.success);
  CHECK(r.tau == 1);
  CHECK(r.step == doctest::Approx(0.8));
  CHECK(r.f_new == doctest::Approx(1.8));

  // tau_max = 0 allows only the full step.
  r = armijo_search(shifted, Vec{{3.0}}, 5.0, Vec{{-2.0}}, Vec{{10.0}}, 0.01, 0.8, 0);
  CHECK_FALSE(r.success);
}

TEST_CASE("damped bfgs examples") {
  const Mat I = Mat::Identity(3, 3);
  const Vec s{{1.0, -2.0, 0.5}};
  for (BfgsDenominator mode : {BfgsDenominator::Paper, BfgsDenominator::Conventional}) {
    const BfgsUpdate u = damped_bfgs(I, s, s, mode);
    CHECK(u.theta == 1.0);
    CHECK((u.B - I).lpNorm<Eigen::Infinity>() < 1e-14);
  }
  // y^T s = 0.1 s^T B s.
  const Vec y = 0.1 * s;
  CHECK(damped_bfgs(I, s, y, BfgsDenominator::Paper).theta == doctest::Approx(8.0 / 9.0));

  const BfgsUpdate skip = damped_bfgs(I, Vec::Zero(3), y, BfgsDenominator::Paper);
  CHECK(skip.skipped);
  CHECK(skip.B == I);
}

TEST_CASE("damped bfgs fuzz: symmetry always, definiteness in conventional mode") {
  std::mt19937 rng(2024);
  int paper_lost = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int m = 2 + trial % 6;
    Mat a(m, m);
    for (int i = 0; i < m; ++i) a.row(i) = testing::uniform(rng, m, -1.0, 1.0).transpose();
    const Mat B = a * a.transpose() + 1e-2 * Mat::Identity(m, m);
    const Vec s = testing::uniform(rng, m, -1.0, 1.0);
    const Vec y = testing::uniform(rng, m, -1.0, 1.0);
    for (BfgsDenominator mode : {BfgsDenominator::Paper, BfgsDenominator::Conventional}) {
      const BfgsUpdate u = damped_bfgs(B, s, y, mode);
      CHECK((u.B - u.B.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12);
      const double low = Eigen::SelfAdjointEigenSolver<Mat>(u.B).eigenvalues().minCoeff();
      if (mode == BfgsDenominator::Conventional) {
        CAPTURE(trial);
        CHECK(low > 0.0);
        // Secant condition on the damped vector.
        const Vec r = u.theta * y + (1 - u.theta) * B * s;
        CHECK((u.B * s - r).norm() <= 1e-8 * (1 + r.norm()));
      } else if (low <= 0.0) {
        ++paper_lost;
      }
    }
  }
  MESSAGE("paper-mode updates without positive definiteness: " << paper_lost);
}

namespace {

// Smooth convex test problem on the budget hyperplane.
struct Quadratic {
  Vec c{{1.0, 2.0, 1.5, 1.0}};
  Vec target{{3.0, 0.5, 2.0, -1.0}};
  std::atomic<long> calls{0};
  // Set when the optimizer evaluates a point outside the feasible set.
  std::atomic<bool> infeasible_point{false};

  Problem problem() {
    Problem p;
    p.c = c;
    p.volume_budget = 8.0;
    p.objective = [this](const Vec& x) {
      ++calls;
      if (c.dot(x) > 8.0 * (1 + 1e-9) || (x.array() < -1e-12).any()) infeasible_point = true;
      return (x - target).squaredNorm();
    };
    return p;
  }
};

}  // namespace

TEST_CASE("minimize on a smooth problem") {
  Quadratic q;
  SqpConfig cfg;
  cfg.radius = 0.5;
  cfg.radius_min = 1e-6;
  cfg.eps_direction = 1e-8;
  for (BfgsDenominator mode : {BfgsDenominator::Paper, BfgsDenominator::Conventional}) {
    cfg.bfgs = mode;
    q.calls = 0;
    const Vec x0 = Vec::Constant(4, 8.0 / q.c.sum());
    const MinimizeResult r = minimize(q.problem(), x0, cfg);
    // KKT solution of min ||x - t||^2, c^T x <= 8, x >= 0: x4 = 0 and the
    // rest project onto the budget plane.
    const Vec c3 = q.c.head(3);
    const Vec t3 = q.target.head(3);
    const Vec x3 = t3 - (c3.dot(t3) - 8.0) / c3.squaredNorm() * c3;
    CHECK((r.x.head(3) - x3).norm() < 5e-3);
    CHECK(r.x[3] < 1e-3);

    // Instrumentation: every objective call is counted once.
    CHECK(r.stats.objective_evaluations == q.calls);
    CHECK_FALSE(q.infeasible_point);
    int qps = 0, stencil_failures = 0, ls_failures = 0;
    for (const IterationRecord& rec : r.trace) {
      if (!std::isnan(rec.d_norm)) ++qps;
      stencil_failures += rec.stencil_failure;
      ls_failures += rec.line_search_failure;
    }
    CHECK(r.stats.qp_solves == qps);
    CHECK(r.stats.stencil_failures == stencil_failures);
    CHECK(r.stats.line_search_failures == ls_failures);
  }
}

TEST_CASE("paper-mode definiteness loss switches to conventional updates") {
  // Max of affine pieces at truss-like scale: gradients of order 1e-3 against
  // areas of 1e3 and y_k = 0 away from the kinks, so paper-mode curvature
  // collapses.
  int seen = 0;
  for (unsigned seed = 0; seed < 20 && seen < 3; ++seed) {
    std::mt19937 rng(seed);
    const int m = 6;
    Mat A(40, m);
    for (int k = 0; k < 40; ++k) A.row(k) = testing::uniform(rng, m, -2.0, 2.0).transpose();
    const Vec b = testing::uniform(rng, 40, -2.0, 2.0);
    Problem p;
    p.c = Vec::Ones(m);
    p.volume_budget = 6000.0;
    p.objective = [&](const Vec& x) {
      const double low = std::min(0.0, (x.array() - 200.0).minCoeff());
      return -0.01 * low + (A * x / 1000.0 + b).maxCoeff();
    };
    const Vec x0 = Vec::Constant(m, 1000.0);
    SqpConfig cfg;
    int lost_at = -1;
    try {
      minimize(p, x0, cfg);
    } catch (const PositiveDefinitenessLost&) {
      lost_at = 0;
    }
    if (lost_at < 0) continue;
    ++seen;
    cfg.switch_on_pd_loss = true;
    const MinimizeResult r = minimize(p, x0, cfg);
    CAPTURE(seed);
    REQUIRE(r.stats.bfgs_switch_iteration >= 0);
    CHECK(r.stats.bfgs_switch_iteration <= r.iterations);
    double f = r.trace.front().f;
    for (const IterationRecord& rec : r.trace) {
      CHECK(rec.f <= f);
      f = rec.f;
    }
    CHECK(r.f <= r.trace.front().f);
    // Conventional mode never loses definiteness, so the run ends normally.
    CHECK(r.termination != Termination::IterationLimit);
  }
  CHECK(seen > 0);
}

TEST_CASE("trace invariants on example II") {
  const Instance inst = builtin_example(BuiltinExample::II);
  SqpConfig cfg;
  cfg.bfgs = BfgsDenominator::Conventional;
  cfg.max_iterations = 60;
  const RunResult r = run(inst.structure, 1, 0.0, inst.design, cfg);
  const Vec c = inst.structure.lengths();
  const double v = inst.design.volume_budget;

  // Replay the accepted steps: feasibility at every iterate, radius never
  // grows, objective strictly decreases across accepted steps.
  REQUIRE(!r.run.trace.empty());
  double radius = cfg.radius;
  double f = r.run.trace.front().f;
  long lps = 0;
  for (const IterationRecord& rec : r.run.trace) {
    CHECK(rec.radius <= radius);
    radius = rec.radius;
    CHECK(rec.f <= f);
    f = rec.f;
    CHECK(rec.lp_count >= lps);
    lps = rec.lp_count;
  }
  CHECK(r.run.f < r.run.trace.front().f);
  CHECK(c.dot(r.design.areas) <= v * (1 + 1e-9));
  CHECK((r.design.areas.array() >= -1e-12).all());
  CHECK(r.worst.f_value == doctest::Approx(r.run.f));
  CHECK(r.lp_count == lps);
  CHECK(r.run.termination == Termination::IterationLimit);
}

TEST_CASE("unstable start is rejected") {
  const Instance inst = builtin_example(BuiltinExample::I);
  CHECK_THROWS_AS(run(inst.structure, 3, 0.0, inst.design, SqpConfig{}), InfeasibleStart);
  Design infeasible = inst.design;
  infeasible.areas *= 2.0;
  CHECK_THROWS_AS(run(inst.structure, 1, 0.0, infeasible, SqpConfig{}), std::invalid_argument);
}

TEST_CASE("configuration checks") {
  SqpConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.radius_min = 200.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SqpConfig{};
  cfg.rho = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SqpConfig{};
  cfg.tau_max = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("trace csv") {
  IterationRecord rec;
  rec.k = 3;
  rec.radius = 56.25;
  rec.f = -12.5;
  rec.d_norm = std::nan("");
  rec.lp_count = 40;
  CHECK(trace_csv({rec}) == "k,r,f,d_norm,step,lp_count\n3,56.25,-12.5,nan,0,40\n");
}
