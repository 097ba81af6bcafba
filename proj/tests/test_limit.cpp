#include "support.hpp"

#include "trussred/limit.hpp"
#include "trussred/worstcase.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace trussred;

namespace {

// Upper-bound (kinematic) formulation of the same load factor:
//   min  sum_i sigma_y a_i |b_i^T u| - p_d^T u   s.t.  p_r^T u = 1.
// Returns -inf when the minimum is unbounded below.
double kinematic_lambda(const GroundStructure& gs, const Vec& areas) {
  const int m = gs.num_members(), d = gs.num_dofs();
  const double scale = std::max(gs.reference_load().lpNorm<Eigen::Infinity>(),
                                gs.dead_load().lpNorm<Eigen::Infinity>());
  lp::LpProblem p;
  const int n = d + 2 * m;
  p.objective = Vec::Zero(n);
  p.A = Mat::Zero(m + 1, n);
  p.b = Vec::Zero(m + 1);
  p.lower = Vec::Zero(n);
  p.upper = Vec::Constant(n, lp::kInf);
  p.lower.head(d).setConstant(-lp::kInf);
  p.objective.head(d) = gs.dead_load() / scale;
  for (int i = 0; i < m; ++i) {
    p.A.block(i, 0, 1, d) = gs.equilibrium().col(i).transpose();
    p.A(i, d + i) = -1.0;
    p.A(i, d + m + i) = 1.0;
    const double cap = gs.yield_stress() * areas[i] / scale;
    p.objective[d + i] = -cap;
    p.objective[d + m + i] = -cap;
  }
  p.A.block(m, 0, 1, d) = gs.reference_load().transpose() / scale;
  p.b[m] = 1.0;
  const lp::LpSolution s = lp::solve_lp(p);
  if (s.status == lp::LpStatus::Unbounded) return -INFINITY;
  REQUIRE(s.status == lp::LpStatus::Optimal);
  return -s.objective;
}

}  // namespace

TEST_CASE("single bar load factor") {
  const GroundStructure gs = testing::single_bar(1000.0);
  const LimitResult r = limit_load_factor(gs, Vec::Constant(1, 40.0));
  REQUIRE(r.status == LimitStatus::Optimal);
  CHECK(r.lambda == doctest::Approx(250.0 * 40.0 / 1000.0));
  CHECK(r.forces[0] == doctest::Approx(10000.0));

  // Reversed load: compression has the same capacity.
  CHECK(limit_load_factor(testing::single_bar(-1000.0), Vec::Constant(1, 40.0)).lambda ==
        doctest::Approx(10.0));

  // Dead load eats part of the capacity.
  CHECK(limit_load_factor(testing::single_bar(1000.0, 4000.0), Vec::Constant(1, 40.0)).lambda ==
        doctest::Approx(6.0));
}

TEST_CASE("mechanism, overload and unbounded outcomes") {
  const GroundStructure loaded = testing::two_bar();
  LimitResult r = limit_load_factor(loaded, Vec{{40.0, 0.0}});
  CHECK(r.status == LimitStatus::MechanismOrOverload);
  CHECK(r.lambda == -INFINITY);
  // Dead load above the capacity of the vertical bar.
  r = limit_load_factor(loaded, Vec{{40.0, 10.0}});
  CHECK(r.status == LimitStatus::MechanismOrOverload);
  r = limit_load_factor(loaded, Vec{{40.0, 20.0}});
  CHECK(r.status == LimitStatus::Optimal);
  CHECK(r.lambda == doctest::Approx(10.0));

  // Collinear loads: a negative factor can cancel the dead load, so a
  // zero-area bar is still "carried" at lambda = -4.
  r = limit_load_factor(testing::single_bar(1000.0, 4000.0), Vec::Zero(1));
  CHECK(r.status == LimitStatus::Optimal);
  CHECK(r.lambda == doctest::Approx(-4.0));

  // Without dead load a zero-area bar gives lambda = 0, not a failure.
  r = limit_load_factor(testing::single_bar(1000.0), Vec::Zero(1));
  CHECK(r.status == LimitStatus::Optimal);
  CHECK(r.lambda == doctest::Approx(0.0));

  // Reference load with no component a member can resist: load factor unbounded
  // only if p_r vanishes in every free dof.
  r = limit_load_factor(testing::single_bar(0.0, 100.0), Vec::Constant(1, 1.0));
  CHECK(r.status == LimitStatus::Unbounded);
  CHECK(r.lambda == INFINITY);
}

TEST_CASE("built-in intact designs against frozen kinematic values") {
  const Instance one = builtin_example(BuiltinExample::I);
  const Instance two = builtin_example(BuiltinExample::II);
  const double k1 = kinematic_lambda(one.structure, one.design.areas);
  const double k2 = kinematic_lambda(two.structure, two.design.areas);
  CHECK(k1 == doctest::Approx(11.5777087640).epsilon(1e-9));
  CHECK(k2 == doctest::Approx(9.788854382).epsilon(1e-9));
  CHECK(limit_load_factor(one.structure, one.design.areas).lambda == doctest::Approx(k1).epsilon(1e-9));
  CHECK(limit_load_factor(two.structure, two.design.areas).lambda == doctest::Approx(k2).epsilon(1e-9));
}

TEST_CASE("static and kinematic formulations agree on random designs") {
  std::mt19937 rng(314);
  for (BuiltinExample ex : {BuiltinExample::I, BuiltinExample::II}) {
    const GroundStructure gs = builtin_example(ex).structure;
    for (int trial = 0; trial < 40; ++trial) {
      Vec x = testing::uniform(rng, 19, 0.0, 2000.0);
      // Knock out a few members to reach mechanisms now and then.
      for (int k = 0; k < trial % 4; ++k) x[std::uniform_int_distribution<int>(0, 18)(rng)] = 0.0;
      const LimitResult r = limit_load_factor(gs, x);
      const double k = kinematic_lambda(gs, x);
      CAPTURE(trial);
      if (std::isinf(k)) {
        CHECK(r.lambda == k);
      } else {
        CHECK(r.lambda == doctest::Approx(k).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("equilibrium and yield hold for the returned forces") {
  const Instance inst = builtin_example(BuiltinExample::I);
  const GroundStructure& gs = inst.structure;
  const LimitResult r = limit_load_factor(gs, inst.design.areas);
  const Vec residual = gs.equilibrium() * r.forces - r.lambda * gs.reference_load() - gs.dead_load();
  CHECK(residual.lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK((r.forces.cwiseAbs().array() <= gs.yield_stress() * inst.design.areas.array() + 1e-6).all());
}

TEST_CASE("load factor is monotone in the areas (200 random pairs)") {
  std::mt19937 rng(2718);
  const GroundStructure gs = builtin_example(BuiltinExample::I).structure;
  for (int trial = 0; trial < 200; ++trial) {
    Vec x = testing::uniform(rng, 19, 0.0, 2000.0);
    if (trial % 3 == 0) x[trial % 19] = 0.0;
    const Vec bigger = x + testing::uniform(rng, 19, 0.0, 500.0);
    const double a = limit_load_factor(gs, x).lambda;
    const double b = limit_load_factor(gs, bigger).lambda;
    CAPTURE(trial);
    CHECK(a <= b + 1e-9 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("vanishing areas count as zero capacity") {
  const GroundStructure gs = testing::single_bar(1000.0);
  CHECK(limit_load_factor(gs, Vec::Constant(1, 1e-13)).lambda == 0.0);
  CHECK(limit_load_factor(gs, Vec::Constant(1, 1e-11)).lambda > 0.0);
}

TEST_CASE("classical limit design of example I") {
  const Instance inst = builtin_example(BuiltinExample::I);
  const GroundStructure& gs = inst.structure;
  const LimitDesign ld = classical_limit_design(gs, inst.design.volume_budget);
  // Frozen from an independent LP solve (scipy HiGHS) of the same plastic design.
  CHECK(ld.lambda == doctest::Approx(35.23940438).epsilon(1e-8));
  CHECK(volume(ld.design.areas, gs) <= inst.design.volume_budget * (1 + 1e-9));
  CHECK(limit_load_factor(gs, ld.design.areas).lambda == doctest::Approx(ld.lambda).epsilon(1e-8));
  CHECK(count_members(ld.design.areas) == 9);
  CHECK(ld.statically_determinate);
  const RedundancyResult rr = strong_redundancy(gs, ld.design.areas, -ld.lambda * (1 - 1e-9), 0.0);
  CHECK_FALSE(rr.nominal_violation);
  CHECK(rr.alpha_hat == 0);
}

TEST_CASE("classical limit design of example II has no redundancy") {
  const Instance inst = builtin_example(BuiltinExample::II);
  const LimitDesign ld = classical_limit_design(inst.structure, inst.design.volume_budget);
  CHECK(ld.lambda == doctest::Approx(17.61970219).epsilon(1e-8));
  CHECK(count_members(ld.design.areas) == 6);
  // Without dead load any single loss leaves lambda = 0.
  const WorstCaseResult w = worst_case(inst.structure, ld.design.areas, 1, 0.0);
  CHECK(w.worst_lambda == doctest::Approx(0.0));
}

TEST_CASE("limit design scales linearly with the budget when p_d = 0") {
  const Instance inst = builtin_example(BuiltinExample::II);
  const double v = inst.design.volume_budget;
  const double a = classical_limit_design(inst.structure, v).lambda;
  const double b = classical_limit_design(inst.structure, 2 * v).lambda;
  CHECK(b == doctest::Approx(2 * a).epsilon(1e-9));
}

TEST_CASE("limit design dominates random feasible designs") {
  std::mt19937 rng(11);
  const Instance inst = builtin_example(BuiltinExample::I);
  const GroundStructure& gs = inst.structure;
  const double best = classical_limit_design(gs, inst.design.volume_budget).lambda;
  for (int trial = 0; trial < 30; ++trial) {
    Vec x = testing::uniform(rng, 19, 0.0, 1.0);
    x *= inst.design.volume_budget / volume(x, gs);
    CHECK(limit_load_factor(gs, x).lambda <= best * (1 + 1e-9));
  }
}

TEST_CASE("determinacy test") {
  const GroundStructure gs = builtin_example(BuiltinExample::I).structure;
  CHECK_FALSE(statically_determinate(gs, Vec::Constant(19, 1.0)));
  Vec x = Vec::Zero(19);
  x[0] = x[3] = 1.0;
  CHECK(statically_determinate(gs, x));
  CHECK_FALSE(statically_determinate(gs, Vec::Zero(19)));
}
