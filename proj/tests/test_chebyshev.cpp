#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chebdir/chebyshev.hpp"
#include "chebdir/oracle.hpp"

using namespace chebdir;
using Catch::Matchers::WithinAbs;

namespace {

GradientSet toy_instance(double c1 = 1.0, double c2 = 1.0, double c3 = 1.0) {
  Vec g1(3), g2(3), g3(3);
  g1 << 5.0, 0.0, 0.0;
  g2 << 0.0, 3.0, 0.0;
  g3 << 0.2, 14.0 / 15.0, 2.0 * std::sqrt(5.0) / 15.0;
  return GradientSet({c1 * g1, c2 * g2, c3 * g3}, NormParam::l2());
}

double dual_objective(const GradientSet& gs, const Vec& alpha) {
  return lp_norm(gs.combine_normalized(alpha), gs.norm_param());
}

}  // namespace

TEST_CASE("two-loss exact solver") {
  GradientSet ortho({Vec::Unit(2, 0), Vec::Unit(2, 1)}, NormParam::l2());
  Vec a = solve_dual_exact2(ortho).alpha;
  CHECK_THAT(a[0], WithinAbs(0.5, 0.0));
  CHECK_THAT(a[1], WithinAbs(0.5, 0.0));

  Vec g(2);
  g << 0.3, 0.4;
  GradientSet same({g, g}, NormParam::l2());
  a = solve_dual_exact2(same).alpha;
  CHECK_THAT(a[0], WithinAbs(0.5, 0.0));

  GradientSet anti({g, -g}, NormParam::l2());
  a = solve_dual_exact2(anti).alpha;
  CHECK(lp_norm(anti.combine_normalized(a), NormParam::l2()) < 1e-15);

  CHECK_THROWS_AS(solve_dual_exact2(toy_instance()), WrongArity);
  GradientSet p3({Vec::Unit(2, 0), Vec::Unit(2, 1)}, NormParam::of(3.0));
  CHECK_THROWS_AS(solve_dual_exact2(p3), UnsupportedNorm);
}

TEST_CASE("three-loss exact solver branches") {
  SECTION("toy instance lands on the first edge") {
    const Vec a = solve_dual_exact3(toy_instance()).alpha;
    CHECK_THAT(a[0], WithinAbs(0.5, 1e-12));
    CHECK_THAT(a[1], WithinAbs(0.5, 1e-12));
    CHECK_THAT(a[2], WithinAbs(0.0, 1e-12));
  }
  SECTION("orthonormal triple stays interior") {
    GradientSet gs({Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)}, NormParam::l2());
    const Vec a = solve_dual_exact3(gs).alpha;
    for (int i = 0; i < 3; ++i) CHECK_THAT(a[i], WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THAT(dual_objective(gs, a), WithinAbs(1.0 / std::sqrt(3.0), 1e-12));
  }
  SECTION("zero in the hull is detected") {
    Vec g3 = -(Vec::Unit(3, 0) + Vec::Unit(3, 1)) / std::sqrt(2.0);
    GradientSet gs({Vec::Unit(3, 0), Vec::Unit(3, 1), g3}, NormParam::l2());
    const Vec a = solve_dual_exact3(gs).alpha;
    CHECK(a.minCoeff() >= 0.0);
    CHECK_THAT(a.sum(), WithinAbs(1.0, 1e-9));
    CHECK(dual_objective(gs, a) < 1e-9);
  }
  SECTION("arity is enforced") {
    GradientSet two({Vec::Unit(2, 0), Vec::Unit(2, 1)}, NormParam::l2());
    CHECK_THROWS_AS(solve_dual_exact3(two), WrongArity);
  }
}

TEST_CASE("Frank-Wolfe dual solver") {
  SECTION("single objective is immediate") {
    GradientSet gs({Vec::Unit(4, 2)}, NormParam::of(1.5));
    const Vec a = solve_dual_fw(gs).alpha;
    REQUIRE(a.size() == 1);
    CHECK_THAT(a[0], WithinAbs(1.0, 0.0));
  }
  SECTION("toy instance objective reaches the known optimum") {
    const Vec a = solve_dual_fw(toy_instance(), 5000, 1e-12).alpha;
    CHECK_THAT(dual_objective(toy_instance(), a), WithinAbs(1.0 / std::sqrt(2.0), 1e-6));
  }
  SECTION("random four-objective instances match the brute-force oracle") {
    Rng rng(515);
    for (int trial = 0; trial < 10; ++trial) {
      GradientSet gs = random_gradient_set(rng, 4, 6, NormParam::l2());
      const Vec a = solve_dual_fw(gs, 50000, 1e-10).alpha;
      const double oracle = primal_brute(gs, 64, 2000, 99 + trial).second;
      CHECK_THAT(dual_objective(gs, a), WithinAbs(oracle, 1e-5));
    }
  }
  SECTION("p outside (1,inf) is rejected") {
    GradientSet gs({Vec::Unit(2, 0), Vec::Unit(2, 1)}, NormParam::l1());
    CHECK_THROWS_AS(solve_dual_fw(gs), UnsupportedNorm);
  }
}

TEST_CASE("LP dual solver") {
  SECTION("single gradient at p = inf") {
    GradientSet gs({Vec::Unit(2, 0)}, NormParam::linf());
    const auto [a, r] = solve_dual_lp(gs);
    CHECK_THAT(a.alpha[0], WithinAbs(1.0, 1e-9));
    CHECK_THAT(r, WithinAbs(1.0, 1e-9));
  }
  SECTION("cancellation at p = 1") {
    GradientSet gs({Vec::Unit(2, 0), -Vec::Unit(2, 0)}, NormParam::l1());
    const auto [a, r] = solve_dual_lp(gs);
    CHECK_THAT(r, WithinAbs(0.0, 1e-9));
    CHECK_THAT(a.alpha[0], WithinAbs(0.5, 1e-9));
  }
  SECTION("orthogonal pair at p = inf") {
    GradientSet gs({Vec::Unit(2, 0), Vec::Unit(2, 1)}, NormParam::linf());
    const auto [a, r] = solve_dual_lp(gs);
    CHECK_THAT(r, WithinAbs(0.5, 1e-9));
    CHECK_THAT(a.alpha[0], WithinAbs(0.5, 1e-9));
    CHECK_THAT(a.alpha[1], WithinAbs(0.5, 1e-9));
  }
  SECTION("dimension cap") {
    std::vector<Vec> grads = {Vec::Ones(kLpDimensionCap + 1)};
    GradientSet gs(grads, NormParam::l1());
    CHECK_THROWS_AS(solve_dual_lp(gs), DimensionCapExceeded);
  }
  SECTION("p = 2 rejected") {
    GradientSet gs({Vec::Unit(2, 0)}, NormParam::l2());
    CHECK_THROWS_AS(solve_dual_lp(gs), UnsupportedNorm);
  }
}

TEST_CASE("closed-form primal recovery") {
  SECTION("Euclidean case is plain normalization") {
    Vec g(3);
    g << 3.0, 4.0, 0.0;
    GradientSet gs({g}, NormParam::l2());
    const PrimalRecovery rec = recover_primal(SimplexWeights{Vec::Ones(1)}, gs);
    CHECK_THAT(rec.v[0], WithinAbs(0.6, 1e-12));
    CHECK_THAT(rec.v[1], WithinAbs(0.8, 1e-12));
    CHECK_THAT(rec.v[2], WithinAbs(0.0, 0.0));
  }
  SECTION("p = 3 support map") {
    Vec g(3);
    g << 1.0, 1.0, 0.0;
    GradientSet gs({g}, NormParam::of(3.0));
    const PrimalRecovery rec = recover_primal(SimplexWeights{Vec::Ones(1)}, gs);
    const double want = std::pow(2.0, -2.0 / 3.0);
    CHECK_THAT(rec.v[0], WithinAbs(want, 1e-12));
    CHECK_THAT(rec.v[1], WithinAbs(want, 1e-12));
    CHECK_THAT(lp_norm(rec.v, NormParam::of(1.5)), WithinAbs(1.0, 1e-12));
    CHECK_THAT(compensated_dot(rec.w, rec.v), WithinAbs(rec.r_star, 1e-12));
  }
  SECTION("vanished aggregate is degenerate") {
    Vec g(2);
    g << 0.7, -0.3;
    GradientSet gs({g, -g}, NormParam::of(1.5));
    Vec half(2);
    half << 0.5, 0.5;
    CHECK_THROWS_AS(recover_primal(SimplexWeights{half}, gs), DegenerateDirection);
  }
}

TEST_CASE("LP primal recovery") {
  SECTION("single constraint, q = inf") {
    GradientSet gs({Vec::Unit(2, 0)}, NormParam::l1());
    const Vec v = recover_primal_lp(SimplexWeights{Vec::Ones(1)}, gs);
    CHECK(gs.normalized(0).dot(v) >= 1.0 - 1e-8);
    CHECK(lp_norm(v, NormParam::linf()) <= 1.0 + 1e-9);
  }
  SECTION("orthogonal pair, q = 1 has the unique corner") {
    GradientSet gs({Vec::Unit(2, 0), Vec::Unit(2, 1)}, NormParam::linf());
    const Vec v = recover_primal_lp(SimplexWeights{Vec::Constant(2, 0.5)}, gs);
    CHECK_THAT(v[0], WithinAbs(0.5, 1e-9));
    CHECK_THAT(v[1], WithinAbs(0.5, 1e-9));
  }
  SECTION("zero radius still yields a feasible point") {
    GradientSet gs({Vec::Unit(2, 0), -Vec::Unit(2, 0)}, NormParam::l1());
    const Vec v = recover_primal_lp(SimplexWeights{Vec::Constant(2, 0.5)}, gs);
    CHECK(gs.normalized(0).dot(v) >= -1e-8);
    CHECK(gs.normalized(1).dot(v) >= -1e-8);
    CHECK(lp_norm(v, NormParam::linf()) <= 1.0 + 1e-9);
  }
}

TEST_CASE("direction assembly on the toy instance") {
  const DirectionResult res = compute_direction(toy_instance(), 1e-6);
  REQUIRE_FALSE(res.terminated);
  const double s2 = std::sqrt(2.0);
  CHECK_THAT((*res.v)[0], WithinAbs(1.0 / s2, 1e-9));
  CHECK_THAT((*res.v)[1], WithinAbs(1.0 / s2, 1e-9));
  CHECK_THAT((*res.v)[2], WithinAbs(0.0, 1e-9));
  CHECK_THAT(res.r_star, WithinAbs(1.0 / s2, 1e-9));
  CHECK(res.active[0]);
  CHECK(res.active[1]);
  CHECK_FALSE(res.active[2]);
  CHECK_THAT((*res.d)[0], WithinAbs(137.0 / 30.0, 1e-9));
  CHECK_THAT((*res.d)[1], WithinAbs(137.0 / 30.0, 1e-9));
  CHECK_THAT((*res.d)[2], WithinAbs(0.0, 1e-9));
}

TEST_CASE("direction assembly edge cases") {
  SECTION("antipodal pair terminates") {
    Vec g(2);
    g << 1.0, 2.0;
    GradientSet gs({g, -g}, NormParam::l2());
    const DirectionResult res = compute_direction(gs, 1e-6);
    CHECK(res.terminated);
    CHECK_FALSE(res.v.has_value());
    CHECK_FALSE(res.d.has_value());
  }
  SECTION("single objective reduces to the normalized gradient") {
    Vec g(2);
    g << 0.0, 2.0;
    GradientSet gs({g}, NormParam::l2());
    const DirectionResult res = compute_direction(gs, 1e-6);
    CHECK_THAT((*res.v)[1], WithinAbs(1.0, 1e-12));
    CHECK_THAT(res.r_star, WithinAbs(1.0, 1e-12));
    CHECK_THAT((*res.d)[1], WithinAbs(2.0, 1e-12));
    CHECK_THAT((*res.d)[0], WithinAbs(0.0, 1e-12));
  }
  SECTION("LP path marks possible non-uniqueness") {
    GradientSet gs({Vec::Unit(2, 0)}, NormParam::l1());
    const DirectionResult res = compute_direction(gs, 1e-6);
    CHECK(res.nonunique_possible);
    CHECK_FALSE(res.terminated);
  }
}

TEST_CASE("dual cone membership of selected directions") {
  Rng rng(616);
  const double ps[] = {1.5, 2.0, 3.0, 1.0, std::numeric_limits<double>::infinity()};
  for (int trial = 0; trial < 60; ++trial) {
    const NormParam p = NormParam{ps[trial % 5]};
    GradientSet gs = random_gradient_set(rng, rng.uniform_int(2, 5), rng.uniform_int(3, 8), p);
    const DirectionResult res = compute_direction(gs, 1e-6);
    if (res.terminated) continue;
    for (int i = 0; i < gs.count(); ++i) {
      CHECK(compensated_dot(gs.grad(i), *res.v) >= -1e-8 * gs.norm(i));
    }
  }
}

TEST_CASE("positive rescaling leaves the direction unchanged") {
  const DirectionResult base = compute_direction(toy_instance(), 1e-6);
  for (auto [c1, c2, c3] : {std::array<double, 3>{10.0, 0.1, 1.0},
                            std::array<double, 3>{1.0, 1.0, 100.0},
                            std::array<double, 3>{0.01, 5.0, 2.5}}) {
    const DirectionResult scaled = compute_direction(toy_instance(c1, c2, c3), 1e-6);
    CHECK((*scaled.v - *base.v).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("permuting objectives permutes weights and keeps the direction") {
  Rng rng(717);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> grads;
    for (int i = 0; i < 3; ++i) grads.push_back(rng.normal_vec(5));
    GradientSet gs(grads, NormParam::l2());
    GradientSet permuted({grads[2], grads[0], grads[1]}, NormParam::l2());
    const DirectionResult a = compute_direction(gs, 1e-6);
    const DirectionResult b = compute_direction(permuted, 1e-6);
    if (a.terminated || b.terminated) continue;
    CHECK((*a.v - *b.v).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THAT(b.alpha.alpha[0], WithinAbs(a.alpha.alpha[2], 1e-12));
    CHECK_THAT(b.alpha.alpha[1], WithinAbs(a.alpha.alpha[0], 1e-12));
    CHECK_THAT(b.alpha.alpha[2], WithinAbs(a.alpha.alpha[1], 1e-12));
  }
}

TEST_CASE("aggregate stays in the gradient cone") {
  Rng rng(818);
  for (int trial = 0; trial < 40; ++trial) {
    GradientSet gs = random_gradient_set(rng, rng.uniform_int(2, 5), 6, NormParam::l2());
    const DirectionResult res = compute_direction(gs, 1e-6);
    CHECK(res.alpha.alpha.minCoeff() >= 0.0);
    CHECK_THAT(res.alpha.alpha.sum(), WithinAbs(1.0, 1e-9));
    CHECK((gs.combine_normalized(res.alpha.alpha) - res.w).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("Holder equality at recovery") {
  Rng rng(919);
  const double ps[] = {1.5, 2.0, 3.0};
  for (int trial = 0; trial < 120; ++trial) {
    const NormParam p = NormParam{ps[trial % 3]};
    GradientSet gs = random_gradient_set(rng, rng.uniform_int(2, 5), rng.uniform_int(3, 8), p);
    const DirectionResult res = compute_direction(gs, 1e-6);
    if (res.terminated) continue;
    CHECK_THAT(compensated_dot(res.w, *res.v), WithinAbs(res.r_star, 1e-9));
    CHECK_THAT(lp_norm(*res.v, p.conjugate()), WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("exact and iterative three-loss solvers agree") {
  Rng rng(1020);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    GradientSet gs = random_gradient_set(rng, 3, rng.uniform_int(3, 8), NormParam::l2());
    const double exact = dual_objective(gs, solve_dual_exact3(gs).alpha);
    const double fw = dual_objective(gs, solve_dual_fw(gs, 100000, 1e-10).alpha);
    worst = std::max(worst, std::abs(exact - fw));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("objective count cap") {
  std::vector<Vec> grads(kMaxObjectives + 1, Vec::Ones(3));
  CHECK_THROWS_AS(GradientSet(grads, NormParam::l2()), DimensionCapExceeded);
}
