#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chebdir/oracle.hpp"

using namespace chebdir;
using Catch::Matchers::WithinAbs;

namespace {

GradientSet toy_instance() {
  Vec g1(3), g2(3), g3(3);
  g1 << 5.0, 0.0, 0.0;
  g2 << 0.0, 3.0, 0.0;
  g3 << 0.2, 14.0 / 15.0, 2.0 * std::sqrt(5.0) / 15.0;
  return GradientSet({g1, g2, g3}, NormParam::l2());
}

}  // namespace

TEST_CASE("brute-force primal search") {
  SECTION("toy instance radius") {
    const auto [v, phi] = primal_brute(toy_instance());
    CHECK_THAT(phi, WithinAbs(1.0 / std::sqrt(2.0), 1e-4));
  }
  SECTION("single objective reaches one") {
    Vec g(4);
    g << 1.0, -2.0, 0.5, 0.25;
    const auto [v, phi] = primal_brute(GradientSet({g}, NormParam::l2()));
    CHECK_THAT(phi, WithinAbs(1.0, 1e-6));
  }
  SECTION("antipodal pair pins the radius at zero") {
    Vec g(3);
    g << 1.0, 1.0, -0.5;
    const auto [v, phi] = primal_brute(GradientSet({g, -g}, NormParam::l2()));
    CHECK_THAT(phi, WithinAbs(0.0, 1e-4));
  }
  SECTION("dimension cap") {
    GradientSet big({Vec::Ones(11)}, NormParam::l2());
    CHECK_THROWS_AS(primal_brute(big), DimensionCapExceeded);
  }
}

TEST_CASE("oracle never exceeds the dual value") {
  Rng rng(512);
  const double ps[] = {1.5, 2.0, 3.0};
  for (int trial = 0; trial < 40; ++trial) {
    const NormParam p = NormParam{ps[trial % 3]};
    GradientSet gs = random_gradient_set(rng, rng.uniform_int(2, 5), rng.uniform_int(3, 8), p);
    const double dual = dual_optimum(gs);
    const double phi = primal_brute(gs, 16, 500, 1000 + trial).second;
    CHECK(phi <= dual + 1e-8);
  }
}

TEST_CASE("duality gap check on fixed instances") {
  OracleReport rep = duality_gap_check(toy_instance());
  CHECK(rep.pass);
  CHECK_THAT(rep.solver_value, WithinAbs(1.0 / std::sqrt(2.0), 1e-9));
}

TEST_CASE("duality suite sample passes") {
  for (const auto& rep : duality_suite(20260801, 30)) {
    INFO(rep.instance << " gap=" << rep.gap);
    CHECK(rep.pass);
  }
}

TEST_CASE("LP duality against explicit vertex enumeration") {
  Rng rng(613);
  for (int trial = 0; trial < 30; ++trial) {
    const NormParam p = (trial % 2 == 0) ? NormParam::l1() : NormParam::linf();
    const int m = rng.uniform_int(1, 3);
    const int n = rng.uniform_int(2, 3);
    GradientSet gs = random_gradient_set(rng, m, n, p);
    const double lp_value = solve_dual_lp(gs).second;
    const double enum_value = primal_enum_tiny(gs);
    CHECK_THAT(lp_value, WithinAbs(enum_value, 1e-6));
  }
}

TEST_CASE("finite-difference gradients") {
  SECTION("quadratic") {
    Vec theta(2);
    theta << 1.0, -2.0;
    const Vec g = fd_gradient([](const Vec& t) { return 0.5 * t.squaredNorm(); }, theta);
    CHECK_THAT(g[0], WithinAbs(1.0, 1e-9));
    CHECK_THAT(g[1], WithinAbs(-2.0, 1e-9));
  }
  SECTION("constant loss") {
    const Vec g = fd_gradient([](const Vec&) { return 3.5; }, Vec::Ones(4));
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("descent inequality on quadratic ensembles") {
  SECTION("shared minimum terminates at it") {
    QuadraticEnsemble ens;
    Mat h1 = Mat::Identity(1, 1), h2 = Mat::Identity(1, 1) * 3.0;
    ens.losses.push_back({h1, Vec::Zero(1)});
    ens.losses.push_back({h2, Vec::Zero(1)});
    const OracleReport rep = descent_check(ens, 5000);
    CHECK(rep.pass);
    CHECK(rep.solver_value < 1e-10);  // final total loss at the shared minimum
  }
  SECTION("conflicting two-dimensional pair") {
    QuadraticEnsemble ens;
    Mat h = Mat::Identity(2, 2);
    Vec c1(2), c2(2);
    c1 << 1.0, 0.0;
    c2 << -1.0, 0.5;
    ens.losses.push_back({h, c1});
    ens.losses.push_back({2.0 * h, c2});
    const OracleReport rep = descent_check(ens, 500);
    CHECK(rep.pass);
  }
  SECTION("single quadratic is plain gradient descent") {
    QuadraticEnsemble ens;
    Mat h(2, 2);
    h << 2.0, 0.3, 0.3, 1.0;
    ens.losses.push_back({h, Vec::Ones(2)});
    const OracleReport rep = descent_check(ens, 300);
    CHECK(rep.pass);
  }
}

TEST_CASE("descent suite sample passes") {
  for (const auto& rep : descent_suite(20260802, 10, 300)) {
    INFO(rep.instance);
    CHECK(rep.pass);
  }
}

TEST_CASE("lq smoothness constants cover the l2 one") {
  Rng rng(714);
  QuadraticEnsemble ens = QuadraticEnsemble::random(rng, 2, 4);
  const double b2 = smoothness_lq(ens, NormParam::l2());
  CHECK_THAT(b2, WithinAbs(ens.smoothness_l2(), 1e-12));
  CHECK(smoothness_lq(ens, NormParam::of(1.5)) >= b2);  // q = 3 needs the dimension factor
  CHECK_THAT(smoothness_lq(ens, NormParam::of(3.0)), WithinAbs(b2, 1e-12));  // q = 1.5 <= 2
}
