#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chebdir/numkit.hpp"

using namespace chebdir;
using Catch::Matchers::WithinAbs;

TEST_CASE("lp_norm matches closed forms") {
  Vec a(2);
  a << 3.0, 4.0;
  CHECK_THAT(lp_norm(a, NormParam::l2()), WithinAbs(5.0, 1e-14));

  Vec b(3);
  b << 1.0, 1.0, 0.0;
  CHECK_THAT(lp_norm(b, NormParam::of(3.0)), WithinAbs(std::cbrt(2.0), 1e-14));

  Vec c(2);
  c << -2.0, 1.0;
  CHECK_THAT(lp_norm(c, NormParam::linf()), WithinAbs(2.0, 0.0));

  CHECK(lp_norm(Vec::Zero(4), NormParam::of(1.5)) == 0.0);
}

TEST_CASE("conjugate exponents pair up") {
  CHECK(NormParam::l1().q() == std::numeric_limits<double>::infinity());
  CHECK(NormParam::linf().q() == 1.0);
  CHECK_THAT(NormParam::of(1.5).q(), WithinAbs(3.0, 1e-15));
  CHECK_THAT(NormParam::of(3.0).q(), WithinAbs(1.5, 1e-15));
  CHECK(NormParam::l2().q() == 2.0);
  CHECK_THROWS_AS(NormParam::of(0.5), UnsupportedNorm);
}

TEST_CASE("normalize_grad produces unit vectors") {
  Vec g1(3);
  g1 << 5.0, 0.0, 0.0;
  CHECK((normalize_grad(g1, NormParam::l2()) - Vec::Unit(3, 0)).norm() == 0.0);

  Vec g2(3);
  g2 << 0.0, 3.0, 0.0;
  CHECK((normalize_grad(g2, NormParam::l2()) - Vec::Unit(3, 1)).norm() == 0.0);

  CHECK_THROWS_AS(normalize_grad(Vec::Zero(2), NormParam::l2()), ZeroGradient);
}

TEST_CASE("normalized norms are one across p values") {
  Rng rng(101);
  for (double p : {1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()}) {
    const NormParam np{p};
    for (int trial = 0; trial < 50; ++trial) {
      Vec g = rng.normal_vec(6);
      if (lp_norm(g, np) < 1e-6) continue;
      CHECK_THAT(lp_norm(normalize_grad(g, np), np), WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("Holder inequality holds on random pairs") {
  Rng rng(202);
  for (double p : {1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()}) {
    const NormParam np{p};
    for (int trial = 0; trial < 50; ++trial) {
      const Vec x = rng.normal_vec(7);
      const Vec y = rng.normal_vec(7);
      CHECK(std::abs(compensated_dot(x, y)) <=
            lp_norm(x, np) * lp_norm(y, np.conjugate()) + 1e-12);
    }
  }
}

TEST_CASE("gram matrix basics") {
  SECTION("orthonormal pair gives identity") {
    const Mat g = gram({Vec::Unit(3, 0), Vec::Unit(3, 1)});
    CHECK((g - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("three-objective example entries") {
    Vec g3(3);
    g3 << 0.2, 14.0 / 15.0, 2.0 * std::sqrt(5.0) / 15.0;
    const Mat g = gram({Vec::Unit(3, 0), Vec::Unit(3, 1), g3});
    CHECK_THAT(g(0, 1), WithinAbs(0.0, 1e-15));
    CHECK_THAT(g(0, 2), WithinAbs(0.2, 1e-15));
    CHECK_THAT(g(1, 2), WithinAbs(14.0 / 15.0, 1e-15));
    CHECK(g == g.transpose());  // stored symmetry is exact
    for (int i = 0; i < 3; ++i) CHECK_THAT(g(i, i), WithinAbs(1.0, 1e-12));
  }
  SECTION("single vector") {
    Vec v(2);
    v << 1.0, 0.0;
    const Mat g = gram({v});
    CHECK(g.rows() == 1);
    CHECK_THAT(g(0, 0), WithinAbs(1.0, 1e-15));
  }
  SECTION("dimension mismatch throws") {
    CHECK_THROWS_AS(gram({Vec::Zero(2), Vec::Zero(3)}), DimensionMismatch);
  }
}

TEST_CASE("pinv_small on fixed matrices") {
  CHECK((pinv_small(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  const Mat dinv = pinv_small(d);
  CHECK_THAT(dinv(0, 0), WithinAbs(0.5, 1e-14));
  CHECK_THAT(dinv(1, 1), WithinAbs(0.0, 0.0));

  Vec g3(3);
  g3 << 0.2, 14.0 / 15.0, 2.0 * std::sqrt(5.0) / 15.0;
  const Mat g = gram({Vec::Unit(3, 0), Vec::Unit(3, 1), g3});
  const Mat gp = pinv_small(g);
  CHECK((g * gp * g - g).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pinv_small satisfies the Penrose identities") {
  Rng rng(303);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = rng.uniform_int(2, 8);
    Mat a(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= i; ++j) {
        a(i, j) = rng.normal();
        a(j, i) = a(i, j);
      }
    }
    if (trial % 3 == 0) {
      // force rank deficiency
      a.col(m - 1) = a.col(0);
      a.row(m - 1) = a.row(0);
      a(m - 1, m - 1) = a(0, 0);
    }
    const Mat ap = pinv_small(a);
    CHECK((a * ap * a - a).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ap * a * ap - ap).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(((a * ap).transpose() - a * ap).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(((ap * a).transpose() - ap * a).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("signed_power keeps signs") {
  Vec w1(3);
  w1 << -2.0, 0.0, 3.0;
  CHECK((signed_power(w1, 1.0) - w1).cwiseAbs().maxCoeff() == 0.0);

  Vec w2(2);
  w2 << 4.0, -9.0;
  const Vec r2 = signed_power(w2, 0.5);
  CHECK_THAT(r2[0], WithinAbs(2.0, 1e-15));
  CHECK_THAT(r2[1], WithinAbs(-3.0, 1e-15));

  Vec w3(3);
  w3 << 1.0, 1.0, 0.0;
  CHECK((signed_power(w3, 2.0) - w3).cwiseAbs().maxCoeff() == 0.0);
}
