#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chebdir/pinn.hpp"

using namespace chebdir;
using Catch::Matchers::WithinAbs;

TEST_CASE("helmholtz benchmark definition") {
  const PinnProblem p = helmholtz2d();
  SECTION("forcing value at a probe point") {
    CHECK_THAT(p.forcing(0.5, 0.125), WithinAbs(1.0 - 17.0 * M_PI * M_PI, 1e-9));
  }
  SECTION("manufactured solution satisfies the PDE") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double y = rng.uniform(-1.0, 1.0);
      CHECK(std::abs(p.exact_residual(x, y)) < 1e-9);
    }
  }
  SECTION("exact solution vanishes on the boundary") {
    Rng rng(2);
    for (int i = 0; i < 40; ++i) {
      const double t = rng.uniform(-1.0, 1.0);
      CHECK(std::abs(p.exact(1.0, t)) < 1e-12);
      CHECK(std::abs(p.exact(-1.0, t)) < 1e-12);
      CHECK(std::abs(p.exact(t, 1.0)) < 1e-12);
      CHECK(std::abs(p.exact(t, -1.0)) < 1e-12);
    }
  }
}

TEST_CASE("klein-gordon benchmark definition") {
  const PinnProblem p = klein_gordon1d();
  SECTION("initial conditions of the manufactured solution") {
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
      const double x = rng.uniform(0.0, 1.0);
      CHECK_THAT(p.exact(x, 0.0), WithinAbs(x, 1e-14));
      CHECK_THAT(p.exact_d1_axis1(x, 0.0), WithinAbs(0.0, 1e-14));
    }
  }
  SECTION("manufactured solution satisfies the PDE") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      const double x = rng.uniform(0.0, 1.0);
      const double t = rng.uniform(0.0, 1.0);
      CHECK(std::abs(p.exact_residual(x, t)) < 1e-8);
    }
  }
  SECTION("forcing value at (1, 0)") {
    CHECK_THAT(p.forcing(1.0, 0.0), WithinAbs(1.0 - 25.0 * M_PI * M_PI, 1e-9));
  }
}

TEST_CASE("problem registry") {
  CHECK(make_problem("helmholtz2d").m == 2);
  CHECK(make_problem("kleingordon1d").m == 3);
  CHECK_THROWS_AS(make_problem("poisson9d"), ConfigError);
}

TEST_CASE("sampling is deterministic and on-manifold") {
  const PinnProblem hp = helmholtz2d();
  SECTION("identical batches for identical (seed, step)") {
    const SampleBatch a = sample(hp, 5, 17);
    const SampleBatch b = sample(hp, 5, 17);
    CHECK(a.interior == b.interior);
    CHECK(a.boundary == b.boundary);
    const SampleBatch c = sample(hp, 5, 18);
    CHECK(a.interior != c.interior);
  }
  SECTION("boundary points sit on the box edge exactly") {
    const SampleBatch b = sample(hp, 9, 0);
    REQUIRE(b.boundary.cols() == hp.nb);
    for (Eigen::Index j = 0; j < b.boundary.cols(); ++j) {
      const double mx = std::max(std::abs(b.boundary(0, j)), std::abs(b.boundary(1, j)));
      CHECK(mx == 1.0);
    }
  }
  SECTION("interior points stay inside the closed box") {
    const SampleBatch b = sample(hp, 11, 3);
    REQUIRE(b.interior.cols() == hp.nr);
    CHECK(b.interior.minCoeff() >= -1.0);
    CHECK(b.interior.maxCoeff() <= 1.0);
    CHECK(b.initial.cols() == 0);
  }
  SECTION("initial batch pins time to zero exactly") {
    const PinnProblem kg = klein_gordon1d();
    const SampleBatch b = sample(kg, 13, 2);
    REQUIRE(b.initial.cols() == kg.ni);
    CHECK(b.initial.row(1).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index j = 0; j < b.boundary.cols(); ++j) {
      CHECK((b.boundary(0, j) == 0.0 || b.boundary(0, j) == 1.0));
    }
  }
}

TEST_CASE("loss probes with the analytic solution") {
  for (const char* name : {"helmholtz2d", "kleingordon1d"}) {
    PinnProblem p = make_problem(name);
    p.nr = 256;
    p.nb = 64;
    p.ni = 64;
    const SampleBatch batch = sample(p, 21, 0);
    const std::vector<double> probe = probe_losses(p, batch);
    REQUIRE(static_cast<int>(probe.size()) == p.m);
    for (double v : probe) {
      INFO(name);
      CHECK(v <= 1e-10);
    }
  }
}

TEST_CASE("zero network loss values") {
  PinnProblem p = helmholtz2d();
  p.nr = 128;
  p.nb = 32;
  const SampleBatch batch = sample(p, 30, 0);
  NetSpec spec;
  const NetParams params(spec, Vec::Zero(spec.param_count()));
  const LossEval ev = eval_losses(params, losses(p, batch));
  // boundary target is identically zero, so the boundary loss vanishes
  CHECK(ev.values[1] <= 1e-28);
  // residual reduces to the forcing mean square
  CompensatedSum fsq;
  for (Eigen::Index j = 0; j < batch.interior.cols(); ++j) {
    const double f = p.forcing(batch.interior(0, j), batch.interior(1, j));
    fsq.add(f * f);
  }
  CHECK_THAT(ev.values[0], WithinAbs(fsq.value() / batch.interior.cols(), 1e-6));
}

TEST_CASE("random initialization gives finite positive losses") {
  for (const char* name : {"helmholtz2d", "kleingordon1d"}) {
    PinnProblem p = make_problem(name);
    p.nr = 64;
    p.nb = 32;
    p.ni = 32;
    const SampleBatch batch = sample(p, 40, 0);
    NetSpec spec;
    const NetParams params = init_xavier(spec, 41);
    const LossEval ev = eval_losses(params, losses(p, batch));
    for (double v : ev.values) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
    }
    for (const auto& g : ev.grads) {
      CHECK(g.allFinite());
      CHECK(g.norm() > 0.0);
    }
  }
}

TEST_CASE("relative l2 error") {
  Vec ref(4);
  ref << 1.0, -2.0, 0.5, 3.0;
  SECTION("exact prediction") { CHECK(relative_l2(ref, ref) == 0.0); }
  SECTION("zero prediction") { CHECK_THAT(relative_l2(Vec::Zero(4), ref), WithinAbs(1.0, 1e-15)); }
  SECTION("homogeneity") {
    CHECK_THAT(relative_l2(1.1 * ref, ref), WithinAbs(0.1, 1e-12));
  }
  SECTION("permutation invariance") {
    Vec pred(4);
    pred << 1.1, -2.2, 0.55, 3.3;
    Vec ref_p(4), pred_p(4);
    ref_p << 3.0, 1.0, -2.0, 0.5;
    pred_p << 3.3, 1.1, -2.2, 0.55;
    CHECK_THAT(relative_l2(pred, ref), WithinAbs(relative_l2(pred_p, ref_p), 1e-15));
  }
  SECTION("zero reference") {
    CHECK_THROWS_AS(relative_l2(ref, Vec::Zero(4)), ZeroReference);
  }
}

TEST_CASE("evaluation grid shape") {
  const PinnProblem p = helmholtz2d();
  const Mat grid = eval_grid(p);
  CHECK(grid.cols() == 101 * 101);
  CHECK(grid.row(0).minCoeff() == -1.0);
  CHECK(grid.row(0).maxCoeff() == 1.0);
  NetSpec spec;
  const double err = eval_rel_l2(p, init_xavier(spec, 50));
  CHECK(std::isfinite(err));
  CHECK(err > 0.0);
}
