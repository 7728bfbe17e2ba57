#ifndef CHEBDIR_TOY_HPP_
#define CHEBDIR_TOY_HPP_

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "chebdir/baselines.hpp"
#include "chebdir/chebyshev.hpp"
#include "chebdir/common.hpp"

namespace chebdir {

// The two closed-form three-objective comparison instances, evaluated with
// every implemented rule and checked against their known exact values.

struct ToyCheck {
  std::string name;
  double got = 0.0;
  double want = 0.0;
  bool ok = false;
};

struct ToyReport {
  std::vector<ToyCheck> checks;
  bool all_ok = true;
  std::string table;

  void expect(const std::string& name, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    checks.push_back({name, got, want, ok});
    all_ok = all_ok && ok;
  }
};

inline ToyReport toy_report(double tol = 1e-9) {
  ToyReport rep;
  const double s2 = std::sqrt(2.0);
  const double s3 = std::sqrt(3.0);
  const double s511 = std::sqrt(5.0 / 11.0);
  const double s11 = std::sqrt(11.0);
  char line[256];
  std::string& tbl = rep.table;

  // Instance A: unequal gradient scales (5, 3, 1).
  {
    Vec g1(3), g2(3), g3(3);
    g1 << 5.0, 0.0, 0.0;
    g2 << 0.0, 3.0, 0.0;
    g3 << 0.2, 14.0 / 15.0, 2.0 * std::sqrt(5.0) / 15.0;
    GradientSet gs({g1, g2, g3}, NormParam::l2());

    const DirectionResult ours = compute_direction(gs, 1e-6);
    rep.expect("A.ours.v[0]", (*ours.v)[0], 1.0 / s2, tol);
    rep.expect("A.ours.v[1]", (*ours.v)[1], 1.0 / s2, tol);
    rep.expect("A.ours.v[2]", (*ours.v)[2], 0.0, tol);
    rep.expect("A.ours.r_star", ours.r_star, 1.0 / s2, tol);
    rep.expect("A.ours.g3_inner", gs.normalized(2).dot(*ours.v), 17.0 / (15.0 * s2), tol);
    rep.expect("A.ours.active12", (ours.active[0] && ours.active[1]) ? 1.0 : 0.0, 1.0, 0.5);
    rep.expect("A.ours.inactive3", ours.active[2] ? 1.0 : 0.0, 0.0, 0.5);
    rep.expect("A.ours.d[0]", (*ours.d)[0], 137.0 / 30.0, tol);
    rep.expect("A.ours.d[1]", (*ours.d)[1], 137.0 / 30.0, tol);
    rep.expect("A.ours.d[2]", (*ours.d)[2], 0.0, tol);

    const BaselineResult mg = mgda(gs, 2000, 1e-14);
    rep.expect("A.mgda.alpha[0]", mg.alpha[0], 0.0, tol);
    rep.expect("A.mgda.alpha[1]", mg.alpha[1], 0.0, tol);
    rep.expect("A.mgda.alpha[2]", mg.alpha[2], 1.0, tol);

    const BaselineResult cf = config_dir(gs);
    rep.expect("A.config.v[0]", cf.v[0], s511, tol);
    rep.expect("A.config.v[1]", cf.v[1], s511, tol);
    rep.expect("A.config.v[2]", cf.v[2], -1.0 / s11, tol);
    rep.expect("A.config.r_tilde", *cf.common_inner, s511, tol);

    const BaselineResult im = imtl_g(gs);
    rep.expect("A.imtlg.alpha[0]", im.alpha[0], -13.0 / 22.0, tol);
    rep.expect("A.imtlg.alpha[1]", im.alpha[1], -20.0 / 11.0, tol);
    rep.expect("A.imtlg.alpha[2]", im.alpha[2], 75.0 / 22.0, tol);
    for (int i = 0; i < 3; ++i) {
      rep.expect("A.imtlg.inner" + std::to_string(i + 1),
                 gs.normalized(i).dot(*im.v_unit), -s511, tol);
    }

    tbl += "Instance A: g1 = (5,0,0), g2 = (0,3,0), g3 = (1/5, 14/15, 2*sqrt(5)/15)\n";
    std::snprintf(line, sizeof(line), "  %-8s v = (% .6f, % .6f, % .6f)   r* = %.6f\n", "ours",
                  (*ours.v)[0], (*ours.v)[1], (*ours.v)[2], ours.r_star);
    tbl += line;
    std::snprintf(line, sizeof(line), "  %-8s alpha = (%.6f, %.6f, %.6f)\n", "mgda",
                  mg.alpha[0], mg.alpha[1], mg.alpha[2]);
    tbl += line;
    std::snprintf(line, sizeof(line), "  %-8s v = (% .6f, % .6f, % .6f)   r~ = %.6f\n", "config",
                  cf.v[0], cf.v[1], cf.v[2], *cf.common_inner);
    tbl += line;
    std::snprintf(line, sizeof(line), "  %-8s alpha = (% .6f, % .6f, % .6f)  inner = % .6f\n",
                  "imtl_g", im.alpha[0], im.alpha[1], im.alpha[2], *im.common_inner);
    tbl += line;
  }

  // Instance B: unit scales, third gradient inside the first quadrant cone.
  {
    Vec g1(3), g2(3), g3(3);
    g1 << 1.0, 0.0, 0.0;
    g2 << 0.0, 1.0, 0.0;
    g3 << 2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0;
    GradientSet gs({g1, g2, g3}, NormParam::l2());

    const DirectionResult ours = compute_direction(gs, 1e-6);
    rep.expect("B.ours.v[0]", (*ours.v)[0], 1.0 / s2, tol);
    rep.expect("B.ours.v[1]", (*ours.v)[1], 1.0 / s2, tol);
    rep.expect("B.ours.v[2]", (*ours.v)[2], 0.0, tol);
    rep.expect("B.ours.g1_inner", gs.normalized(0).dot(*ours.v), 1.0 / s2, tol);
    rep.expect("B.ours.g2_inner", gs.normalized(1).dot(*ours.v), 1.0 / s2, tol);
    rep.expect("B.ours.g3_inner", gs.normalized(2).dot(*ours.v), 2.0 * s2 / 3.0, tol);

    const BaselineResult cf = config_dir(gs);
    rep.expect("B.config.v[0]", cf.v[0], 1.0 / s3, tol);
    rep.expect("B.config.v[1]", cf.v[1], 1.0 / s3, tol);
    rep.expect("B.config.v[2]", cf.v[2], -1.0 / s3, tol);
    for (int i = 0; i < 3; ++i) {
      rep.expect("B.config.inner" + std::to_string(i + 1),
                 gs.normalized(i).dot(cf.v), 1.0 / s3, tol);
    }

    tbl += "Instance B: g1 = (1,0,0), g2 = (0,1,0), g3 = (2,2,1)/3\n";
    std::snprintf(line, sizeof(line), "  %-8s v = (% .6f, % .6f, % .6f)   r* = %.6f\n", "ours",
                  (*ours.v)[0], (*ours.v)[1], (*ours.v)[2], ours.r_star);
    tbl += line;
    std::snprintf(line, sizeof(line), "  %-8s v = (% .6f, % .6f, % .6f)   r~ = %.6f\n", "config",
                  cf.v[0], cf.v[1], cf.v[2], *cf.common_inner);
    tbl += line;
  }

  int failed = 0;
  for (const auto& c : rep.checks) failed += c.ok ? 0 : 1;
  std::snprintf(line, sizeof(line), "checks: %zu total, %d failed (tolerance %.1e)\n",
                rep.checks.size(), failed, tol);
  tbl += line;
  return rep;
}

}  // namespace chebdir

#endif  // CHEBDIR_TOY_HPP_
