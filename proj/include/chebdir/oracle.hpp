#ifndef CHEBDIR_ORACLE_HPP_
#define CHEBDIR_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chebdir/chebyshev.hpp"
#include "chebdir/common.hpp"
#include "chebdir/numkit.hpp"

namespace chebdir {

inline constexpr int kOracleDimCap = 10;

struct OracleCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct OracleReport {
  std::string instance;
  double oracle_value = std::numeric_limits<double>::quiet_NaN();
  double solver_value = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();  // solver - oracle, signed
  bool pass = true;
  std::uint64_t seed = 0;
  std::vector<OracleCheck> checks;

  void add_check(std::string name, bool ok, double value, double threshold) {
    checks.push_back({std::move(name), ok, value, threshold});
    pass = pass && ok;
  }
};

namespace oracle_detail {

inline double min_inner(const GradientSet& gs, const Vec& v) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < gs.count(); ++i) {
    m = std::min(m, compensated_dot(gs.normalized(i), v));
  }
  return m;
}

inline Vec radial_to_unit_ball(Vec v, NormParam q) {
  const double n = lp_norm(v, q);
  if (n > 1.0) v /= n;
  return v;
}

// Direct search on the l_q unit sphere with step re-expansion: successful
// moves grow the step so ridge walks (several facets tied at the optimum)
// do not exhaust the budget; only repeated failure shrinks it.
inline void pattern_polish(const GradientSet& gs, NormParam q, Vec& best_v, double& best_phi,
                           Rng& rng) {
  const int n = static_cast<int>(best_v.size());
  Vec v = best_v;
  double radius = 0.1;
  int budget = 40000;
  while (radius > 1e-10 && budget > 0) {
    bool improved = false;
    for (int j = 0; j < n && !improved; ++j) {
      for (double s : {1.0, -1.0}) {
        Vec cand = v;
        cand[j] += s * radius;
        const double nc = lp_norm(cand, q);
        if (nc > 1e-12) cand /= nc;
        --budget;
        const double phi = min_inner(gs, cand);
        if (phi > best_phi) {
          best_phi = phi;
          v = cand;
          improved = true;
          break;
        }
      }
    }
    for (int k = 0; k < 128 && !improved && budget > 0; ++k) {
      Vec cand = v + radius * rng.normal_vec(n);
      const double nc = lp_norm(cand, q);
      if (nc > 1e-12) cand /= nc;
      --budget;
      const double phi = min_inner(gs, cand);
      if (phi > best_phi) {
        best_phi = phi;
        v = cand;
        improved = true;
      }
    }
    radius = improved ? std::min(radius * 1.6, 0.3) : radius * 0.6;
  }
  best_v = v;
}

// Smoothed ascent stage: maximizes the softmin surrogate
//   phi_mu(v) = -mu log sum_i exp(-(ghat_i'v)/mu)
// over the sphere with an adaptive step while mu tightens toward the true
// max-min. Reported values always come from the unsmoothed objective at
// feasible points, so the lower-bound property is untouched.
inline void softmin_ascent(const GradientSet& gs, NormParam q, Vec v, double& best_phi,
                           Vec& best_v) {
  const int m = gs.count();
  Vec scores(m), lam(m);
  auto smoothed = [&](const Vec& x, double mu) {
    double smin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      scores[i] = gs.normalized(i).dot(x);
      smin = std::min(smin, scores[i]);
    }
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
      lam[i] = std::exp(-(scores[i] - smin) / mu);
      z += lam[i];
    }
    lam /= z;
    return smin - mu * std::log(z);
  };
  const double pexp = gs.norm_param().p;
  auto track = [&](const Vec& x) {
    const double phi = min_inner(gs, x);
    if (phi > best_phi) {
      best_phi = phi;
      best_v = x;
    }
  };
  double eta = 0.05;
  for (double mu : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
    eta = std::max(eta, 1e-4);
    double blend = 1.0;
    for (int it = 0; it < 300; ++it) {
      const double f0 = smoothed(v, mu);

      // Damped fixed-point move: the support map of the weighted aggregate
      // jumps straight across the stiff direction of the smoothed landscape.
      Vec w = Vec::Zero(v.size());
      for (int i = 0; i < m; ++i) w += lam[i] * gs.normalized(i);
      Vec fp = signed_power(w, pexp - 1.0);
      const double nfp = lp_norm(fp, q);
      if (nfp > 1e-12) {
        fp /= nfp;
        Vec cand = v + blend * (fp - v);
        const double nc = lp_norm(cand, q);
        if (nc > 1e-12) cand /= nc;
        if (smoothed(cand, mu) > f0) {
          v = cand;
          blend = std::min(1.0, blend * 1.5);
          track(v);
          continue;
        }
        blend *= 0.5;
      }

      // Fall back to ascent along the tangent-projected gradient; the
      // renormalization is then first-order neutral.
      smoothed(v, mu);  // refresh lam at v
      Vec grad = Vec::Zero(v.size());
      for (int i = 0; i < m; ++i) grad += lam[i] * gs.normalized(i);
      const Vec normal = signed_power(v, q.p - 1.0);
      const double nn = normal.squaredNorm();
      if (nn > 0.0) grad -= (grad.dot(normal) / nn) * normal;
      if (grad.norm() < 1e-14) break;
      Vec cand = v + eta * grad;
      const double nc = lp_norm(cand, q);
      if (nc > 1e-12) cand /= nc;
      if (smoothed(cand, mu) > f0) {
        v = cand;
        eta *= 1.3;
        track(v);
      } else {
        eta *= 0.5;
        if (eta < 1e-13 && blend < 1e-13) break;
      }
    }
  }
}

// Active-set ridge ascent: near the optimum several facets tie and random
// search stalls, so walk along the minimum-norm direction that raises all
// currently-active inner products at the same rate, with a geometric line
// search on the sphere. Stops when no active-set width yields progress.
inline void ridge_walk(const GradientSet& gs, NormParam q, Vec& best_v, double& best_phi) {
  const int m = gs.count();
  Vec v = best_v;
  double phi_v = min_inner(gs, v);
  for (int iter = 0; iter < 400; ++iter) {
    Vec scores(m);
    double smin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      scores[i] = gs.normalized(i).dot(v);
      smin = std::min(smin, scores[i]);
    }
    bool progressed = false;
    for (double width : {1e-12, 1e-9, 1e-7, 1e-5, 1e-3, 1e-2}) {
      std::vector<int> active;
      for (int i = 0; i < m; ++i) {
        if (scores[i] <= smin + width * (1.0 + std::abs(smin))) active.push_back(i);
      }
      // Equal first-order rise of every active inner product, constrained to
      // the sphere's tangent space (so renormalization is neutral). The
      // stacked system turns singular exactly at KKT stationarity, where the
      // line search below then finds nothing.
      const int k = static_cast<int>(active.size());
      Mat c(v.size(), k + 1);
      for (int j = 0; j < k; ++j) c.col(j) = gs.normalized(active[j]);
      c.col(k) = q.is_two() ? v : signed_power(v, q.p - 1.0);
      Mat sys = c.transpose() * c;
      sys.diagonal().array() += 1e-13;
      Vec rhs = Vec::Ones(k + 1);
      rhs[k] = 0.0;
      const Vec y = sys.ldlt().solve(rhs);
      Vec dir = c * y;
      const double nd = dir.norm();
      if (!(nd > 1e-14)) continue;
      dir /= nd;
      for (double eta = 0.5; eta > 1e-13; eta *= 0.5) {
        Vec cand = v + eta * dir;
        const double nc = lp_norm(cand, q);
        if (nc > 1e-12) cand /= nc;
        const double phi = min_inner(gs, cand);
        if (phi > phi_v) {
          v = cand;
          phi_v = phi;
          progressed = true;
          break;
        }
      }
      if (progressed) break;
    }
    if (!progressed) break;
    if (phi_v > best_phi) {
      best_phi = phi_v;
      best_v = v;
    }
  }
}

}  // namespace oracle_detail

// Direct search on the primal max-min problem: subgradient ascent with radial
// projection onto the l_q ball, then a shrinking-radius random polish. The
// returned value is a feasible lower bound on the inscribed radius; it is
// deliberately independent of the dual solvers.
inline std::pair<Vec, double> primal_brute(const GradientSet& gs, int restarts = 64,
                                           int iters = 2000, std::uint64_t seed = 7919) {
  const int n = static_cast<int>(gs.dim());
  if (n > kOracleDimCap) {
    throw DimensionCapExceeded("primal oracle capped at n <= " + std::to_string(kOracleDimCap));
  }
  const NormParam q = gs.norm_param().conjugate();
  Rng rng(seed);

  Vec best_v = Vec::Zero(n);  // v = 0 is always feasible with value 0
  double best_phi = 0.0;
  std::vector<std::pair<double, Vec>> leaders;  // a few incumbents to refine

  for (int r = 0; r < restarts; ++r) {
    Vec v;
    if (r == 0) {
      v = Vec::Zero(n);
      for (int i = 0; i < gs.count(); ++i) v += gs.normalized(i);
    } else {
      v = rng.normal_vec(n);
    }
    const double nv = lp_norm(v, q);
    if (nv > 1e-12) v /= nv;

    double restart_phi = -std::numeric_limits<double>::infinity();
    Vec restart_v = v;
    for (int t = 1; t <= iters; ++t) {
      // Ascend along the subgradient of min_i ghat_i'v (the argmin facet).
      int worst = 0;
      double worst_val = std::numeric_limits<double>::infinity();
      for (int i = 0; i < gs.count(); ++i) {
        const double s = gs.normalized(i).dot(v);
        if (s < worst_val) {
          worst_val = s;
          worst = i;
        }
      }
      v += (0.1 / std::sqrt(static_cast<double>(t))) * gs.normalized(worst);
      v = oracle_detail::radial_to_unit_ball(std::move(v), q);
      const double phi = oracle_detail::min_inner(gs, v);
      if (phi > restart_phi) {
        restart_phi = phi;
        restart_v = v;
      }
    }
    if (restart_phi > best_phi) {
      best_phi = restart_phi;
      best_v = restart_v;
    }
    leaders.emplace_back(restart_phi, restart_v);
    std::sort(leaders.begin(), leaders.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    if (leaders.size() > 3) leaders.resize(3);
  }

  // Refinement: smoothed ascent from the leading incumbents, then a direct
  // sphere search around the overall best. Every evaluated point is feasible,
  // so the returned value stays a valid lower bound.
  if (!q.is_one() && !q.is_inf()) {
    for (const auto& [phi0, v0] : leaders) {
      oracle_detail::softmin_ascent(gs, q, v0, best_phi, best_v);
    }
    for (int r = 0; r < 8; ++r) {  // fresh starts against local maxima
      Vec v = rng.normal_vec(n);
      const double nv = lp_norm(v, q);
      if (nv > 1e-12) v /= nv;
      oracle_detail::softmin_ascent(gs, q, v, best_phi, best_v);
    }
  }
  // The ridge walk needs tied facets, the pattern search untangles everything
  // else; alternate them so each hands the other a better start.
  for (int round = 0; round < 2; ++round) {
    if (!q.is_one() && !q.is_inf()) {
      oracle_detail::ridge_walk(gs, q, best_v, best_phi);
    }
    oracle_detail::pattern_polish(gs, q, best_v, best_phi, rng);
  }
  return {best_v, best_phi};
}

// Exhaustive vertex enumeration for the l_q-ball primal at tiny dimension:
// every vertex of {ghat_i'v >= r, F v <= 1} with n+1 tight constraints is
// solved directly. Exact reference for the p in {1, inf} LP paths.
inline double primal_enum_tiny(const GradientSet& gs) {
  const int n = static_cast<int>(gs.dim());
  if (n > 4) throw DimensionCapExceeded("vertex enumeration oracle capped at n <= 4");
  const NormParam p = gs.norm_param();
  if (!p.is_one() && !p.is_inf()) {
    throw UnsupportedNorm("vertex enumeration oracle handles p in {1, inf}");
  }
  const int m = gs.count();

  // Facet rows of the l_q unit ball: +-e_j for q = inf, all sign patterns
  // for q = 1.
  std::vector<Vec> facets;
  if (p.is_one()) {  // q = inf
    for (int j = 0; j < n; ++j) {
      Vec f = Vec::Zero(n);
      f[j] = 1.0;
      facets.push_back(f);
      facets.push_back(-f);
    }
  } else {  // q = 1
    for (int mask = 0; mask < (1 << n); ++mask) {
      Vec f(n);
      for (int j = 0; j < n; ++j) f[j] = (mask >> j) & 1 ? 1.0 : -1.0;
      facets.push_back(f);
    }
  }

  // Constraint rows over (v, r): [-ghat_i', 1](v,r) <= 0 and [f', 0](v,r) <= 1.
  const int total = m + static_cast<int>(facets.size());
  auto row = [&](int idx, Vec& a, double& b) {
    a.resize(n + 1);
    if (idx < m) {
      a.head(n) = -gs.normalized(idx);
      a[n] = 1.0;
      b = 0.0;
    } else {
      a.head(n) = facets[idx - m];
      a[n] = 0.0;
      b = 1.0;
    }
  };

  double best = 0.0;  // (v, r) = (0, 0) is feasible
  std::vector<int> pick(n + 1);
  std::function<void(int, int)> recurse = [&](int start, int chosen) {
    if (chosen == n + 1) {
      Mat a(n + 1, n + 1);
      Vec b(n + 1);
      for (int i = 0; i <= n; ++i) {
        Vec ar;
        double br;
        row(pick[i], ar, br);
        a.row(i) = ar.transpose();
        b[i] = br;
      }
      Eigen::FullPivLU<Mat> lu(a);
      if (!lu.isInvertible()) return;
      const Vec x = lu.solve(b);
      for (int idx = 0; idx < total; ++idx) {
        Vec ar;
        double br;
        row(idx, ar, br);
        if (ar.dot(x) > br + 1e-9) return;
      }
      best = std::max(best, x[n]);
      return;
    }
    for (int i = start; i < total; ++i) {
      pick[chosen] = i;
      recurse(i + 1, chosen + 1);
    }
  };
  recurse(0, 0);
  return best;
}

// Solves the dual with the matching solver and compares against the
// brute-force primal value: strong duality within loose tolerance, weak
// duality within tight tolerance.
inline OracleReport duality_gap_check(const GradientSet& gs, std::uint64_t seed = 7919) {
  OracleReport rep;
  rep.seed = seed;
  rep.solver_value = dual_optimum(gs);
  rep.oracle_value = primal_brute(gs, 64, 2000, seed).second;
  rep.gap = rep.solver_value - rep.oracle_value;
  rep.add_check("strong_duality_gap", std::abs(rep.gap) <= 1e-4, rep.gap, 1e-4);
  rep.add_check("weak_duality", rep.solver_value >= rep.oracle_value - 1e-6,
                rep.solver_value - rep.oracle_value, -1e-6);
  return rep;
}

// Central finite differences with a per-coordinate step 1e-4 * (1 + |theta_j|).
inline Vec fd_gradient(const std::function<double(const Vec&)>& loss, const Vec& theta,
                       double h_scale = 1e-4) {
  Vec g(theta.size());
  Vec t = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double h = h_scale * (1.0 + std::abs(theta[j]));
    const double orig = t[j];
    t[j] = orig + h;
    const double fp = loss(t);
    t[j] = orig - h;
    const double fm = loss(t);
    t[j] = orig;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Convex-quadratic ensembles for the descent-inequality checks
// ---------------------------------------------------------------------------

struct QuadraticLoss {
  Mat hessian;
  Vec center;
  double value(const Vec& theta) const {
    const Vec d = theta - center;
    return 0.5 * d.dot(hessian * d);
  }
  Vec grad(const Vec& theta) const { return hessian * (theta - center); }
};

struct QuadraticEnsemble {
  std::vector<QuadraticLoss> losses;

  int count() const { return static_cast<int>(losses.size()); }
  Eigen::Index dim() const { return losses[0].center.size(); }

  double total(const Vec& theta) const {
    CompensatedSum s;
    for (const auto& l : losses) s.add(l.value(theta));
    return s.value();
  }
  Vec total_grad(const Vec& theta) const {
    Vec g = Vec::Zero(dim());
    for (const auto& l : losses) g += l.grad(theta);
    return g;
  }
  Mat total_hessian() const {
    Mat h = Mat::Zero(dim(), dim());
    for (const auto& l : losses) h += l.hessian;
    return h;
  }
  // Largest eigenvalue of the summed Hessian: smoothness w.r.t. l2.
  double smoothness_l2() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(total_hessian());
    return es.eigenvalues().maxCoeff();
  }
  Vec total_minimizer() const { return total_hessian().ldlt().solve(rhs_accum()); }
  Vec rhs_accum() const {
    Vec r = Vec::Zero(dim());
    for (const auto& l : losses) r += l.hessian * l.center;
    return r;
  }

  static QuadraticEnsemble random(Rng& rng, int m, int dim) {
    QuadraticEnsemble ens;
    for (int i = 0; i < m; ++i) {
      Mat basis(dim, dim);
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) basis(r, c) = rng.normal();
      }
      Eigen::HouseholderQR<Mat> qr(basis);
      Mat q = qr.householderQ();
      Vec eig(dim);
      for (int j = 0; j < dim; ++j) eig[j] = rng.uniform(0.5, 3.0);
      QuadraticLoss loss;
      loss.hessian = q * eig.asDiagonal() * q.transpose();
      loss.hessian = 0.5 * (loss.hessian + loss.hessian.transpose());
      loss.center = Vec::NullaryExpr(dim, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
      ens.losses.push_back(std::move(loss));
    }
    return ens;
  }
};

// Smoothness of the total loss w.r.t. the l_q geometry, obtained from the l2
// constant through norm equivalence on R^dim.
inline double smoothness_lq(const QuadraticEnsemble& ens, NormParam p) {
  const double beta2 = ens.smoothness_l2();
  const double q = p.q();
  const double dim = static_cast<double>(ens.dim());
  if (q >= 2.0 || std::isinf(q)) {
    const double factor = std::isinf(q) ? std::sqrt(dim) : std::pow(dim, 0.5 - 1.0 / q);
    return beta2 * factor * factor;
  }
  return beta2;  // ||x||_2 <= ||x||_q for q <= 2
}

// Runs the plain-step loop theta <- theta - (1/beta) d on a quadratic
// ensemble and verifies the per-step descent inequality and the cumulative
// stationarity bound.
inline OracleReport descent_check(const QuadraticEnsemble& ens, int steps,
                                  double eps_stat = 1e-4, NormParam p = NormParam::l2(),
                                  const Vec* theta0 = nullptr) {
  OracleReport rep;
  rep.instance = "quadratic ensemble m=" + std::to_string(ens.count());
  const double beta = smoothness_lq(ens, p);
  rep.add_check("smoothness_beta", true, beta, 0.0);  // informational
  Vec theta = theta0 ? *theta0 : Vec::Constant(ens.dim(), 2.0);
  const double loss0 = ens.total(theta);

  double min_grad_sq = std::numeric_limits<double>::infinity();
  bool per_step_ok = true;
  double worst_violation = 0.0;
  bool terminated = false;
  int t = 0;
  for (; t < steps; ++t) {
    std::vector<Vec> grads;
    grads.reserve(ens.count());
    bool degenerate = false;
    for (int i = 0; i < ens.count(); ++i) {
      Vec g = ens.losses[i].grad(theta);
      if (lp_norm(g, p) < kZeroGradThreshold) degenerate = true;
      grads.push_back(std::move(g));
    }
    if (degenerate) {  // a loss is at its own minimum; stationary for it
      terminated = true;
      break;
    }
    GradientSet gs(grads, p);
    const DirectionResult dir = compute_direction(gs, eps_stat);
    if (dir.terminated) {
      terminated = true;
      break;
    }
    const double grad_sq = std::pow(lp_norm(ens.total_grad(theta), p), 2);
    min_grad_sq = std::min(min_grad_sq, grad_sq);
    const double before = ens.total(theta);
    theta -= (1.0 / beta) * (*dir.d);
    const double after = ens.total(theta);
    const double bound = before - (eps_stat * eps_stat / (2.0 * beta)) * grad_sq;
    const double violation = after - bound;
    worst_violation = std::max(worst_violation, violation);
    if (violation > 1e-8) per_step_ok = false;
  }
  rep.add_check("per_step_descent", per_step_ok, worst_violation, 1e-8);

  if (!terminated && t > 0) {
    const Vec minimizer = ens.total_hessian().ldlt().solve(ens.rhs_accum());
    const double lstar = ens.total(minimizer);
    const double bound =
        2.0 * beta * (loss0 - lstar) / (eps_stat * eps_stat * static_cast<double>(t));
    rep.add_check("cumulative_bound", min_grad_sq <= bound + 1e-8, min_grad_sq - bound, 1e-8);
  } else {
    rep.add_check("terminated_stationary", true, static_cast<double>(t), 0.0);
  }
  rep.solver_value = ens.total(theta);
  rep.oracle_value = loss0;
  return rep;
}

// ---------------------------------------------------------------------------
// Fixed-seed randomized suites (shared by the verify command and the tests)
// ---------------------------------------------------------------------------

inline GradientSet random_gradient_set(Rng& rng, int m, int n, NormParam p) {
  while (true) {
    std::vector<Vec> grads;
    grads.reserve(m);
    for (int i = 0; i < m; ++i) grads.push_back(rng.normal_vec(n));
    bool ok = true;
    for (const auto& g : grads) {
      if (lp_norm(g, p) < 1e-6) ok = false;
    }
    if (ok) return GradientSet(std::move(grads), p);
  }
}

inline std::vector<OracleReport> duality_suite(std::uint64_t seed = 20260801, int count = 200) {
  const double ps[] = {1.5, 2.0, 3.0};
  Rng rng(seed);
  std::vector<OracleReport> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const NormParam p = NormParam::of(ps[i % 3]);
    const int m = rng.uniform_int(2, 5);
    const int n = rng.uniform_int(3, 10);
    GradientSet gs = random_gradient_set(rng, m, n, p);
    OracleReport rep = duality_gap_check(gs, seed + i);
    rep.instance = "p=" + std::to_string(p.p) + " m=" + std::to_string(m) +
                   " n=" + std::to_string(n) + " i=" + std::to_string(i);
    out.push_back(std::move(rep));
  }
  return out;
}

inline std::vector<OracleReport> descent_suite(std::uint64_t seed = 20260802, int count = 50,
                                               int steps = 400) {
  Rng rng(seed);
  std::vector<OracleReport> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int m = 2 + (i % 2);
    const int dim = rng.uniform_int(2, 6);
    QuadraticEnsemble ens = QuadraticEnsemble::random(rng, m, dim);
    OracleReport rep = descent_check(ens, steps);
    rep.instance += " dim=" + std::to_string(dim) + " i=" + std::to_string(i);
    rep.seed = seed;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace chebdir

#endif  // CHEBDIR_ORACLE_HPP_
