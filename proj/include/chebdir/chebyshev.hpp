#ifndef CHEBDIR_CHEBYSHEV_HPP_
#define CHEBDIR_CHEBYSHEV_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "chebdir/common.hpp"
#include "chebdir/numkit.hpp"
#include "chebdir/simplex_lp.hpp"

namespace chebdir {

inline constexpr int kMaxObjectives = 16;
inline constexpr int kLpDimensionCap = 512;

// The m per-loss gradients together with their l_p normalizations.
// Normalizations are computed at construction; instances are immutable and
// freely shareable across threads.
class GradientSet {
 public:
  GradientSet(std::vector<Vec> grads, NormParam p)
      : grads_(std::move(grads)), p_(p) {
    const int m = static_cast<int>(grads_.size());
    if (m < 1) throw DimensionMismatch("GradientSet: need at least one gradient");
    if (m > kMaxObjectives) {
      throw DimensionCapExceeded("GradientSet: more than " +
                                 std::to_string(kMaxObjectives) + " objectives");
    }
    const Eigen::Index n = grads_[0].size();
    norms_.reserve(m);
    normalized_.reserve(m);
    for (const auto& g : grads_) {
      if (g.size() != n) throw DimensionMismatch("GradientSet: dimension mismatch");
      if (!all_finite(g)) throw Error("GradientSet: non-finite gradient entries");
      norms_.push_back(lp_norm(g, p_));
      normalized_.push_back(normalize_grad(g, p_));
    }
  }

  int count() const { return static_cast<int>(grads_.size()); }
  Eigen::Index dim() const { return grads_[0].size(); }
  NormParam norm_param() const { return p_; }
  const Vec& grad(int i) const { return grads_[i]; }
  double norm(int i) const { return norms_[i]; }
  const Vec& normalized(int i) const { return normalized_[i]; }
  const std::vector<Vec>& normalized_all() const { return normalized_; }
  const std::vector<Vec>& grads_all() const { return grads_; }

  Vec combine_normalized(const Vec& alpha) const {
    Vec w = Vec::Zero(dim());
    for (int i = 0; i < count(); ++i) w += alpha[i] * normalized_[i];
    return w;
  }
  Vec combine_raw(const Vec& alpha) const {
    Vec w = Vec::Zero(dim());
    for (int i = 0; i < count(); ++i) w += alpha[i] * grads_[i];
    return w;
  }
  // Adaptive update scale: sum of raw-gradient inner products with v.
  double sum_raw_inner(const Vec& v) const {
    CompensatedSum acc;
    for (const auto& g : grads_) acc.add(compensated_dot(g, v));
    return acc.value();
  }

 private:
  std::vector<Vec> grads_;
  NormParam p_;
  std::vector<double> norms_;
  std::vector<Vec> normalized_;
};

struct SimplexWeights {
  Vec alpha;

  // Clamps -1e-12-level negatives to exact zero; solver outputs stay on the
  // simplex to working precision.
  static SimplexWeights sanitized(Vec a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] < 0.0) a[i] = 0.0;
    }
    const double s = a.sum();
    if (s > 0.0) a /= s;
    return SimplexWeights{std::move(a)};
  }
};

struct PrimalRecovery {
  Vec w;
  double r_star;
  Vec v;
};

struct DirectionResult {
  SimplexWeights alpha;
  Vec w;
  double r_star = 0.0;
  std::optional<Vec> v;   // l_q-unit direction; absent when terminated
  std::optional<Vec> d;   // scaled update; absent when terminated
  std::vector<bool> active;
  bool terminated = false;
  bool nonunique_possible = false;  // LP recovery may admit multiple optima
};

// ---------------------------------------------------------------------------
// Dual solvers
// ---------------------------------------------------------------------------

// Two objectives, l2: the midpoint weights are optimal for unit gradients.
inline SimplexWeights solve_dual_exact2(const GradientSet& gs) {
  if (gs.count() != 2) throw WrongArity("exact two-loss solver requires m = 2");
  if (!gs.norm_param().is_two()) throw UnsupportedNorm("exact two-loss solver requires p = 2");
  Vec a(2);
  a << 0.5, 0.5;
  return SimplexWeights{a};
}

namespace detail {

// Feasible point of {alpha in simplex : G alpha = 0}, if one exists.
// Returns an empty vector otherwise.
inline Vec zero_combination_on_simplex(const Mat& g, double tau) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  const Vec& lam = es.eigenvalues();
  const Mat& u = es.eigenvectors();
  const double lmax = std::max(1.0, lam.cwiseAbs().maxCoeff());
  std::vector<int> null_idx;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(lam[i]) <= 1e-12 * lmax) null_idx.push_back(i);
  }
  auto accept = [&](Vec a) -> Vec {
    for (int i = 0; i < 3; ++i) {
      if (a[i] < -tau) return Vec();
      if (a[i] < 0.0) a[i] = 0.0;
    }
    a /= a.sum();
    if ((g * a).cwiseAbs().maxCoeff() <= 1e-10) return a;
    return Vec();
  };
  if (null_idx.size() == 1) {
    Vec v = u.col(null_idx[0]);
    const double s = v.sum();
    if (std::abs(s) < 1e-12) return Vec();
    return accept(v / s);
  }
  if (null_idx.size() == 2) {
    // alpha(t) = x(t) v1 + t v2 on the affine line sum(alpha) = 1.
    const Vec v1 = u.col(null_idx[0]);
    const Vec v2 = u.col(null_idx[1]);
    const double s1 = v1.sum();
    const double s2 = v2.sum();
    if (std::abs(s1) < 1e-12 && std::abs(s2) < 1e-12) return Vec();
    const Vec a = (std::abs(s1) >= std::abs(s2)) ? v1 / s1 : v2 / s2;
    const Vec b = (std::abs(s1) >= std::abs(s2)) ? (v2 - (s2 / s1) * v1) : (v1 - (s1 / s2) * v2);
    // alpha(t) = a + t b, sum = 1 for all t; intersect alpha(t) >= -tau.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      if (std::abs(b[i]) < 1e-14) {
        if (a[i] < -tau) return Vec();
      } else if (b[i] > 0.0) {
        lo = std::max(lo, (-tau - a[i]) / b[i]);
      } else {
        hi = std::min(hi, (-tau - a[i]) / b[i]);
      }
    }
    if (lo > hi) return Vec();
    double t = 0.0;
    if (std::isfinite(lo) && std::isfinite(hi)) t = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) t = lo;
    else if (std::isfinite(hi)) t = hi;
    return accept(a + t * b);
  }
  return Vec();
}

}  // namespace detail

// Three objectives, l2. The minimizer over the simplex is a zero-norm
// combination, an interior stationary point, or an edge midpoint of the
// least-aligned pair. Gram-entry ties break to the lexicographically
// lowest pair.
inline SimplexWeights solve_dual_exact3(const GradientSet& gs, double tau = 1e-9,
                                        double eps = 1e-12) {
  if (gs.count() != 3) throw WrongArity("exact three-loss solver requires m = 3");
  if (!gs.norm_param().is_two()) throw UnsupportedNorm("exact three-loss solver requires p = 2");
  const Mat g = gram(gs.normalized_all());

  Vec zero_comb = detail::zero_combination_on_simplex(g, tau);
  if (zero_comb.size() == 3) return SimplexWeights{zero_comb};

  const Vec z = pinv_small(g) * Vec::Ones(3);
  const double c = z.sum();
  if (c > eps) {
    Vec cand = z / c;
    if (cand.minCoeff() >= -tau) return SimplexWeights::sanitized(std::move(cand));
  }

  int bi = 0, bj = 1;
  double best = g(0, 1);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (g(i, j) < best) {
        best = g(i, j);
        bi = i;
        bj = j;
      }
    }
  }
  Vec a = Vec::Zero(3);
  a[bi] = 0.5;
  a[bj] = 0.5;
  return SimplexWeights{a};
}

namespace detail {

template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Scalar-generic l_p norm with max-scaling; the Frank-Wolfe core runs it at
// extended precision during refinement.
template <typename S>
S lp_norm_t(const VecT<S>& x, NormParam p) {
  if (x.size() == 0) return S(0);
  if (p.is_inf()) return x.cwiseAbs().maxCoeff();
  const S scale = x.cwiseAbs().maxCoeff();
  if (scale == S(0)) return S(0);
  S acc(0);
  if (p.is_one()) {
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += abs(x[j]);
    return acc;
  }
  if (p.is_two()) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const S t = x[j] / scale;
      acc += t * t;
    }
    return scale * sqrt(acc);
  }
  using std::pow;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    acc += pow(abs(x[j] / scale), S(p.p));
  }
  return scale * pow(acc, S(1) / S(p.p));
}

// Gradient of alpha -> ||w(alpha)||_p at w != 0; equals the l_q-unit support
// vector of w, so scores a_i' u are the per-objective inner products.
template <typename S>
VecT<S> norm_gradient_t(const VecT<S>& w, NormParam p, S wnorm) {
  if (p.is_two()) return w / wnorm;
  using std::pow;
  VecT<S> u(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const S a = abs(w[j]);
    const S sgn = w[j] > S(0) ? S(1) : (w[j] < S(0) ? S(-1) : S(0));
    u[j] = sgn * pow(a, S(p.p - 1.0));
  }
  return u / pow(wnorm, S(p.p - 1.0));
}

inline Vec norm_gradient(const Vec& w, NormParam p, double wnorm) {
  return norm_gradient_t<double>(w, p, wnorm);
}

// Frank-Wolfe with away steps minimizing ||sum_i alpha_i cols_i||_p over the
// simplex. Line search is closed-form for p = 2 and golden-section on the
// convex 1-D restriction otherwise; away steps land exactly on faces.
template <typename S>
VecT<S> fw_core(const std::vector<VecT<S>>& cols, NormParam p, int max_iter, S tol,
                VecT<S> alpha) {
  const int m = static_cast<int>(cols.size());
  const Eigen::Index n = cols[0].size();
  const S eps = std::numeric_limits<S>::epsilon();

  auto combine = [&](const VecT<S>& a) {
    VecT<S> w = VecT<S>::Zero(n);
    for (int i = 0; i < m; ++i) {
      if (a[i] != S(0)) w += a[i] * cols[i];
    }
    return w;
  };
  auto line_objective = [&](const VecT<S>& w, const VecT<S>& dir, S gamma) {
    return lp_norm_t<S>(w + gamma * dir, p);
  };
  // Golden-section over [0, hi]; the restriction of a norm to a segment is
  // convex, so unimodal. Endpoints included: drop steps need gamma = hi.
  auto golden_min = [&](const VecT<S>& w, const VecT<S>& dir, S hi) {
    const S invphi = S(0.61803398874989484820458683436563L);
    S a(0), b = hi;
    S x1 = b - invphi * (b - a);
    S x2 = a + invphi * (b - a);
    S f1 = line_objective(w, dir, x1);
    S f2 = line_objective(w, dir, x2);
    for (int it = 0; it < 160 && (b - a) > eps * (S(1) + hi); ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = line_objective(w, dir, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = line_objective(w, dir, x2);
      }
    }
    const S mid = (a + b) / S(2);
    S best = mid, fb = line_objective(w, dir, mid);
    for (S cand : {S(0), hi}) {
      const S fc = line_objective(w, dir, cand);
      if (fc < fb) {
        fb = fc;
        best = cand;
      }
    }
    return best;
  };
  auto quad_min = [&](const VecT<S>& w, const VecT<S>& dir, S hi) {
    const S denom = dir.squaredNorm();
    if (denom <= S(0)) return S(0);
    const S g = -w.dot(dir) / denom;
    return g < S(0) ? S(0) : (g > hi ? hi : g);
  };

  VecT<S> w = combine(alpha);
  VecT<S> best_alpha = alpha;
  S best_f = lp_norm_t<S>(w, p);

  for (int t = 0; t < max_iter; ++t) {
    const S f = lp_norm_t<S>(w, p);
    if (f < best_f) {
      best_f = f;
      best_alpha = alpha;
    }
    if (f <= S(10) * eps) break;  // objective is already at its floor

    // Weights at rounding scale can hijack the away step: their step cap is
    // too small for any measurable improvement. Snap them to the face.
    bool snapped = false;
    for (int i = 0; i < m; ++i) {
      if (alpha[i] > S(0) && alpha[i] <= S(500) * eps) {
        alpha[i] = S(0);
        snapped = true;
      }
    }
    if (snapped) {
      alpha /= alpha.sum();
      w = combine(alpha);
      continue;
    }

    const VecT<S> u = norm_gradient_t<S>(w, p, f);
    int k_fw = 0, k_aw = -1;
    S s_min = std::numeric_limits<S>::infinity();
    S s_max = -std::numeric_limits<S>::infinity();
    VecT<S> scores(m);
    for (int i = 0; i < m; ++i) {
      scores[i] = cols[i].dot(u);
      if (scores[i] < s_min) {
        s_min = scores[i];
        k_fw = i;
      }
      if (alpha[i] > S(0) && scores[i] > s_max) {
        s_max = scores[i];
        k_aw = i;
      }
    }
    const S at_alpha = scores.dot(alpha);
    const S gap_fw = at_alpha - s_min;
    if (gap_fw <= tol) break;
    const bool away_usable = k_aw >= 0 && alpha[k_aw] < S(1);

    // Pairwise transfer first (it does not zig-zag at interior optima), then
    // the plain toward-vertex step, then the away step; a line search can be
    // rounding-blocked in any one of them near a face.
    bool moved = false;
    if (k_aw >= 0 && k_aw != k_fw) {  // pairwise: shift weight k_aw -> k_fw
      const S cap = alpha[k_aw];
      const VecT<S> dir = cols[k_fw] - cols[k_aw];
      const S gamma = p.is_two() ? quad_min(w, dir, cap) : golden_min(w, dir, cap);
      if (gamma > S(0)) {
        alpha[k_fw] += gamma;
        alpha[k_aw] -= gamma;
        if (gamma >= cap * (S(1) - S(8) * eps)) alpha[k_aw] = S(0);  // drop step
        moved = true;
      }
    }
    if (!moved) {
      const VecT<S> dir = cols[k_fw] - w;
      const S gamma = p.is_two() ? quad_min(w, dir, S(1)) : golden_min(w, dir, S(1));
      if (gamma > S(0)) {
        alpha *= (S(1) - gamma);
        alpha[k_fw] += gamma;
        moved = true;
      }
    }
    if (!moved && away_usable) {
      const S gmax = alpha[k_aw] / (S(1) - alpha[k_aw]);
      const VecT<S> dir = w - cols[k_aw];
      const S gamma = p.is_two() ? quad_min(w, dir, gmax) : golden_min(w, dir, gmax);
      if (gamma > S(0)) {
        alpha *= (S(1) + gamma);
        alpha[k_aw] -= gamma;
        if (gamma >= gmax * (S(1) - S(8) * eps)) alpha[k_aw] = S(0);  // drop step
        moved = true;
      }
    }
    if (!moved) break;
    w = combine(alpha);
  }
  const S f_final = lp_norm_t<S>(w, p);
  if (f_final < best_f) best_alpha = alpha;
  return best_alpha;
}

// Euclidean face polish: any value-comparison method stalls with weight
// error ~ sqrt(eps) near the optimum, so finish by solving the stationarity
// system exactly on the support the iterations identified, with active-set
// exchanges when the support was off by one.
inline Vec face_polish_l2(const std::vector<Vec>& cols, Vec alpha) {
  const int m = static_cast<int>(cols.size());
  std::vector<int> support;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] > 0.0) support.push_back(i);
  }
  const double f_in = lp_norm([&] {
    Vec w = Vec::Zero(cols[0].size());
    for (int i = 0; i < m; ++i) w += alpha[i] * cols[i];
    return w;
  }(), NormParam::l2());

  for (int round = 0; round < 2 * m + 2 && !support.empty(); ++round) {
    const int k = static_cast<int>(support.size());
    Mat kkt = Mat::Zero(k + 1, k + 1);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        kkt(i, j) = 2.0 * cols[support[i]].dot(cols[support[j]]);
        kkt(j, i) = kkt(i, j);
      }
      kkt(i, k) = 1.0;
      kkt(k, i) = 1.0;
    }
    Vec rhs = Vec::Zero(k + 1);
    rhs[k] = 1.0;
    Eigen::FullPivLU<Mat> lu(kkt);
    if (!lu.isInvertible()) break;
    const Vec sol = lu.solve(rhs);
    if (!sol.allFinite()) break;

    int most_negative = -1;
    for (int i = 0; i < k; ++i) {
      if (sol[i] < -1e-12 && (most_negative < 0 || sol[i] < sol[most_negative])) {
        most_negative = i;
      }
    }
    if (most_negative >= 0) {
      if (k == 1) break;
      support.erase(support.begin() + most_negative);
      continue;
    }

    Vec cand = Vec::Zero(m);
    for (int i = 0; i < k; ++i) cand[support[i]] = std::max(sol[i], 0.0);
    cand /= cand.sum();
    Vec w = Vec::Zero(cols[0].size());
    for (int i = 0; i < m; ++i) w += cand[i] * cols[i];
    const double f = lp_norm(w, NormParam::l2());
    if (f > f_in + 1e-12 * (1.0 + f_in)) break;  // monotone safeguard
    if (f <= 1e-15) return cand;

    // off-support vertex beating the face value re-enters the active set
    int enter = -1;
    double worst = -1e-13 * (1.0 + f);
    for (int i = 0; i < m; ++i) {
      if (cand[i] > 0.0) continue;
      const double violation = cols[i].dot(w) / f - f;
      if (violation < worst) {
        worst = violation;
        enter = i;
      }
    }
    if (enter < 0) return cand;
    support.push_back(enter);
  }
  return alpha;
}

// Double front end. Tight tolerances get a second pass at extended
// precision (double line searches bottom out near 1e-8 duality gaps) and,
// in the Euclidean case, the exact face polish.
inline Vec fw_min_norm_simplex(const std::vector<Vec>& cols, NormParam p, int max_iter,
                               double tol) {
  const int m = static_cast<int>(cols.size());
  if (m == 1) return Vec::Ones(1);
  Vec alpha = fw_core<double>(cols, p, max_iter, tol, Vec::Constant(m, 1.0 / m));
  if (tol < 1e-8) {
    std::vector<VecT<long double>> cols_l;
    cols_l.reserve(cols.size());
    for (const auto& c : cols) cols_l.push_back(c.cast<long double>());
    const VecT<long double> refined = fw_core<long double>(
        cols_l, p, max_iter, static_cast<long double>(tol), alpha.cast<long double>());
    alpha = refined.cast<double>();
    if (p.is_two()) alpha = face_polish_l2(cols, std::move(alpha));
  }
  return alpha;
}

}  // namespace detail

// Frank-Wolfe on the dual simplex problem for p in (1, inf). Defaults match
// the usual minimum-norm subsolver budget; verification paths pass tighter
// settings.
inline SimplexWeights solve_dual_fw(const GradientSet& gs, int max_iter = 20,
                                    double tol = 1e-6) {
  const NormParam p = gs.norm_param();
  if (p.is_one() || p.is_inf()) {
    throw UnsupportedNorm("Frank-Wolfe dual solver requires 1 < p < inf");
  }
  Vec a = detail::fw_min_norm_simplex(gs.normalized_all(), p, max_iter, tol);
  return SimplexWeights::sanitized(std::move(a));
}

// LP form of the dual for p in {1, inf}. Returns (weights, optimal value).
inline std::pair<SimplexWeights, double> solve_dual_lp(const GradientSet& gs) {
  const NormParam p = gs.norm_param();
  if (!p.is_one() && !p.is_inf()) {
    throw UnsupportedNorm("LP dual solver handles p = 1 and p = inf only");
  }
  const int m = gs.count();
  const int n = static_cast<int>(gs.dim());
  if (n > kLpDimensionCap) {
    throw DimensionCapExceeded("LP dual solver capped at n <= " +
                               std::to_string(kLpDimensionCap));
  }

  Mat ghat(n, m);
  for (int i = 0; i < m; ++i) ghat.col(i) = gs.normalized(i);

  LpProblem lp;
  if (p.is_one()) {
    // Variables [alpha(m), z(n)]: min sum z, |(Ghat alpha)_j| <= z_j.
    const int nv = m + n;
    lp.a_ub = Mat::Zero(2 * n, nv);
    lp.b_ub = Vec::Zero(2 * n);
    for (int j = 0; j < n; ++j) {
      lp.a_ub.row(j).head(m) = ghat.row(j);
      lp.a_ub(j, m + j) = -1.0;
      lp.a_ub.row(n + j).head(m) = -ghat.row(j);
      lp.a_ub(n + j, m + j) = -1.0;
    }
    lp.a_eq = Mat::Zero(1, nv);
    lp.a_eq.row(0).head(m).setOnes();
    lp.b_eq = Vec::Ones(1);
    lp.c = Vec::Zero(nv);
    lp.c.tail(n).setOnes();
  } else {
    // Variables [alpha(m), tau]: min tau, |(Ghat alpha)_j| <= tau.
    const int nv = m + 1;
    lp.a_ub = Mat::Zero(2 * n, nv);
    lp.b_ub = Vec::Zero(2 * n);
    for (int j = 0; j < n; ++j) {
      lp.a_ub.row(j).head(m) = ghat.row(j);
      lp.a_ub(j, m) = -1.0;
      lp.a_ub.row(n + j).head(m) = -ghat.row(j);
      lp.a_ub(n + j, m) = -1.0;
    }
    lp.a_eq = Mat::Zero(1, nv);
    lp.a_eq.row(0).head(m).setOnes();
    lp.b_eq = Vec::Ones(1);
    lp.c = Vec::Zero(nv);
    lp.c[m] = 1.0;
  }
  const LpResult sol = solve_lp(lp);
  if (!sol.optimal()) throw Error("dual LP did not reach an optimum");
  return {SimplexWeights::sanitized(sol.x.head(m)), sol.value};
}

// Closed-form primal recovery for p in (1, inf): the support map of w,
// which is l_q-unit and attains Holder equality against w.
inline PrimalRecovery recover_primal(const SimplexWeights& alpha, const GradientSet& gs) {
  const NormParam p = gs.norm_param();
  if (p.is_one() || p.is_inf()) {
    throw UnsupportedNorm("closed-form recovery requires 1 < p < inf; use the LP recovery");
  }
  PrimalRecovery rec;
  rec.w = gs.combine_normalized(alpha.alpha);
  rec.r_star = lp_norm(rec.w, p);
  if (rec.r_star <= kZeroGradThreshold) {
    throw DegenerateDirection("aggregate direction vanished; treat as terminated");
  }
  if (p.is_two()) {
    rec.v = rec.w / rec.r_star;
  } else {
    rec.v = signed_power(rec.w, p.p - 1.0) / std::pow(rec.r_star, p.p - 1.0);
  }
  return rec;
}

// LP recovery for p in {1, inf}: maximizes the inscribed radius directly and
// returns one optimal vertex; the direction need not be unique.
inline Vec recover_primal_lp(const SimplexWeights& /*alpha*/, const GradientSet& gs) {
  const NormParam p = gs.norm_param();
  if (!p.is_one() && !p.is_inf()) {
    throw UnsupportedNorm("LP recovery handles p = 1 and p = inf only");
  }
  const int m = gs.count();
  const int n = static_cast<int>(gs.dim());
  if (n > kLpDimensionCap) {
    throw DimensionCapExceeded("LP recovery capped at n <= " +
                               std::to_string(kLpDimensionCap));
  }
  Mat ghat(n, m);
  for (int i = 0; i < m; ++i) ghat.col(i) = gs.normalized(i);

  LpProblem lp;
  if (p.is_one()) {
    // q = inf. Variables [v+(n), v-(n), r]: max r with ghat'(v+ - v-) >= r
    // and 0 <= v+, v- <= 1.
    const int nv = 2 * n + 1;
    lp.a_ub = Mat::Zero(m + 2 * n, nv);
    lp.b_ub = Vec::Zero(m + 2 * n);
    for (int i = 0; i < m; ++i) {
      lp.a_ub.row(i).head(n) = -ghat.col(i).transpose();
      lp.a_ub.row(i).segment(n, n) = ghat.col(i).transpose();
      lp.a_ub(i, 2 * n) = 1.0;
    }
    for (int j = 0; j < n; ++j) {
      lp.a_ub(m + j, j) = 1.0;
      lp.b_ub[m + j] = 1.0;
      lp.a_ub(m + n + j, n + j) = 1.0;
      lp.b_ub[m + n + j] = 1.0;
    }
    lp.c = Vec::Zero(nv);
    lp.c[2 * n] = -1.0;  // max r
    const LpResult sol = solve_lp(lp);
    if (!sol.optimal()) throw Error("recovery LP did not reach an optimum");
    return sol.x.head(n) - sol.x.segment(n, n);
  }
  // q = 1. Variables [v+(n), v-(n), z(n), r]: max r with ghat'(v+ - v-) >= r,
  // |v| <= z componentwise, sum z <= 1.
  const int nv = 3 * n + 1;
  lp.a_ub = Mat::Zero(m + 2 * n + 1, nv);
  lp.b_ub = Vec::Zero(m + 2 * n + 1);
  for (int i = 0; i < m; ++i) {
    lp.a_ub.row(i).head(n) = -ghat.col(i).transpose();
    lp.a_ub.row(i).segment(n, n) = ghat.col(i).transpose();
    lp.a_ub(i, 3 * n) = 1.0;
  }
  for (int j = 0; j < n; ++j) {
    lp.a_ub(m + j, j) = 1.0;
    lp.a_ub(m + j, n + j) = -1.0;
    lp.a_ub(m + j, 2 * n + j) = -1.0;
    lp.a_ub(m + n + j, j) = -1.0;
    lp.a_ub(m + n + j, n + j) = 1.0;
    lp.a_ub(m + n + j, 2 * n + j) = -1.0;
  }
  lp.a_ub.row(m + 2 * n).segment(2 * n, n).setOnes();
  lp.b_ub[m + 2 * n] = 1.0;
  lp.c = Vec::Zero(nv);
  lp.c[3 * n] = -1.0;
  const LpResult sol = solve_lp(lp);
  if (!sol.optimal()) throw Error("recovery LP did not reach an optimum");
  return sol.x.head(n) - sol.x.segment(n, n);
}

struct DirectionOptions {
  double eps = 1e-6;        // stationarity threshold on ||w||_p
  double active_tol = 1e-7; // facet counts as active within this of r*
  int fw_max_iter = 20000;
  double fw_tol = 1e-10;
};

// Dual-solver dispatch on (m, p): exact solvers for the small l2 cases, the
// LP form for p in {1, inf}, Frank-Wolfe otherwise.
inline SimplexWeights solve_dual(const GradientSet& gs, int fw_max_iter = 20000,
                                 double fw_tol = 1e-10) {
  const NormParam p = gs.norm_param();
  const int m = gs.count();
  if (p.is_one() || p.is_inf()) return solve_dual_lp(gs).first;
  if (m == 1) return SimplexWeights{Vec::Ones(1)};
  if (p.is_two() && m == 2) return solve_dual_exact2(gs);
  if (p.is_two() && m == 3) return solve_dual_exact3(gs);
  return solve_dual_fw(gs, fw_max_iter, fw_tol);
}

// Optimal radius only; no primal recovery.
inline double dual_optimum(const GradientSet& gs, int fw_max_iter = 20000,
                           double fw_tol = 1e-10) {
  const SimplexWeights alpha = solve_dual(gs, fw_max_iter, fw_tol);
  return lp_norm(gs.combine_normalized(alpha.alpha), gs.norm_param());
}

// Full direction selection: dispatch to the matching dual solver, test the
// stopping rule, recover the l_q-unit direction, and apply the adaptive
// scalar sum_i g_i'v.
inline DirectionResult compute_direction(const GradientSet& gs, const DirectionOptions& opt) {
  const NormParam p = gs.norm_param();
  const int m = gs.count();

  DirectionResult res;
  const bool lp_path = p.is_one() || p.is_inf();
  res.alpha = solve_dual(gs, opt.fw_max_iter, opt.fw_tol);

  res.w = gs.combine_normalized(res.alpha.alpha);
  res.r_star = lp_norm(res.w, p);
  res.active.assign(m, false);
  // Even with eps = 0, a numerically vanished radius means stationarity.
  if (res.r_star <= std::max(opt.eps, kZeroGradThreshold)) {
    res.terminated = true;
    return res;
  }

  Vec v;
  if (lp_path) {
    v = recover_primal_lp(res.alpha, gs);
    res.nonunique_possible = true;
  } else {
    v = recover_primal(res.alpha, gs).v;
  }
  for (int i = 0; i < m; ++i) {
    res.active[i] = (compensated_dot(gs.normalized(i), v) - res.r_star <= opt.active_tol);
  }
  res.d = gs.sum_raw_inner(v) * v;
  res.v = std::move(v);
  return res;
}

inline DirectionResult compute_direction(const GradientSet& gs, double eps = 1e-6) {
  DirectionOptions opt;
  opt.eps = eps;
  return compute_direction(gs, opt);
}

}  // namespace chebdir

#endif  // CHEBDIR_CHEBYSHEV_HPP_
