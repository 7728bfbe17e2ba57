#ifndef CHEBDIR_NUMKIT_HPP_
#define CHEBDIR_NUMKIT_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "chebdir/common.hpp"

namespace chebdir {

inline constexpr double kZeroGradThreshold = 1e-12;

// Conjugate norm pair. Infinity is the IEEE value, checked exactly, so the
// p=1 <-> q=inf pairing never goes through float arithmetic.
struct NormParam {
  double p;

  static NormParam of(double p) {
    if (!(p >= 1.0)) throw UnsupportedNorm("norm parameter must satisfy p >= 1");
    return NormParam{p};
  }
  static NormParam l1() { return NormParam{1.0}; }
  static NormParam l2() { return NormParam{2.0}; }
  static NormParam linf() { return NormParam{std::numeric_limits<double>::infinity()}; }

  bool is_one() const { return p == 1.0; }
  bool is_inf() const { return std::isinf(p); }
  bool is_two() const { return p == 2.0; }

  double q() const {
    if (is_one()) return std::numeric_limits<double>::infinity();
    if (is_inf()) return 1.0;
    return p / (p - 1.0);
  }
  NormParam conjugate() const { return NormParam{q()}; }
};

// Neumaier-compensated accumulator; fixed evaluation order makes reductions
// reproducible run to run.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw DimensionMismatch("dot: size mismatch");
  CompensatedSum acc;
  for (Eigen::Index j = 0; j < x.size(); ++j) acc.add(x[j] * y[j]);
  return acc.value();
}

inline double lp_norm(const Vec& x, NormParam p) {
  if (x.size() == 0) return 0.0;
  if (p.is_inf()) return x.cwiseAbs().maxCoeff();
  if (p.is_one()) {
    CompensatedSum acc;
    for (Eigen::Index j = 0; j < x.size(); ++j) acc.add(std::abs(x[j]));
    return acc.value();
  }
  // Scale by the max magnitude to keep |x_j/scale|^p in range.
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  CompensatedSum acc;
  if (p.is_two()) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double t = x[j] / scale;
      acc.add(t * t);
    }
    return scale * std::sqrt(acc.value());
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    acc.add(std::pow(std::abs(x[j]) / scale, p.p));
  }
  return scale * std::pow(acc.value(), 1.0 / p.p);
}

inline Vec normalize_grad(const Vec& g, NormParam p) {
  const double n = lp_norm(g, p);
  if (n < kZeroGradThreshold) {
    throw ZeroGradient("gradient has vanishing l_p norm (" + std::to_string(n) + ")");
  }
  return g / n;
}

// Componentwise sign-preserving power: out_j = sgn(w_j) * |w_j|^e.
inline Vec signed_power(const Vec& w, double e) {
  Vec out(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double a = std::abs(w[j]);
    out[j] = (w[j] > 0.0 ? 1.0 : (w[j] < 0.0 ? -1.0 : 0.0)) * std::pow(a, e);
  }
  return out;
}

inline Mat gram(const std::vector<Vec>& vs) {
  const int m = static_cast<int>(vs.size());
  if (m == 0) throw DimensionMismatch("gram: empty input");
  const Eigen::Index n = vs[0].size();
  for (const auto& v : vs) {
    if (v.size() != n) throw DimensionMismatch("gram: vectors differ in dimension");
  }
  Mat g(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double d = compensated_dot(vs[i], vs[j]);
      g(i, j) = d;
      g(j, i) = d;  // stored symmetry is exact
    }
  }
  return g;
}

// Spectral pseudo-inverse of a small symmetric matrix. `cutoff_rel` is
// relative to the largest |eigenvalue|, keeping the rank decision scale-free.
inline Mat pinv_small(const Mat& a, double cutoff_rel = 1e-10) {
  if (a.rows() != a.cols()) throw DimensionMismatch("pinv_small: matrix not square");
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const Vec& lam = es.eigenvalues();
  const Mat& u = es.eigenvectors();
  const double lmax = lam.cwiseAbs().maxCoeff();
  if (lmax == 0.0) return Mat::Zero(a.rows(), a.cols());
  const double cut = cutoff_rel * lmax;
  Vec inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    inv[i] = (std::abs(lam[i]) <= cut) ? 0.0 : 1.0 / lam[i];
  }
  return u * inv.asDiagonal() * u.transpose();
}

}  // namespace chebdir

#endif  // CHEBDIR_NUMKIT_HPP_
