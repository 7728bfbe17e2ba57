#ifndef CHEBDIR_BASELINES_HPP_
#define CHEBDIR_BASELINES_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chebdir/chebyshev.hpp"
#include "chebdir/common.hpp"
#include "chebdir/numkit.hpp"

namespace chebdir {

// Reference direction-selection rules, all in Euclidean geometry. `v` is the
// method's own aggregate (raw combination for the minimum-norm family, unit
// direction for ConFIG / the two-loss bisector); `v_unit` is its normalized
// form for direction-only comparisons.
struct BaselineResult {
  std::string method;
  Vec v;
  Vec alpha;  // simplex weights, or unconstrained coefficients for imtl_g
  std::optional<double> common_inner;  // the shared inner product, when the rule equalizes
  std::optional<Vec> v_unit;
};

// Minimum-norm convex combination of the raw gradients.
inline BaselineResult mgda(const GradientSet& gs, int max_iter = 20, double tol = 1e-6) {
  BaselineResult res;
  res.method = "mgda";
  res.alpha = detail::fw_min_norm_simplex(gs.grads_all(), NormParam::l2(), max_iter, tol);
  res.v = gs.combine_raw(res.alpha);
  const double n = res.v.norm();
  if (n > 0.0) res.v_unit = res.v / n;
  return res;
}

// Equal normalized inner products with a positive common value: minimum-norm
// solution of Ghat' w = 1 through the Gram pseudo-inverse, then normalized.
inline BaselineResult config_dir(const GradientSet& gs) {
  const int m = gs.count();
  const Mat g = gram(gs.normalized_all());
  const Vec coef = pinv_small(g) * Vec::Ones(m);
  Vec w = Vec::Zero(gs.dim());
  for (int i = 0; i < m; ++i) w += coef[i] * gs.normalized(i);

  Vec residual(m);
  for (int i = 0; i < m; ++i) residual[i] = compensated_dot(gs.normalized(i), w) - 1.0;
  if (residual.cwiseAbs().maxCoeff() > 1e-6) {
    throw Infeasible("equal-inner-product system is inconsistent for this gradient set");
  }
  BaselineResult res;
  res.method = "config";
  res.alpha = coef;
  res.v = w / w.norm();
  res.v_unit = res.v;
  res.common_inner = compensated_dot(gs.normalized(0), res.v);
  return res;
}

// Closed-form coefficients equalizing normalized-gradient inner products;
// combines the raw gradients, so the result may leave the dual cone.
inline BaselineResult imtl_g(const GradientSet& gs) {
  const int m = gs.count();
  if (m < 2) throw WrongArity("imtl_g requires at least two objectives");
  Mat u(gs.dim(), m - 1);
  Mat graw(gs.dim(), m - 1);
  for (int i = 1; i < m; ++i) {
    u.col(i - 1) = gs.normalized(0) - gs.normalized(i);
    graw.col(i - 1) = gs.grad(0) - gs.grad(i);
  }
  // Row system alpha_tail * (G'U) = g_1'U, solved as (G'U)' x = U'g_1.
  const Mat sys_t = u.transpose() * graw;
  Eigen::JacobiSVD<Mat> svd(sys_t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smax <= 0.0 || smin / smax < 1e-12) {
    throw SingularSystem("imtl_g coefficient system is numerically singular");
  }
  const Vec rhs = u.transpose() * gs.grad(0);
  const Vec tail = svd.solve(rhs);
  Vec alpha(m);
  alpha[0] = 1.0 - tail.sum();
  alpha.tail(m - 1) = tail;

  BaselineResult res;
  res.method = "imtl_g";
  res.alpha = alpha;
  res.v = gs.combine_raw(alpha);
  const double n = res.v.norm();
  if (n > 0.0) {
    res.v_unit = res.v / n;
    res.common_inner = compensated_dot(gs.normalized(0), *res.v_unit);
  }
  return res;
}

// Minimum-norm combination of gradients rescaled by ||g_i||^(-rho); rho = 0
// reduces to mgda, rho = 1 to the normalized-gradient dual problem.
inline BaselineResult gapo(const GradientSet& gs, double rho, int max_iter = 20,
                           double tol = 1e-6) {
  if (rho < 0.0) throw Error("gapo: rho must be nonnegative");
  std::vector<Vec> cols;
  cols.reserve(gs.count());
  for (int i = 0; i < gs.count(); ++i) {
    const double s = std::pow(gs.grad(i).norm(), rho);
    cols.push_back(gs.grad(i) / s);
  }
  BaselineResult res;
  res.method = "gapo";
  res.alpha = detail::fw_min_norm_simplex(cols, NormParam::l2(), max_iter, tol);
  res.v = Vec::Zero(gs.dim());
  for (int i = 0; i < gs.count(); ++i) res.v += res.alpha[i] * cols[i];
  const double n = res.v.norm();
  if (n > 0.0) res.v_unit = res.v / n;
  return res;
}

// Two-objective angle bisector of the normalized gradients.
inline BaselineResult dcgd_center(const GradientSet& gs) {
  if (gs.count() != 2) throw WrongArity("dcgd_center is defined for m = 2");
  Vec s = gs.normalized(0) + gs.normalized(1);
  const double n = s.norm();
  if (n <= 1e-10) throw DegenerateBisector("antipodal normalized gradients");
  BaselineResult res;
  res.method = "dcgd_center";
  res.v = s / n;
  res.v_unit = res.v;
  Vec a(2);
  a << 0.5, 0.5;
  res.alpha = a;
  return res;
}

}  // namespace chebdir

#endif  // CHEBDIR_BASELINES_HPP_
