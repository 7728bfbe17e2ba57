#ifndef CHEBDIR_SIMPLEX_LP_HPP_
#define CHEBDIR_SIMPLEX_LP_HPP_

#include <algorithm>
#include <limits>
#include <vector>

#include "chebdir/common.hpp"

namespace chebdir {

// Dense two-phase simplex for small verification-scale programs:
//   min c'x   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
// Dantzig pricing with a Bland fallback after a degeneracy stall.

struct LpProblem {
  Mat a_ub;  // may have zero rows
  Vec b_ub;
  Mat a_eq;  // may have zero rows
  Vec b_eq;
  Vec c;
};

struct LpResult {
  enum class Status { kOptimal, kInfeasible, kUnbounded, kIterLimit };
  Status status = Status::kIterLimit;
  Vec x;
  double value = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;

  bool optimal() const { return status == Status::kOptimal; }
};

namespace lp_detail {

class Tableau {
 public:
  Tableau(const LpProblem& p) {
    n_ = static_cast<int>(p.c.size());
    mu_ = static_cast<int>(p.a_ub.rows());
    me_ = static_cast<int>(p.a_eq.rows());
    rows_ = mu_ + me_;

    // Column layout: [x | slacks | artificials | rhs]. Artificials are
    // assigned where the slack cannot serve as the starting basis.
    art_of_row_.assign(rows_, -1);
    int n_art = 0;
    for (int i = 0; i < mu_; ++i) {
      if (p.b_ub[i] < 0.0) art_of_row_[i] = n_art++;
    }
    for (int i = 0; i < me_; ++i) art_of_row_[mu_ + i] = n_art++;
    na_ = n_art;
    cols_ = n_ + mu_ + na_ + 1;

    t_ = Mat::Zero(rows_, cols_);
    basis_.assign(rows_, -1);
    for (int i = 0; i < mu_; ++i) {
      const double sign = (p.b_ub[i] < 0.0) ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * p.a_ub.row(i);
      t_(i, n_ + i) = sign * 1.0;  // slack
      t_(i, cols_ - 1) = sign * p.b_ub[i];
      if (art_of_row_[i] >= 0) {
        t_(i, n_ + mu_ + art_of_row_[i]) = 1.0;
        basis_[i] = n_ + mu_ + art_of_row_[i];
      } else {
        basis_[i] = n_ + i;
      }
    }
    for (int i = 0; i < me_; ++i) {
      const int r = mu_ + i;
      const double sign = (p.b_eq[i] < 0.0) ? -1.0 : 1.0;
      t_.row(r).head(n_) = sign * p.a_eq.row(i);
      t_(r, cols_ - 1) = sign * p.b_eq[i];
      t_(r, n_ + mu_ + art_of_row_[r]) = 1.0;
      basis_[r] = n_ + mu_ + art_of_row_[r];
    }
    scale_ = 1.0;
    if (rows_ > 0) scale_ += t_.col(cols_ - 1).cwiseAbs().maxCoeff();
  }

  // Runs simplex on cost vector `cost` (length = all structural columns).
  // Returns false on unbounded. Columns listed in `banned` never enter.
  bool run(const Vec& cost, const std::vector<bool>& banned, int max_iter, int& iters) {
    // Reduced cost row: d = cost - sum_i cost[basis_i] * row_i, tracked
    // incrementally through pivots.
    d_ = cost;
    neg_obj_ = 0.0;
    for (int i = 0; i < rows_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb != 0.0) {
        d_.head(cols_ - 1) -= cb * t_.row(i).head(cols_ - 1).transpose();
        neg_obj_ -= cb * t_(i, cols_ - 1);
      }
    }
    int stall = 0;
    bool bland = false;
    while (iters < max_iter) {
      const int col = pick_entering(banned, bland);
      if (col < 0) return true;  // optimal
      const int row = pick_leaving(col);
      if (row < 0) return false;  // unbounded
      const double before = neg_obj_;
      pivot(row, col);
      ++iters;
      if (std::abs(neg_obj_ - before) <= 1e-14 * scale_) {
        if (++stall > 2 * (rows_ + cols_)) bland = true;  // anti-cycling
      } else {
        stall = 0;
        bland = false;
      }
    }
    return true;  // iteration cap; caller inspects iters
  }

  // Phase-1 artificial elimination: pivot artificials out of the basis where
  // possible; rows that cannot be cleared are redundant and stay inert.
  void drive_out_artificials(std::vector<bool>& banned) {
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < n_ + mu_) continue;
      int col = -1;
      for (int j = 0; j < n_ + mu_; ++j) {
        if (!banned[j] && std::abs(t_(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) pivot(i, col);
    }
  }

  double objective() const { return -neg_obj_; }
  int n() const { return n_; }
  int n_slack() const { return mu_; }
  int n_art() const { return na_; }
  int cols_total() const { return n_ + mu_ + na_; }

  Vec extract_x() const {
    Vec x = Vec::Zero(n_);
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < n_) x[basis_[i]] = t_(i, cols_ - 1);
    }
    return x;
  }

 private:
  int pick_entering(const std::vector<bool>& banned, bool bland) const {
    const double tol = 1e-9 * scale_;
    if (bland) {
      for (int j = 0; j < cols_ - 1; ++j) {
        if (!banned[j] && d_[j] < -tol) return j;
      }
      return -1;
    }
    int best = -1;
    double best_val = -tol;
    for (int j = 0; j < cols_ - 1; ++j) {
      if (!banned[j] && d_[j] < best_val) {
        best_val = d_[j];
        best = j;
      }
    }
    return best;
  }

  int pick_leaving(int col) const {
    const double tol = 1e-9;
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows_; ++i) {
      const double a = t_(i, col);
      if (a > tol) {
        const double ratio = t_(i, cols_ - 1) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && best >= 0 && basis_[i] < basis_[best])) {
          best_ratio = ratio;
          best = i;
        }
      }
    }
    return best;
  }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    t_(row, col) = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) {
        t_.row(i) -= f * t_.row(row);
        t_(i, col) = 0.0;
      }
    }
    const double fd = d_[col];
    if (fd != 0.0) {
      d_.head(cols_ - 1) -= fd * t_.row(row).head(cols_ - 1).transpose();
      neg_obj_ -= fd * t_(row, cols_ - 1);
      d_[col] = 0.0;
    }
    basis_[row] = col;
  }

  int n_ = 0, mu_ = 0, me_ = 0, na_ = 0, rows_ = 0, cols_ = 0;
  double scale_ = 1.0;
  Mat t_;
  Vec d_;
  double neg_obj_ = 0.0;
  std::vector<int> basis_;
  std::vector<int> art_of_row_;
};

}  // namespace lp_detail

inline LpResult solve_lp(const LpProblem& p) {
  LpResult res;
  lp_detail::Tableau tab(p);
  const int total = tab.cols_total();
  const int max_iter = 200 * (total + 8);
  int iters = 0;

  if (tab.n_art() > 0) {
    Vec phase1_cost = Vec::Zero(total);
    phase1_cost.tail(tab.n_art()).setOnes();
    std::vector<bool> banned(total, false);
    tab.run(phase1_cost, banned, max_iter, iters);
    if (tab.objective() > 1e-7 * (1.0 + p.b_ub.cwiseAbs().sum() + p.b_eq.cwiseAbs().sum())) {
      res.status = LpResult::Status::kInfeasible;
      res.iterations = iters;
      return res;
    }
    for (int j = tab.n() + tab.n_slack(); j < total; ++j) banned[j] = true;
    tab.drive_out_artificials(banned);
    Vec phase2_cost = Vec::Zero(total);
    phase2_cost.head(tab.n()) = p.c;
    const bool bounded = tab.run(phase2_cost, banned, max_iter, iters);
    if (!bounded) {
      res.status = LpResult::Status::kUnbounded;
      res.iterations = iters;
      return res;
    }
  } else {
    Vec phase2_cost = Vec::Zero(total);
    phase2_cost.head(tab.n()) = p.c;
    std::vector<bool> banned(total, false);
    const bool bounded = tab.run(phase2_cost, banned, max_iter, iters);
    if (!bounded) {
      res.status = LpResult::Status::kUnbounded;
      res.iterations = iters;
      return res;
    }
  }

  res.status = (iters >= max_iter) ? LpResult::Status::kIterLimit : LpResult::Status::kOptimal;
  res.x = tab.extract_x();
  res.value = p.c.dot(res.x);
  res.iterations = iters;
  return res;
}

}  // namespace chebdir

#endif  // CHEBDIR_SIMPLEX_LP_HPP_
