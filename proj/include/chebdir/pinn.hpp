#ifndef CHEBDIR_PINN_HPP_
#define CHEBDIR_PINN_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chebdir/autodiff.hpp"
#include "chebdir/common.hpp"
#include "chebdir/numkit.hpp"

namespace chebdir {

// Fresh collocation points for one optimization step. Columns are points;
// row 0 is x, row 1 is y (steady problems) or t (time-dependent ones).
struct SampleBatch {
  Mat interior;
  Mat boundary;
  Mat initial;  // zero columns when the problem has no initial condition
  std::uint64_t seed = 0;
  int step = 0;
};

// A manufactured-solution PDE benchmark: domain box, exact solution and its
// needed derivatives, forcing term, samplers, and evaluation grid.
struct PinnProblem {
  enum class Kind { kHelmholtz, kKleinGordon };

  Kind kind;
  std::string name;
  Vec lo, hi;  // 2-D box
  int m = 2;   // loss count
  int nr = 1024, nb = 256, ni = 256;
  int eval_nx = 101, eval_ny = 101;

  double helm_k = 1.0, helm_a1 = 1.0, helm_a2 = 4.0;

  std::function<double(double, double)> exact;
  std::function<double(double, double)> forcing;
  std::function<double(double, double)> boundary_target;
  std::function<double(double, double)> exact_d2_axis0;  // u_xx
  std::function<double(double, double)> exact_d2_axis1;  // u_yy or u_tt
  std::function<double(double, double)> exact_d1_axis1;  // u_t (time problems)

  bool has_initial() const { return kind == Kind::kKleinGordon; }

  double exact_residual(double a, double b) const {
    if (kind == Kind::kHelmholtz) {
      return exact_d2_axis0(a, b) + exact_d2_axis1(a, b) + helm_k * helm_k * exact(a, b) -
             forcing(a, b);
    }
    const double u = exact(a, b);
    return exact_d2_axis1(a, b) - exact_d2_axis0(a, b) + u * u * u - forcing(a, b);
  }
};

namespace pinn_detail {

// The exact solution must satisfy the PDE on a probe grid, catching any
// transcription slip in the forcing or derivative formulas.
inline void probe_consistency(const PinnProblem& p) {
  for (int i = 1; i <= 8; ++i) {
    for (int j = 1; j <= 8; ++j) {
      const double a = p.lo[0] + (p.hi[0] - p.lo[0]) * i / 9.0;
      const double b = p.lo[1] + (p.hi[1] - p.lo[1]) * j / 9.0;
      if (std::abs(p.exact_residual(a, b)) > 1e-6) {
        throw Error(p.name + ": manufactured solution fails the PDE probe");
      }
    }
  }
}

}  // namespace pinn_detail

// Helmholtz on [-1,1]^2 with zero Dirichlet boundary:
//   u_xx + u_yy + k^2 u = f,  u*(x,y) = sin(a1 pi x) sin(a2 pi y).
inline PinnProblem helmholtz2d(double k = 1.0, double a1 = 1.0, double a2 = 4.0) {
  PinnProblem p;
  p.kind = PinnProblem::Kind::kHelmholtz;
  p.name = "helmholtz2d";
  p.lo = Vec::Constant(2, -1.0);
  p.hi = Vec::Constant(2, 1.0);
  p.m = 2;
  p.helm_k = k;
  p.helm_a1 = a1;
  p.helm_a2 = a2;
  const double pi = M_PI;
  p.exact = [=](double x, double y) { return std::sin(a1 * pi * x) * std::sin(a2 * pi * y); };
  p.forcing = [=](double x, double y) {
    return (k * k - (a1 * a1 + a2 * a2) * pi * pi) * std::sin(a1 * pi * x) *
           std::sin(a2 * pi * y);
  };
  p.boundary_target = [](double, double) { return 0.0; };  // homogeneous Dirichlet
  p.exact_d2_axis0 = [=](double x, double y) {
    return -(a1 * pi) * (a1 * pi) * std::sin(a1 * pi * x) * std::sin(a2 * pi * y);
  };
  p.exact_d2_axis1 = [=](double x, double y) {
    return -(a2 * pi) * (a2 * pi) * std::sin(a1 * pi * x) * std::sin(a2 * pi * y);
  };
  p.exact_d1_axis1 = [=](double x, double y) {
    return a2 * pi * std::sin(a1 * pi * x) * std::cos(a2 * pi * y);
  };
  pinn_detail::probe_consistency(p);
  return p;
}

// Klein-Gordon on (x,t) in [0,1]^2 with cubic nonlinearity:
//   u_tt - u_xx + u^3 = f,  u*(x,t) = x cos(5 pi t) + (t x)^3,
// Dirichlet data from u* at x in {0,1}, and u(x,0) = x, u_t(x,0) = 0.
inline PinnProblem klein_gordon1d() {
  PinnProblem p;
  p.kind = PinnProblem::Kind::kKleinGordon;
  p.name = "kleingordon1d";
  p.lo = Vec::Zero(2);
  p.hi = Vec::Constant(2, 1.0);
  p.m = 3;
  const double pi = M_PI;
  p.exact = [=](double x, double t) {
    return x * std::cos(5.0 * pi * t) + std::pow(t * x, 3.0);
  };
  p.forcing = [=](double x, double t) {
    const double u = x * std::cos(5.0 * pi * t) + std::pow(t * x, 3.0);
    return -25.0 * pi * pi * x * std::cos(5.0 * pi * t) + 6.0 * t * x * x * x -
           6.0 * t * t * t * x + u * u * u;
  };
  p.boundary_target = p.exact;  // Dirichlet data from the manufactured solution
  p.exact_d2_axis0 = [=](double x, double t) {  // u_xx
    return 6.0 * t * t * t * x;
  };
  p.exact_d2_axis1 = [=](double x, double t) {  // u_tt
    return -25.0 * pi * pi * x * std::cos(5.0 * pi * t) + 6.0 * t * x * x * x;
  };
  p.exact_d1_axis1 = [=](double x, double t) {  // u_t
    return -5.0 * pi * x * std::sin(5.0 * pi * t) + 3.0 * t * t * x * x * x;
  };
  pinn_detail::probe_consistency(p);
  return p;
}

inline PinnProblem make_problem(const std::string& name) {
  if (name == "helmholtz2d") return helmholtz2d();
  if (name == "kleingordon1d") return klein_gordon1d();
  throw ConfigError("unknown problem '" + name + "' (known: helmholtz2d, kleingordon1d)");
}

// Uniform resampling, deterministic per (seed, step). Boundary points sit on
// their manifolds exactly: edge coordinates are assigned, not sampled.
inline SampleBatch sample(const PinnProblem& p, std::uint64_t seed, int step) {
  Rng rng(seed, static_cast<std::uint64_t>(step));
  SampleBatch batch;
  batch.seed = seed;
  batch.step = step;

  batch.interior.resize(2, p.nr);
  for (int j = 0; j < p.nr; ++j) {
    batch.interior(0, j) = rng.uniform(p.lo[0], p.hi[0]);
    batch.interior(1, j) = rng.uniform(p.lo[1], p.hi[1]);
  }

  batch.boundary.resize(2, p.nb);
  if (p.kind == PinnProblem::Kind::kHelmholtz) {
    // Four edges; floor division with the remainder going to the first edges.
    const int base = p.nb / 4, rem = p.nb % 4;
    int col = 0;
    for (int e = 0; e < 4; ++e) {
      const int cnt = base + (e < rem ? 1 : 0);
      for (int j = 0; j < cnt; ++j, ++col) {
        const double t = rng.uniform(p.lo[e < 2 ? 1 : 0], p.hi[e < 2 ? 1 : 0]);
        switch (e) {
          case 0: batch.boundary.col(col) << p.lo[0], t; break;
          case 1: batch.boundary.col(col) << p.hi[0], t; break;
          case 2: batch.boundary.col(col) << t, p.lo[1]; break;
          default: batch.boundary.col(col) << t, p.hi[1]; break;
        }
      }
    }
  } else {
    // Spatial endpoints with uniformly sampled time coordinates.
    const int base = p.nb / 2, rem = p.nb % 2;
    int col = 0;
    for (int e = 0; e < 2; ++e) {
      const int cnt = base + (e < rem ? 1 : 0);
      for (int j = 0; j < cnt; ++j, ++col) {
        batch.boundary.col(col) << (e == 0 ? p.lo[0] : p.hi[0]), rng.uniform(p.lo[1], p.hi[1]);
      }
    }
  }

  if (p.has_initial()) {
    batch.initial.resize(2, p.ni);
    for (int j = 0; j < p.ni; ++j) {
      batch.initial(0, j) = rng.uniform(p.lo[0], p.hi[0]);
      batch.initial(1, j) = 0.0;  // the time coordinate is pinned
    }
  } else {
    batch.initial.resize(2, 0);
  }
  return batch;
}

inline Vec exact_on(const PinnProblem& p, const Mat& pts) {
  Vec u(pts.cols());
  for (Eigen::Index j = 0; j < pts.cols(); ++j) u[j] = p.exact(pts(0, j), pts(1, j));
  return u;
}

inline Vec forcing_on(const PinnProblem& p, const Mat& pts) {
  Vec f(pts.cols());
  for (Eigen::Index j = 0; j < pts.cols(); ++j) f[j] = p.forcing(pts(0, j), pts(1, j));
  return f;
}

// Mean-squared loss terms as tape builders: PDE residual with jet-based
// second derivatives, boundary mismatch, and (Klein-Gordon) the initial
// value and velocity mismatches summed with unit weights.
inline std::vector<LossBuilder> losses(const PinnProblem& p, const SampleBatch& batch) {
  std::vector<LossBuilder> out;

  const Mat interior = batch.interior;
  const Mat f_row = forcing_on(p, interior).transpose();
  if (p.kind == PinnProblem::Kind::kHelmholtz) {
    const double ksq = p.helm_k * p.helm_k;
    out.push_back({"residual", [interior, f_row, ksq](Tape& t) {
                     const auto [jx, jy] = forward_jet_pair(t, interior, 0, 1);
                     const int lap = t.add(jx.uss, jy.uss);
                     const int r =
                         t.sub(t.add(lap, t.scale(jx.u, ksq)), t.input(f_row));
                     return t.mean_sq(r);
                   }});
  } else {
    out.push_back({"residual", [interior, f_row](Tape& t) {
                     const auto [jx, jt] = forward_jet_pair(t, interior, 0, 1);
                     const int cube = t.mul(t.square(jt.u), jt.u);
                     const int wave = t.sub(jt.uss, jx.uss);
                     const int r = t.sub(t.add(wave, cube), t.input(f_row));
                     return t.mean_sq(r);
                   }});
  }

  const Mat boundary = batch.boundary;
  Mat ub_row(1, boundary.cols());
  for (Eigen::Index j = 0; j < boundary.cols(); ++j) {
    ub_row(0, j) = p.boundary_target(boundary(0, j), boundary(1, j));
  }
  out.push_back({"boundary", [boundary, ub_row](Tape& t) {
                   const int u = forward_value(t, boundary);
                   return t.mean_sq(t.sub(u, t.input(ub_row)));
                 }});

  if (p.has_initial()) {
    const Mat initial = batch.initial;
    const Mat u0_row = initial.row(0);  // u*(x, 0) = x
    out.push_back({"initial", [initial, u0_row](Tape& t) {
                     const Jet2 j = forward_jet(t, initial, 1);
                     const int value_term = t.mean_sq(t.sub(j.u, t.input(u0_row)));
                     const int velocity_term = t.mean_sq(j.us);
                     return t.add(value_term, velocity_term);
                   }});
  }
  return out;
}

// Loss values with the analytic solution substituted for the network;
// validates every PDE / forcing / boundary / initial formula at once.
inline std::vector<double> probe_losses(const PinnProblem& p, const SampleBatch& batch) {
  std::vector<double> out;
  {
    CompensatedSum s;
    for (Eigen::Index j = 0; j < batch.interior.cols(); ++j) {
      const double r = p.exact_residual(batch.interior(0, j), batch.interior(1, j));
      s.add(r * r);
    }
    out.push_back(s.value() / static_cast<double>(batch.interior.cols()));
  }
  {
    CompensatedSum s;
    for (Eigen::Index j = 0; j < batch.boundary.cols(); ++j) {
      const double d = p.exact(batch.boundary(0, j), batch.boundary(1, j)) -
                       p.boundary_target(batch.boundary(0, j), batch.boundary(1, j));
      s.add(d * d);
    }
    out.push_back(s.value() / static_cast<double>(batch.boundary.cols()));
  }
  if (p.has_initial()) {
    CompensatedSum s;
    for (Eigen::Index j = 0; j < batch.initial.cols(); ++j) {
      const double x = batch.initial(0, j);
      const double dv = p.exact(x, 0.0) - x;
      const double dt = p.exact_d1_axis1(x, 0.0);
      s.add(dv * dv + dt * dt);
    }
    out.push_back(s.value() / static_cast<double>(batch.initial.cols()));
  }
  return out;
}

// Root-sum-square error over root-sum-square reference.
inline double relative_l2(const Vec& pred, const Vec& ref) {
  if (pred.size() != ref.size()) throw DimensionMismatch("relative_l2: length mismatch");
  CompensatedSum num, den;
  for (Eigen::Index j = 0; j < pred.size(); ++j) {
    const double d = pred[j] - ref[j];
    num.add(d * d);
    den.add(ref[j] * ref[j]);
  }
  if (den.value() <= 0.0) throw ZeroReference("relative_l2: reference is identically zero");
  return std::sqrt(num.value()) / std::sqrt(den.value());
}

inline Mat eval_grid(const PinnProblem& p) {
  Mat pts(2, p.eval_nx * p.eval_ny);
  int col = 0;
  for (int i = 0; i < p.eval_nx; ++i) {
    for (int j = 0; j < p.eval_ny; ++j, ++col) {
      pts(0, col) = p.lo[0] + (p.hi[0] - p.lo[0]) * i / (p.eval_nx - 1.0);
      pts(1, col) = p.lo[1] + (p.hi[1] - p.lo[1]) * j / (p.eval_ny - 1.0);
    }
  }
  return pts;
}

inline double eval_rel_l2(const NetParams& params, const Mat& grid, const Vec& ref) {
  Tape tape(params);
  const int u = forward_value(tape, grid);
  return relative_l2(tape.value(u).row(0).transpose(), ref);
}

inline double eval_rel_l2(const PinnProblem& p, const NetParams& params) {
  const Mat grid = eval_grid(p);
  return eval_rel_l2(params, grid, exact_on(p, grid));
}

}  // namespace chebdir

#endif  // CHEBDIR_PINN_HPP_
