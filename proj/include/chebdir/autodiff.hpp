#ifndef CHEBDIR_AUTODIFF_HPP_
#define CHEBDIR_AUTODIFF_HPP_

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chebdir/chebyshev.hpp"
#include "chebdir/common.hpp"
#include "chebdir/numkit.hpp"

namespace chebdir {

// Tanh multilayer perceptron described by layer widths. The default is the
// benchmark-harness configuration: three hidden layers of width 50.
struct NetSpec {
  int input_dim = 2;
  std::vector<int> hidden = {50, 50, 50};
  int output_dim = 1;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
  std::pair<int, int> layer_io(int l) const {
    const int in = (l == 0) ? input_dim : hidden[l - 1];
    const int out = (l == layer_count() - 1) ? output_dim : hidden[l];
    return {in, out};
  }
  int param_count() const {
    int n = 0;
    for (int l = 0; l < layer_count(); ++l) {
      const auto [in, out] = layer_io(l);
      n += (in + 1) * out;
    }
    return n;
  }
};

// Flat parameter vector with per-layer views. Layout per layer: the weight
// matrix (out x in, column-major) followed by the bias.
class NetParams {
 public:
  NetParams(NetSpec spec, Vec theta) : spec_(std::move(spec)), theta_(std::move(theta)) {
    int off = 0;
    for (int l = 0; l < spec_.layer_count(); ++l) {
      const auto [in, out] = spec_.layer_io(l);
      offsets_.push_back({off, off + in * out, in, out});
      off += (in + 1) * out;
    }
    if (off != theta_.size()) throw DimensionMismatch("NetParams: flat vector length mismatch");
  }

  const NetSpec& spec() const { return spec_; }
  const Vec& theta() const { return theta_; }
  Eigen::Index size() const { return theta_.size(); }

  // In-place parameter update; views stay valid.
  void set_theta(const Vec& theta) {
    if (theta.size() != theta_.size()) throw DimensionMismatch("set_theta: length mismatch");
    theta_ = theta;
  }

  Eigen::Map<const Mat> weight(int l) const {
    const auto& o = offsets_[l];
    return Eigen::Map<const Mat>(theta_.data() + o.w, o.out, o.in);
  }
  Eigen::Map<const Vec> bias(int l) const {
    const auto& o = offsets_[l];
    return Eigen::Map<const Vec>(theta_.data() + o.b, o.out);
  }
  int weight_offset(int l) const { return offsets_[l].w; }
  int bias_offset(int l) const { return offsets_[l].b; }

 private:
  struct Offsets {
    int w, b, in, out;
  };
  NetSpec spec_;
  Vec theta_;
  std::vector<Offsets> offsets_;
};

// Xavier-normal weights, zero biases, deterministic in the seed.
inline NetParams init_xavier(const NetSpec& spec, std::uint64_t seed) {
  Vec theta = Vec::Zero(spec.param_count());
  Rng rng(seed);
  int off = 0;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const auto [in, out] = spec.layer_io(l);
    const double stddev = std::sqrt(2.0 / static_cast<double>(in + out));
    for (int j = 0; j < in * out; ++j) theta[off + j] = stddev * rng.normal();
    off += (in + 1) * out;  // biases stay zero
  }
  return NetParams(spec, std::move(theta));
}

// Reverse-mode tape over matrix-valued nodes (feature rows, batch columns).
// Every primitive has a hand-written adjoint, so one reverse sweep
// differentiates any recorded scalar with respect to the flat parameters.
//
// Recording is steady-state allocation-free: reset() rewinds a cursor and
// later recordings reuse the node storage, which matters because training
// re-records an identically-shaped graph every step.
class Tape {
 public:
  explicit Tape(const NetParams& params) : params_(&params) {}

  void reset() { cursor_ = 0; }
  // Point the tape at (possibly updated) parameters and rewind.
  void rebind(const NetParams& params) {
    params_ = &params;
    reset();
  }
  const NetParams& params() const { return *params_; }

  int input(const Mat& x) {
    const int id = alloc(Op::kInput, -1, -1, x.rows(), x.cols());
    nodes_[id].val = x;
    return id;
  }
  // Zero leaf with a single row of ones: the directional seed along an axis.
  int input_axis_seed(Eigen::Index rows, Eigen::Index cols, int axis) {
    const int id = alloc(Op::kInput, -1, -1, rows, cols);
    nodes_[id].val.setZero();
    nodes_[id].val.row(axis).setOnes();
    return id;
  }
  int input_zero(Eigen::Index rows, Eigen::Index cols) {
    const int id = alloc(Op::kInput, -1, -1, rows, cols);
    nodes_[id].val.setZero();
    return id;
  }

  // theta exposed as an n x 1 value; its adjoint flows into the parameter
  // gradient directly.
  int param_vector() {
    const int id = alloc(Op::kParamVec, -1, -1, params_->size(), 1);
    nodes_[id].val = params_->theta();
    return id;
  }

  int affine(int layer, int x) {
    const auto [in, out] = params_->spec().layer_io(layer);
    const int id = alloc(Op::kAffine, x, -1, out, nodes_[x].val.cols(), layer);
    nodes_[id].val.noalias() = params_->weight(layer) * nodes_[x].val;
    nodes_[id].val.colwise() += params_->bias(layer);
    return id;
  }
  int linear(int layer, int x) {
    const auto [in, out] = params_->spec().layer_io(layer);
    const int id = alloc(Op::kLinear, x, -1, out, nodes_[x].val.cols(), layer);
    nodes_[id].val.noalias() = params_->weight(layer) * nodes_[x].val;
    return id;
  }
  // tanh via the vectorizable exp kernel: 1 - 2/(exp(2x)+1). Eigen has no
  // packet tanh for doubles; this form is several times faster at ~1 ulp.
  int tanh_node(int x) {
    const int id = alloc_like(Op::kTanh, x, -1, x);
    nodes_[id].val.array() = 1.0 - 2.0 / ((2.0 * nodes_[x].val.array()).exp() + 1.0);
    return id;
  }
  int square(int x) {
    const int id = alloc_like(Op::kSquare, x, -1, x);
    nodes_[id].val.array() = nodes_[x].val.array().square();
    return id;
  }
  int mul(int a, int b) {
    check_same_shape(a, b, "mul");
    const int id = alloc_like(Op::kMul, a, b, a);
    nodes_[id].val.array() = nodes_[a].val.array() * nodes_[b].val.array();
    return id;
  }
  int add(int a, int b) {
    check_same_shape(a, b, "add");
    const int id = alloc_like(Op::kAdd, a, b, a);
    nodes_[id].val = nodes_[a].val + nodes_[b].val;
    return id;
  }
  int sub(int a, int b) {
    check_same_shape(a, b, "sub");
    const int id = alloc_like(Op::kSub, a, b, a);
    nodes_[id].val = nodes_[a].val - nodes_[b].val;
    return id;
  }
  int scale(int a, double s) { return affine_scalar(a, s, 0.0); }
  // k * x + c, elementwise.
  int affine_scalar(int a, double k, double c) {
    const int id = alloc_like(Op::kAffineScalar, a, -1, a);
    nodes_[id].k = k;
    nodes_[id].val.array() = k * nodes_[a].val.array() + c;
    return id;
  }
  // Jet rule through tanh, first order: out = (1 - y^2) s, with y = tanh(x)
  // taken from an already-recorded tanh node.
  int jet_s(int y, int s) {
    check_same_shape(y, s, "jet_s");
    const int id = alloc_like(Op::kJetS, y, s, y);
    nodes_[id].val.array() =
        (1.0 - nodes_[y].val.array().square()) * nodes_[s].val.array();
    return id;
  }
  // Jet rule through tanh, second order:
  //   out = (1 - y^2) ss - 2 y (1 - y^2) s^2.
  // Fused into one sweep; these two ops are what keeps the per-step tape
  // memory traffic reasonable.
  int jet_ss(int y, int s, int ss) {
    check_same_shape(y, s, "jet_ss");
    check_same_shape(y, ss, "jet_ss");
    const int id = alloc_like(Op::kJetSS, y, s, y);
    nodes_[id].c_parent = ss;
    auto ya = nodes_[y].val.array();
    auto sa = nodes_[s].val.array();
    auto ssa = nodes_[ss].val.array();
    nodes_[id].val.array() = (1.0 - ya.square()) * (ssa - 2.0 * ya * sa.square());
    return id;
  }
  // Mean over batch columns of the squared entries: (1/cols) sum x_ij^2.
  int mean_sq(int a) {
    const int id = alloc(Op::kMeanSq, a, -1, 1, 1);
    const Mat& x = nodes_[a].val;
    CompensatedSum s;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      for (Eigen::Index r = 0; r < x.rows(); ++r) s.add(x(r, c) * x(r, c));
    }
    nodes_[id].val(0, 0) = s.value() / static_cast<double>(x.cols());
    return id;
  }
  int sum_all(int a) {
    const int id = alloc(Op::kSumAll, a, -1, 1, 1);
    const Mat& x = nodes_[a].val;
    CompensatedSum s;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      for (Eigen::Index r = 0; r < x.rows(); ++r) s.add(x(r, c));
    }
    nodes_[id].val(0, 0) = s.value();
    return id;
  }

  const Mat& value(int id) const { return nodes_[id].val; }
  double scalar_value(int id) const {
    const Mat& v = nodes_[id].val;
    if (v.rows() != 1 || v.cols() != 1) throw DimensionMismatch("node is not a scalar");
    return v(0, 0);
  }

  // One reverse sweep from a recorded scalar; returns d(scalar)/d(theta).
  // The tape stays intact, so further recording or another sweep is fine.
  Vec backward(int output) {
    if (output < 0 || output >= cursor_) throw DimensionMismatch("backward: bad node id");
    if (nodes_[output].val.rows() != 1 || nodes_[output].val.cols() != 1) {
      throw DimensionMismatch("backward: output must be a recorded scalar");
    }
    if (pgrad_.size() != params_->size()) pgrad_.resize(params_->size());
    pgrad_.setZero();
    ++sweep_;
    adj_of(output)(0, 0) = 1.0;

    for (int id = output; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.adj_sweep != sweep_) continue;  // not reachable from the output
      switch (n.op) {
        case Op::kInput:
          break;
        case Op::kParamVec:
          pgrad_ += n.adj.col(0);
          break;
        case Op::kAffine:
        case Op::kLinear: {
          const Mat& x = nodes_[n.a].val;
          const auto w = params_->weight(n.layer);
          Eigen::Map<Mat> wgrad(pgrad_.data() + params_->weight_offset(n.layer), w.rows(),
                                w.cols());
          wgrad.noalias() += n.adj * x.transpose();
          if (n.op == Op::kAffine) {
            Eigen::Map<Vec> bgrad(pgrad_.data() + params_->bias_offset(n.layer), w.rows());
            bgrad += n.adj.rowwise().sum();
          }
          adj_of(n.a).noalias() += w.transpose() * n.adj;
          break;
        }
        case Op::kTanh:
          adj_of(n.a).array() += (1.0 - n.val.array().square()) * n.adj.array();
          break;
        case Op::kSquare:
          adj_of(n.a).array() += 2.0 * nodes_[n.a].val.array() * n.adj.array();
          break;
        case Op::kMul:
          adj_of(n.a).array() += nodes_[n.b].val.array() * n.adj.array();
          adj_of(n.b).array() += nodes_[n.a].val.array() * n.adj.array();
          break;
        case Op::kAdd:
          adj_of(n.a) += n.adj;
          adj_of(n.b) += n.adj;
          break;
        case Op::kSub:
          adj_of(n.a) += n.adj;
          adj_of(n.b) -= n.adj;
          break;
        case Op::kAffineScalar:
          adj_of(n.a) += n.k * n.adj;
          break;
        case Op::kJetS: {
          auto ya = nodes_[n.a].val.array();
          auto sa = nodes_[n.b].val.array();
          auto ga = n.adj.array();
          adj_of(n.a).array() += (-2.0 * ya * sa) * ga;
          adj_of(n.b).array() += (1.0 - ya.square()) * ga;
          break;
        }
        case Op::kJetSS: {
          auto ya = nodes_[n.a].val.array();
          auto sa = nodes_[n.b].val.array();
          auto ssa = nodes_[n.c_parent].val.array();
          auto ga = n.adj.array();
          adj_of(n.a).array() +=
              (-2.0 * ya * ssa - 2.0 * sa.square() * (1.0 - 3.0 * ya.square())) * ga;
          adj_of(n.b).array() += (-4.0 * ya * (1.0 - ya.square()) * sa) * ga;
          adj_of(n.c_parent).array() += (1.0 - ya.square()) * ga;
          break;
        }
        case Op::kMeanSq: {
          const double s = 2.0 * n.adj(0, 0) / static_cast<double>(nodes_[n.a].val.cols());
          adj_of(n.a) += s * nodes_[n.a].val;
          break;
        }
        case Op::kSumAll:
          adj_of(n.a).array() += n.adj(0, 0);
          break;
      }
    }
    return pgrad_;
  }

 private:
  enum class Op {
    kInput,
    kParamVec,
    kAffine,
    kLinear,
    kTanh,
    kSquare,
    kMul,
    kAdd,
    kSub,
    kAffineScalar,
    kJetS,
    kJetSS,
    kMeanSq,
    kSumAll
  };
  struct Node {
    Op op = Op::kInput;
    int a = -1, b = -1, c_parent = -1;
    int layer = -1;
    double k = 0.0;
    Mat val;
    Mat adj;
    long adj_sweep = -1;
  };

  int alloc(Op op, int a, int b, Eigen::Index rows, Eigen::Index cols, int layer = -1) {
    if (cursor_ == static_cast<int>(nodes_.size())) nodes_.emplace_back();
    Node& n = nodes_[cursor_];
    n.op = op;
    n.a = a;
    n.b = b;
    n.c_parent = -1;
    n.layer = layer;
    n.k = 0.0;
    n.adj_sweep = -1;
    if (n.val.rows() != rows || n.val.cols() != cols) n.val.resize(rows, cols);
    return cursor_++;
  }
  int alloc_like(Op op, int a, int b, int shape_of) {
    return alloc(op, a, b, nodes_[shape_of].val.rows(), nodes_[shape_of].val.cols());
  }
  Mat& adj_of(int id) {
    Node& n = nodes_[id];
    if (n.adj_sweep != sweep_) {
      if (n.adj.rows() != n.val.rows() || n.adj.cols() != n.val.cols()) {
        n.adj.resize(n.val.rows(), n.val.cols());
      }
      n.adj.setZero();
      n.adj_sweep = sweep_;
    }
    return n.adj;
  }
  void check_same_shape(int a, int b, const char* what) const {
    if (nodes_[a].val.rows() != nodes_[b].val.rows() ||
        nodes_[a].val.cols() != nodes_[b].val.cols()) {
      throw DimensionMismatch(std::string(what) + ": operand shapes differ");
    }
  }

  const NetParams* params_;
  std::vector<Node> nodes_;
  int cursor_ = 0;
  long sweep_ = 0;
  Vec pgrad_;
};

// Network output plus its exact first and second derivatives along one input
// axis, as tape nodes. Any scalar built from these stays differentiable with
// respect to the parameters.
struct Jet2 {
  int u, us, uss;
};

// Plain forward pass: value stream only.
inline int forward_value(Tape& tape, const Mat& points) {
  const NetSpec& spec = tape.params().spec();
  if (points.rows() != spec.input_dim) throw DimensionMismatch("forward: input dim mismatch");
  int u = tape.input(points);
  for (int l = 0; l < spec.layer_count(); ++l) {
    u = tape.affine(l, u);
    if (l + 1 < spec.layer_count()) u = tape.tanh_node(u);
  }
  return u;
}

// Order-2 jet forward pass along `axis`. Affine layers act linearly on all
// three streams; tanh applies the jet_s / jet_ss rules.
inline Jet2 forward_jet(Tape& tape, const Mat& points, int axis) {
  const NetSpec& spec = tape.params().spec();
  if (points.rows() != spec.input_dim) throw DimensionMismatch("forward_jet: input dim mismatch");
  if (axis < 0 || axis >= spec.input_dim) throw DimensionMismatch("forward_jet: bad axis");

  int u = tape.input(points);
  int us = tape.input_axis_seed(points.rows(), points.cols(), axis);
  int uss = tape.input_zero(points.rows(), points.cols());

  for (int l = 0; l < spec.layer_count(); ++l) {
    u = tape.affine(l, u);
    us = tape.linear(l, us);
    uss = tape.linear(l, uss);
    if (l + 1 < spec.layer_count()) {
      const int y = tape.tanh_node(u);
      uss = tape.jet_ss(y, us, uss);
      us = tape.jet_s(y, us);
      u = y;
    }
  }
  return Jet2{u, us, uss};
}

// Two-axis jet pass sharing one value stream; both second derivatives come
// out of a single network traversal.
inline std::pair<Jet2, Jet2> forward_jet_pair(Tape& tape, const Mat& points, int axis_a,
                                              int axis_b) {
  const NetSpec& spec = tape.params().spec();
  if (points.rows() != spec.input_dim) throw DimensionMismatch("forward_jet: input dim mismatch");

  int u = tape.input(points);
  int us_a = tape.input_axis_seed(points.rows(), points.cols(), axis_a);
  int uss_a = tape.input_zero(points.rows(), points.cols());
  int us_b = tape.input_axis_seed(points.rows(), points.cols(), axis_b);
  int uss_b = tape.input_zero(points.rows(), points.cols());

  for (int l = 0; l < spec.layer_count(); ++l) {
    u = tape.affine(l, u);
    us_a = tape.linear(l, us_a);
    uss_a = tape.linear(l, uss_a);
    us_b = tape.linear(l, us_b);
    uss_b = tape.linear(l, uss_b);
    if (l + 1 < spec.layer_count()) {
      const int y = tape.tanh_node(u);
      uss_a = tape.jet_ss(y, us_a, uss_a);
      us_a = tape.jet_s(y, us_a);
      uss_b = tape.jet_ss(y, us_b, uss_b);
      us_b = tape.jet_s(y, us_b);
      u = y;
    }
  }
  return {Jet2{u, us_a, uss_a}, Jet2{u, us_b, uss_b}};
}

// Single-point jet evaluation: (u, du/dx_axis, d2u/dx_axis^2).
inline std::array<double, 3> jet_eval(const NetParams& params, const Vec& point, int axis) {
  Tape tape(params);
  const Jet2 jet = forward_jet(tape, point, axis);
  return {tape.value(jet.u)(0, 0), tape.value(jet.us)(0, 0), tape.value(jet.uss)(0, 0)};
}

// A named scalar loss recorded onto a caller-provided tape.
struct LossBuilder {
  std::string name;
  std::function<int(Tape&)> build;
};

struct LossEval {
  std::vector<double> values;
  std::vector<Vec> grads;
};

// One forward recording and one reverse sweep per loss, each on its own tape.
inline LossEval eval_losses(const NetParams& params, const std::vector<LossBuilder>& builders) {
  LossEval out;
  out.values.reserve(builders.size());
  out.grads.reserve(builders.size());
  for (const auto& b : builders) {
    Tape tape(params);
    const int id = b.build(tape);
    out.values.push_back(tape.scalar_value(id));
    out.grads.push_back(tape.backward(id));
  }
  return out;
}

// Reusing caller-owned tapes keeps the training loop allocation-free once
// the graph shapes settle.
inline LossEval eval_losses(const NetParams& params, const std::vector<LossBuilder>& builders,
                            std::vector<Tape>& tapes) {
  while (tapes.size() < builders.size()) tapes.emplace_back(params);
  LossEval out;
  out.values.reserve(builders.size());
  out.grads.reserve(builders.size());
  for (std::size_t i = 0; i < builders.size(); ++i) {
    tapes[i].rebind(params);
    const int id = builders[i].build(tapes[i]);
    out.values.push_back(tapes[i].scalar_value(id));
    out.grads.push_back(tapes[i].backward(id));
  }
  return out;
}

// Grouped per-loss gradients as a GradientSet under the requested norm.
inline GradientSet loss_gradients(const NetParams& params,
                                  const std::vector<LossBuilder>& builders, NormParam p) {
  LossEval ev = eval_losses(params, builders);
  return GradientSet(std::move(ev.grads), p);
}

}  // namespace chebdir

#endif  // CHEBDIR_AUTODIFF_HPP_
