#ifndef CHEBDIR_TRAINER_HPP_
#define CHEBDIR_TRAINER_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chebdir/autodiff.hpp"
#include "chebdir/baselines.hpp"
#include "chebdir/chebyshev.hpp"
#include "chebdir/common.hpp"
#include "chebdir/oracle.hpp"
#include "chebdir/pinn.hpp"

#ifndef CHEBDIR_GIT_REV
#define CHEBDIR_GIT_REV "unknown"
#endif

namespace chebdir {

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"ours",  "mgda",        "config", "imtlg",
                                                 "gapo",  "dcgd_center", "adam"};
  return names;
}

// Flat key = value configuration; unknown keys are hard errors so sweep
// scripts fail loudly on typos.
struct TrainConfig {
  std::string problem;
  std::string method = "ours";
  double p = 2.0;
  double lr = 3e-4;
  int steps = 10000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double epsilon = 1e-6;  // stationarity threshold
  int nr = 1024;
  int nb = 256;
  int ni = 256;
  std::uint64_t seed = 0;
  std::string out = "run.csv";
  double gapo_rho = 1.0;
  int log_interval = 100;
  bool plain_sgd = false;

  void validate() const {
    if (problem.empty()) throw ConfigError("config: 'problem' is required");
    bool known = false;
    for (const auto& m : method_names()) known = known || (m == method);
    if (!known) {
      std::string list;
      for (const auto& m : method_names()) list += (list.empty() ? "" : ", ") + m;
      throw ConfigError("unknown method '" + method + "' (valid: " + list + ")");
    }
    if (!(p >= 1.0)) throw ConfigError("config: p must satisfy p >= 1");
    if (!(lr > 0.0)) throw ConfigError("config: lr must be positive");
    if (steps < 1) throw ConfigError("config: steps must be >= 1");
    if (log_interval < 1) throw ConfigError("config: log_interval must be >= 1");
    if (nr < 1 || nb < 1 || ni < 0) throw ConfigError("config: batch sizes must be positive");
  }

  static TrainConfig from_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      cfg.set(key, val, lineno);
    }
    return cfg;
  }

  static TrainConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
  }

  std::vector<std::pair<std::string, std::string>> as_kv() const {
    auto fmt = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    return {{"problem", problem},
            {"method", method},
            {"p", std::isinf(p) ? "inf" : fmt(p)},
            {"lr", fmt(lr)},
            {"steps", std::to_string(steps)},
            {"beta1", fmt(beta1)},
            {"beta2", fmt(beta2)},
            {"eps_adam", fmt(eps_adam)},
            {"epsilon", fmt(epsilon)},
            {"nr", std::to_string(nr)},
            {"nb", std::to_string(nb)},
            {"ni", std::to_string(ni)},
            {"seed", std::to_string(seed)},
            {"out", out},
            {"gapo_rho", fmt(gapo_rho)},
            {"log_interval", std::to_string(log_interval)},
            {"plain_sgd", plain_sgd ? "true" : "false"}};
  }

 private:
  void set(const std::string& key, const std::string& val, int lineno) {
    auto parse_double = [&](const std::string& s) {
      if (s == "inf" || s == "Inf" || s == "INF") {
        return std::numeric_limits<double>::infinity();
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(lineno) + ": bad number '" + s + "'");
      }
    };
    auto parse_int = [&](const std::string& s) {
      try {
        return std::stoll(s);
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(lineno) + ": bad integer '" + s + "'");
      }
    };
    auto parse_bool = [&](const std::string& s) {
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
      throw ConfigError("config line " + std::to_string(lineno) + ": bad boolean '" + s + "'");
    };
    if (key == "problem") problem = val;
    else if (key == "method") method = val;
    else if (key == "p") p = parse_double(val);
    else if (key == "lr") lr = parse_double(val);
    else if (key == "steps") steps = static_cast<int>(parse_int(val));
    else if (key == "beta1") beta1 = parse_double(val);
    else if (key == "beta2") beta2 = parse_double(val);
    else if (key == "eps_adam") eps_adam = parse_double(val);
    else if (key == "epsilon") epsilon = parse_double(val);
    else if (key == "nr") nr = static_cast<int>(parse_int(val));
    else if (key == "nb") nb = static_cast<int>(parse_int(val));
    else if (key == "ni") ni = static_cast<int>(parse_int(val));
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(val));
    else if (key == "out") out = val;
    else if (key == "gapo_rho") gapo_rho = parse_double(val);
    else if (key == "log_interval") log_interval = static_cast<int>(parse_int(val));
    else if (key == "plain_sgd") plain_sgd = parse_bool(val);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
};

struct AdamState {
  Vec m, s;
  int t = 0;

  explicit AdamState(Eigen::Index n) : m(Vec::Zero(n)), s(Vec::Zero(n)) {}
};

// Standard Adam recurrences with bias correction, driven by the selected
// direction rather than the raw gradient.
inline void adam_step(AdamState& state, Vec& theta, const Vec& d, double lr, double beta1,
                      double beta2, double eps_adam) {
  if (theta.size() != d.size() || theta.size() != state.m.size()) {
    throw DimensionMismatch("adam_step: shape mismatch");
  }
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * d;
  state.s = beta2 * state.s + (1.0 - beta2) * d.cwiseProduct(d);
  const double mc = 1.0 - std::pow(beta1, state.t);
  const double sc = 1.0 - std::pow(beta2, state.t);
  theta -= lr * (state.m / mc).cwiseQuotient(((state.s / sc).cwiseSqrt().array() + eps_adam).matrix());
}

struct TrainRecord {
  int step = 0;
  std::vector<double> losses;
  double r_star = std::numeric_limits<double>::quiet_NaN();
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();
  bool terminated = false;
  double elapsed_s = 0.0;
};

struct TrainResult {
  std::vector<TrainRecord> records;
  Vec theta;
  int loss_count = 0;
  bool terminated = false;
  bool nan_abort = false;
  int steps_run = 0;
  double final_metric = std::numeric_limits<double>::quiet_NaN();
};

// What the loop needs from a problem: per-step loss values and per-loss
// gradients at theta, plus an optional evaluation metric.
class MultiLossProblem {
 public:
  virtual ~MultiLossProblem() = default;
  virtual int loss_count() const = 0;
  virtual Vec initial_params(std::uint64_t seed) const = 0;
  virtual void eval(const Vec& theta, std::uint64_t seed, int step,
                    std::vector<double>& losses, std::vector<Vec>& grads) = 0;
  virtual double metric(const Vec& /*theta*/) { return std::numeric_limits<double>::quiet_NaN(); }
};

class PinnTrainProblem final : public MultiLossProblem {
 public:
  PinnTrainProblem(PinnProblem problem, NetSpec spec)
      : problem_(std::move(problem)),
        spec_(spec),
        params_(spec_, Vec::Zero(spec_.param_count())) {
    grid_ = eval_grid(problem_);
    ref_ = exact_on(problem_, grid_);
  }

  const PinnProblem& problem() const { return problem_; }
  const NetSpec& spec() const { return spec_; }

  int loss_count() const override { return problem_.m; }
  Vec initial_params(std::uint64_t seed) const override {
    return init_xavier(spec_, seed).theta();
  }
  void eval(const Vec& theta, std::uint64_t seed, int step, std::vector<double>& losses,
            std::vector<Vec>& grads) override {
    params_.set_theta(theta);
    const SampleBatch batch = sample(problem_, seed, step);
    const LossEval ev = eval_losses(params_, chebdir::losses(problem_, batch), tapes_);
    losses = ev.values;
    grads = ev.grads;
  }
  double metric(const Vec& theta) override {
    params_.set_theta(theta);
    metric_tape_.rebind(params_);
    const int u = forward_value(metric_tape_, grid_);
    return relative_l2(metric_tape_.value(u).row(0).transpose(), ref_);
  }

 private:
  PinnProblem problem_;
  NetSpec spec_;
  NetParams params_;
  std::vector<Tape> tapes_;
  Tape metric_tape_{params_};
  Mat grid_;
  Vec ref_;
};

// Deterministic synthetic multi-loss problem for the convergence checks.
class QuadraticTrainProblem final : public MultiLossProblem {
 public:
  explicit QuadraticTrainProblem(QuadraticEnsemble ens, Vec theta0)
      : ens_(std::move(ens)), theta0_(std::move(theta0)) {}

  const QuadraticEnsemble& ensemble() const { return ens_; }

  int loss_count() const override { return ens_.count(); }
  Vec initial_params(std::uint64_t) const override { return theta0_; }
  void eval(const Vec& theta, std::uint64_t, int, std::vector<double>& losses,
            std::vector<Vec>& grads) override {
    losses.clear();
    grads.clear();
    for (const auto& l : ens_.losses) {
      losses.push_back(l.value(theta));
      grads.push_back(l.grad(theta));
    }
  }

 private:
  QuadraticEnsemble ens_;
  Vec theta0_;
};

namespace trainer_detail {

inline bool finite_all(const std::vector<double>& losses, const std::vector<Vec>& grads) {
  for (double v : losses) {
    if (!std::isfinite(v)) return false;
  }
  for (const auto& g : grads) {
    if (!g.allFinite()) return false;
  }
  return true;
}

struct StepDirection {
  Vec d;
  double r_star = std::numeric_limits<double>::quiet_NaN();
  bool terminated = false;
};

inline StepDirection select_direction(const std::string& method, const std::vector<Vec>& grads,
                                      const TrainConfig& cfg) {
  StepDirection out;
  if (method == "adam") {
    out.d = Vec::Zero(grads[0].size());
    for (const auto& g : grads) out.d += g;
    return out;
  }
  if (method == "ours") {
    GradientSet gs(grads, NormParam::of(cfg.p));
    DirectionOptions opt;
    opt.eps = cfg.epsilon;
    // Training-scale budget: a 1e-8 duality gap is far below update noise,
    // and staying >= 1e-8 skips the extended-precision refinement pass.
    opt.fw_max_iter = 200;
    opt.fw_tol = 1e-8;
    const DirectionResult dir = compute_direction(gs, opt);
    out.r_star = dir.r_star;
    if (dir.terminated) {
      out.terminated = true;
      return out;
    }
    out.d = *dir.d;
    return out;
  }
  GradientSet gs(grads, NormParam::l2());
  if (method == "mgda") {
    const BaselineResult r = mgda(gs, 200, 1e-12);
    if (r.v.norm() <= cfg.epsilon) {
      out.terminated = true;
      return out;
    }
    out.d = r.v;
    return out;
  }
  if (method == "gapo") {
    const BaselineResult r = gapo(gs, cfg.gapo_rho, 200, 1e-12);
    if (r.v.norm() <= cfg.epsilon) {
      out.terminated = true;
      return out;
    }
    out.d = r.v;
    return out;
  }
  if (method == "config") {
    const BaselineResult r = config_dir(gs);
    out.d = gs.sum_raw_inner(r.v) * r.v;  // leveled with the adaptive scalar
    return out;
  }
  if (method == "imtlg") {
    const BaselineResult r = imtl_g(gs);
    out.d = r.v;
    return out;
  }
  if (method == "dcgd_center") {
    const BaselineResult r = dcgd_center(gs);
    out.d = gs.sum_raw_inner(r.v) * r.v;
    return out;
  }
  throw ConfigError("unknown method '" + method + "'");
}

}  // namespace trainer_detail

// The optimization loop: resample, group gradients, select the direction,
// test the stopping rule, update (Adam by default, plain steps on request),
// and log at the configured cadence.
inline TrainResult train(MultiLossProblem& problem, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result;
  result.loss_count = problem.loss_count();
  Vec theta = problem.initial_params(cfg.seed);
  AdamState adam(theta.size());
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::vector<double> losses;
  std::vector<Vec> grads;
  for (int step = 0; step < cfg.steps; ++step) {
    problem.eval(theta, cfg.seed, step, losses, grads);
    result.steps_run = step + 1;

    TrainRecord rec;
    rec.step = step;
    rec.losses = losses;

    if (!trainer_detail::finite_all(losses, grads)) {
      // Non-finite loss or gradient: stop and leave a diagnostic row.
      result.nan_abort = true;
      rec.elapsed_s = elapsed();
      result.records.push_back(std::move(rec));
      break;
    }

    trainer_detail::StepDirection dir;
    try {
      dir = trainer_detail::select_direction(cfg.method, grads, cfg);
    } catch (const ZeroGradient&) {
      // A numerically flat loss is Pareto-stationary outright (alpha = e_i).
      dir.terminated = true;
    }
    rec.r_star = dir.r_star;
    if (dir.terminated) {
      result.terminated = true;
      rec.terminated = true;
      rec.rel_l2 = problem.metric(theta);
      rec.elapsed_s = elapsed();
      result.records.push_back(std::move(rec));
      break;
    }

    const bool last = (step == cfg.steps - 1);
    if (step % cfg.log_interval == 0 || last) {
      rec.rel_l2 = problem.metric(theta);
      rec.elapsed_s = elapsed();
      result.records.push_back(rec);
    }

    if (cfg.plain_sgd) {
      theta -= cfg.lr * dir.d;
    } else {
      adam_step(adam, theta, dir.d, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam);
    }
  }
  result.theta = theta;
  if (!result.records.empty()) result.final_metric = result.records.back().rel_l2;
  return result;
}

// ---------------------------------------------------------------------------
// CSV + metadata output
// ---------------------------------------------------------------------------

namespace trainer_detail {

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace trainer_detail

inline std::string csv_header(int loss_count) {
  std::string h = "step";
  for (int i = 1; i <= loss_count; ++i) h += ",loss_" + std::to_string(i);
  h += ",r_star,rel_l2,terminated,elapsed_s";
  return h;
}

inline std::string csv_row(const TrainRecord& rec) {
  std::string row = std::to_string(rec.step);
  for (double v : rec.losses) row += "," + trainer_detail::fmt_num(v);
  row += "," + trainer_detail::fmt_num(rec.r_star);
  row += "," + trainer_detail::fmt_num(rec.rel_l2);
  row += rec.terminated ? ",1" : ",0";
  row += "," + trainer_detail::fmt_num(rec.elapsed_s);
  return row;
}

inline void write_csv(const TrainResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write CSV file '" + path + "'");
  out << csv_header(result.loss_count) << "\n";
  for (const auto& rec : result.records) out << csv_row(rec) << "\n";
}

inline void write_metadata(const TrainConfig& cfg, const TrainResult& result,
                           const std::string& path) {
  nlohmann::json meta;
  for (const auto& [k, v] : cfg.as_kv()) meta["config"][k] = v;
  meta["git_revision"] = CHEBDIR_GIT_REV;
  meta["eval_grid"] = "101x101";
  meta["loss_count"] = result.loss_count;
  meta["steps_run"] = result.steps_run;
  meta["terminated"] = result.terminated;
  meta["nan_abort"] = result.nan_abort;
  std::ofstream out(path);
  if (!out) throw Error("cannot write metadata file '" + path + "'");
  out << meta.dump(2) << "\n";
}

// Registry dispatch: builds the problem named in the config.
inline std::unique_ptr<MultiLossProblem> make_train_problem(const TrainConfig& cfg) {
  PinnProblem p = make_problem(cfg.problem);
  p.nr = cfg.nr;
  p.nb = cfg.nb;
  p.ni = cfg.ni;
  return std::make_unique<PinnTrainProblem>(std::move(p), NetSpec{});
}

// Full `train` entry point: run, write CSV and the metadata sidecar.
inline TrainResult run_training(const TrainConfig& cfg) {
  cfg.validate();
  auto problem = make_train_problem(cfg);
  TrainResult result = train(*problem, cfg);
  write_csv(result, cfg.out);
  write_metadata(cfg, result, cfg.out + ".meta.json");
  return result;
}

// Norm-parameter sweep on one config; one summary row per p.
struct AblateRow {
  double p;
  std::vector<double> final_losses;
  double r_star;
  double rel_l2;
  int steps_run;
  bool terminated;
};

inline std::vector<AblateRow> ablate_p(const TrainConfig& base,
                                       const std::vector<double>& p_values) {
  std::vector<AblateRow> rows;
  for (double pv : p_values) {
    TrainConfig cfg = base;
    cfg.p = pv;
    auto problem = make_train_problem(cfg);
    const TrainResult result = train(*problem, cfg);
    AblateRow row;
    row.p = pv;
    row.final_losses = result.records.empty() ? std::vector<double>() : result.records.back().losses;
    row.r_star = result.records.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : result.records.back().r_star;
    row.rel_l2 = result.final_metric;
    row.steps_run = result.steps_run;
    row.terminated = result.terminated;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_ablate_csv(const std::vector<AblateRow>& rows, int loss_count,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write CSV file '" + path + "'");
  out << "p";
  for (int i = 1; i <= loss_count; ++i) out << ",loss_" << i;
  out << ",r_star,rel_l2,steps_run,terminated\n";
  for (const auto& r : rows) {
    out << trainer_detail::fmt_num(r.p);
    for (double v : r.final_losses) out << "," << trainer_detail::fmt_num(v);
    out << "," << trainer_detail::fmt_num(r.r_star) << "," << trainer_detail::fmt_num(r.rel_l2)
        << "," << r.steps_run << "," << (r.terminated ? 1 : 0) << "\n";
  }
}

}  // namespace chebdir

#endif  // CHEBDIR_TRAINER_HPP_
