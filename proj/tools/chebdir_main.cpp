// Command-line front end: training runs, the closed-form comparison table,
// verification suites, run aggregation, and the norm-parameter sweep.

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "chebdir/oracle.hpp"
#include "chebdir/toy.hpp"
#include "chebdir/trainer.hpp"

using namespace chebdir;

namespace {

int cmd_train(const std::string& config_path, bool plain_sgd_flag,
              const std::string& out_override) {
  TrainConfig cfg = TrainConfig::from_file(config_path);
  if (plain_sgd_flag) cfg.plain_sgd = true;
  if (!out_override.empty()) cfg.out = out_override;
  cfg.validate();
  const TrainResult res = run_training(cfg);
  std::printf("%s %s: %d steps, final rel_l2 = %g, terminated = %d -> %s\n",
              cfg.problem.c_str(), cfg.method.c_str(), res.steps_run, res.final_metric,
              res.terminated ? 1 : 0, cfg.out.c_str());
  if (res.nan_abort) {
    std::fprintf(stderr, "run aborted: non-finite loss or gradient at step %d\n",
                 res.steps_run - 1);
    return 1;
  }
  return 0;
}

int cmd_toy() {
  const ToyReport rep = toy_report(1e-9);
  std::fputs(rep.table.c_str(), stdout);
  if (!rep.all_ok) {
    for (const auto& c : rep.checks) {
      if (!c.ok) {
        std::fprintf(stderr, "mismatch %s: got %.17g want %.17g\n", c.name.c_str(), c.got,
                     c.want);
      }
    }
    return 1;
  }
  return 0;
}

int cmd_verify(int duality_count, int descent_count) {
  int total = 0, failed = 0;
  auto report_suite = [&](const char* name, const std::vector<OracleReport>& reports) {
    int suite_failed = 0;
    for (const auto& r : reports) {
      if (!r.pass) {
        ++suite_failed;
        std::printf("  [FAIL] %s\n", r.instance.c_str());
        for (const auto& c : r.checks) {
          if (!c.pass) {
            std::printf("         %s: value %.3e vs threshold %.3e\n", c.name.c_str(), c.value,
                        c.threshold);
          }
        }
      }
    }
    std::printf("[%s] %-28s %3zu checks, %d failed\n", suite_failed == 0 ? "PASS" : "FAIL",
                name, reports.size(), suite_failed);
    total += static_cast<int>(reports.size());
    failed += suite_failed;
  };

  report_suite("duality gap", duality_suite(20260801, duality_count));
  report_suite("descent inequality", descent_suite(20260802, descent_count));

  // derivative cross-check on a small tanh network
  {
    NetSpec spec;
    spec.hidden = {8, 8};
    const NetParams params = init_xavier(spec, 13);
    Rng rng(14);
    Mat pts(2, 12);
    for (int j = 0; j < 12; ++j) {
      pts(0, j) = rng.uniform(-1.0, 1.0);
      pts(1, j) = rng.uniform(-1.0, 1.0);
    }
    auto build = [&pts](Tape& t) {
      const auto [jx, jy] = forward_jet_pair(t, pts, 0, 1);
      return t.mean_sq(t.add(t.add(jx.uss, jy.uss), jx.u));
    };
    Tape tape(params);
    const Vec g_ad = tape.backward(build(tape));
    const Vec g_fd = fd_gradient(
        [&](const Vec& th) {
          NetParams p2(spec, th);
          Tape t2(p2);
          return t2.scalar_value(build(t2));
        },
        params.theta());
    const double rel = (g_ad - g_fd).norm() / g_fd.norm();
    const bool ok = rel <= 1e-5;
    std::printf("[%s] %-28s reverse-mode vs FD rel err %.2e\n", ok ? "PASS" : "FAIL",
                "derivative cross-check", rel);
    ++total;
    if (!ok) ++failed;
  }

  std::printf("verify: %d checks, %d failed\n", total, failed);
  return failed == 0 ? 0 : 1;
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<std::string> paths;
  for (const auto& pattern : patterns) {
    glob_t g{};
    if (glob(pattern.c_str(), GLOB_TILDE, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  return paths;
}

int cmd_compare(const std::vector<std::string>& patterns, const std::string& out_path,
                int jobs) {
  const std::vector<std::string> paths = expand_globs(patterns);
  if (paths.empty()) {
    std::fprintf(stderr, "compare: no config files match\n");
    return 2;
  }
  struct RunOutcome {
    std::string method;
    double rel_l2;
    bool ok;
  };
  std::vector<RunOutcome> outcomes(paths.size());

  // Independent runs; worker threads share nothing but the work queue.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < paths.size(); i = next.fetch_add(1)) {
      try {
        TrainConfig cfg = TrainConfig::from_file(paths[i]);
        cfg.validate();
        const TrainResult res = run_training(cfg);
        outcomes[i] = {cfg.method, res.final_metric, !res.nan_abort};
      } catch (const std::exception& e) {
        std::fprintf(stderr, "compare: %s failed: %s\n", paths[i].c_str(), e.what());
        outcomes[i] = {"", 0.0, false};
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::max(1, jobs);
  for (int t = 0; t < nthreads - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::map<std::string, std::vector<double>> by_method;
  bool any_failed = false;
  for (const auto& o : outcomes) {
    if (o.ok) by_method[o.method].push_back(o.rel_l2);
    else any_failed = true;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::fprintf(stderr, "compare: cannot write %s\n", out_path.c_str());
    return 1;
  }
  out << "method,n_runs,mean_rel_l2,std_rel_l2\n";
  for (const auto& [method, vals] : by_method) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double stddev = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1.0)) : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g\n", method.c_str(), vals.size(), mean,
                  stddev);
    out << buf;
    std::printf("%-12s n=%zu mean=%.5g std=%.5g\n", method.c_str(), vals.size(), mean, stddev);
  }
  std::printf("aggregate written to %s\n", out_path.c_str());
  return any_failed ? 1 : 0;
}

int cmd_ablate(const std::string& config_path, const std::string& p_list,
               const std::string& out_path) {
  TrainConfig base = TrainConfig::from_file(config_path);
  base.validate();
  std::vector<double> ps;
  std::string token;
  std::istringstream in(p_list);
  while (std::getline(in, token, ',')) {
    if (token == "inf") ps.push_back(std::numeric_limits<double>::infinity());
    else ps.push_back(std::stod(token));
  }
  if (ps.empty()) {
    std::fprintf(stderr, "ablate-p: empty p list\n");
    return 2;
  }
  const auto rows = ablate_p(base, ps);
  const PinnProblem prob = make_problem(base.problem);
  const std::string out = out_path.empty() ? base.out : out_path;
  write_ablate_csv(rows, prob.m, out);
  for (const auto& r : rows) {
    std::printf("p=%-4g final rel_l2=%.5g steps=%d terminated=%d\n", r.p, r.rel_l2, r.steps_run,
                r.terminated ? 1 : 0);
  }
  std::printf("sweep written to %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chebyshev-center update-direction selection for multi-loss training"};
  app.require_subcommand(1);

  std::string train_config, train_out;
  bool plain_sgd = false;
  auto* train = app.add_subcommand("train", "run one training configuration");
  train->add_option("config", train_config, "key = value configuration file")->required();
  train->add_flag("--plain-sgd", plain_sgd, "plain steps instead of the Adam update");
  train->add_option("--out", train_out, "override the output CSV path");

  auto* toy = app.add_subcommand("toy", "print the closed-form comparison tables");

  int duality_count = 200, descent_count = 50;
  auto* verify = app.add_subcommand("verify", "run the verification suites");
  verify->add_option("--duality", duality_count, "number of duality instances");
  verify->add_option("--descent", descent_count, "number of quadratic ensembles");

  std::vector<std::string> compare_patterns;
  std::string compare_out = "compare.csv";
  int jobs = 1;
  auto* compare = app.add_subcommand("compare", "aggregate final metrics across runs");
  compare->add_option("configs", compare_patterns, "config files or globs")->required();
  compare->add_option("--out", compare_out, "aggregate CSV path");
  compare->add_option("--jobs", jobs, "parallel worker count");

  std::string ablate_config, ablate_plist = "1.5,2,3", ablate_out;
  auto* ablate = app.add_subcommand("ablate-p", "sweep the norm parameter");
  ablate->add_option("config", ablate_config, "base configuration file")->required();
  ablate->add_option("--p-list", ablate_plist, "comma-separated p values");
  ablate->add_option("--out", ablate_out, "sweep CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors
  }

  try {
    if (train->parsed()) return cmd_train(train_config, plain_sgd, train_out);
    if (toy->parsed()) return cmd_toy();
    if (verify->parsed()) return cmd_verify(duality_count, descent_count);
    if (compare->parsed()) return cmd_compare(compare_patterns, compare_out, jobs);
    if (ablate->parsed()) return cmd_ablate(ablate_config, ablate_plist, ablate_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
