// minehaul: map generation, data collection, filtering, training, closed-loop
// evaluation, benchmarks and gradient checks driven by one config file.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "minehaul/cli/pipeline.hpp"
#include "minehaul/errors.hpp"
#include "minehaul/objectives/gradcheck_suite.hpp"

using namespace minehaul;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kInput = 3, kNumeric = 4, kThreshold = 5 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::string out = "out";
  std::optional<int> jobs;
  std::optional<int> epochs;
  std::optional<int> seeds;
  std::optional<std::string> task;
  std::string input;
  std::string checkpoint;
  bool force = false;
  bool expert = false;
  std::vector<std::string> sets;
};

cli::RunConfig effective(const Options& o) {
  cli::RunConfig cfg = o.config.empty() ? cli::RunConfig{} : cli::load_config(o.config);
  cli::apply_env(cfg, cli::minehaul_environment());
  for (const std::string& kv : o.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    cli::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.mode) cli::set_value(cfg, "deploy.mode", *o.mode);
  if (o.jobs) cli::set_value(cfg, "bench.jobs", std::to_string(*o.jobs));
  if (o.epochs) cli::set_value(cfg, "train.epochs", std::to_string(*o.epochs));
  if (o.seeds) cli::set_value(cfg, "bench.seeds", std::to_string(*o.seeds));
  if (o.task) cli::set_value(cfg, "bench.task", *o.task);
  return cfg;
}

std::optional<std::filesystem::path> input_of(const Options& o) {
  if (o.input.empty()) return std::nullopt;
  return std::filesystem::path(o.input);
}

int run(const std::string& cmd, const Options& o) {
  cli::RunConfig cfg = effective(o);
  cli::Layout out{o.out};

  if (cmd == "config") {
    std::cout << "# config_hash " << cli::config_hash(cfg) << "\n" << cli::to_ini(cfg);
    return kOk;
  }
  if (cmd == "gradcheck") {
    bool ok = true;
    for (const auto& c : objectives::run_gradcheck_suite(cfg.seed)) {
      std::printf("%-24s probes %4zu  max rel err %.3e  %s\n", c.name.c_str(), c.probes, c.max_rel_error,
                  c.passed ? "ok" : "FAIL");
      ok &= c.passed;
    }
    return ok ? kOk : kNumeric;
  }

  cli::write_config(cfg, out);
  if (cmd == "map-gen") {
    cli::map_gen(cfg, out);
    std::cout << "maps written to " << out.dir << "\n";
  } else if (cmd == "collect") {
    auto s = cli::collect(cfg, out);
    std::cout << "collected " << s.frames << " frames in " << s.episodes << " episodes -> " << out.demos() << "\n";
  } else if (cmd == "filter") {
    auto s = cli::filter(cfg, out, input_of(o));
    std::printf("steering in (%.6f, %.6f), throttle < %.6f\nremoved %zu of %zu frames (%.3f%%)\n",
                s.thresholds.steer_low, s.thresholds.steer_up, s.thresholds.throttle_up, s.report.removed,
                s.report.total, 100.0 * s.report.removed_fraction());
  } else if (cmd == "train") {
    auto s = cli::train(cfg, out, input_of(o), [](const objectives::TraceRow& r) {
      std::printf("epoch %3d  loss %.4f  mae %.4f  nll %.4f  lr %.3e\n", r.epoch, r.total, r.mae, r.nll, r.lr);
      std::fflush(stdout);
    });
    std::cout << "trained on " << s.samples << " samples -> " << out.checkpoint() << "\n";
  } else if (cmd == "eval") {
    std::string ckpt = o.checkpoint.empty() ? out.checkpoint().string() : o.checkpoint;
    model::FusionPlanner planner = cli::load_planner(cfg, ckpt, o.force);
    auto s = cli::eval(cfg, out, planner);
    std::printf("%s: progress %.1f m, %d interventions, %d collisions, %d GNSS losses\n",
                deploy::to_string(cfg.mode), s.result.progress, s.result.interventions, s.result.collisions,
                s.result.gnss_losses);
  } else if (cmd == "bench") {
    std::optional<model::FusionPlanner> planner;
    bench::PolicyFactory policy;
    std::string ckpt;
    if (o.expert) {
      policy = bench::expert_factory(cfg.K);
      ckpt = "expert";
    } else {
      ckpt = o.checkpoint.empty() ? out.checkpoint().string() : o.checkpoint;
      planner.emplace(cli::load_planner(cfg, ckpt, o.force));
      policy = bench::planner_factory(*planner);
    }
    bench::BenchmarkReport rep = cli::run_bench(cfg, out, policy, ckpt);
    for (const auto& [k, v] : rep.aggregates) std::printf("%-40s %.6f\n", k.c_str(), v);
    for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
    double success = rep.aggregates.at("success_rate");
    if (success < cfg.bench_min_success) {
      std::fprintf(stderr, "success rate %.4f below threshold %.4f\n", success, cfg.bench_min_success);
      return kThreshold;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minehaul: evidential end-to-end planner for mining haul trucks"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "INI config file");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--mode", o.mode, "fusion mode")->check(CLI::IsMember({"instantaneous", "uniform", "evidential"}));
  app.add_option("--out", o.out, "output directory");
  app.add_option("--jobs", o.jobs, "parallel benchmark episodes");
  app.add_option("--epochs", o.epochs, "training epochs");
  app.add_option("--set", o.sets, "override section.key=value");

  const char* subs[][2] = {{"config", "print the effective config"},
                           {"map-gen", "write the test maps"},
                           {"collect", "roll out the expert and record demonstrations"},
                           {"filter", "fit bias thresholds and filter demonstrations"},
                           {"train", "train the planner"},
                           {"eval", "one closed-loop episode with the trained planner"},
                           {"bench", "run a benchmark task"},
                           {"gradcheck", "finite-difference gradient suite"}};
  for (auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s[0], s[1]);
    if (std::string(s[0]) == "filter" || std::string(s[0]) == "train") sub->add_option("--input", o.input, "input JSONL");
    if (std::string(s[0]) == "eval" || std::string(s[0]) == "bench") {
      sub->add_option("--checkpoint", o.checkpoint, "model checkpoint (default <out>/model.ckpt)");
      sub->add_flag("--force", o.force, "accept a checkpoint trained under a different config");
    }
    if (std::string(s[0]) == "bench") {
      sub->add_option("--seeds", o.seeds, "number of seeds");
      sub->add_option("--task", o.task, "lane-stable, disturbance or navigation");
      sub->add_flag("--expert", o.expert, "benchmark the scripted expert instead of a checkpoint");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }
  std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
