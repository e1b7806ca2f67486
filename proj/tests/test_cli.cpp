#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "minehaul/cli/config.hpp"
#include "minehaul/errors.hpp"

using namespace minehaul;
using namespace minehaul::cli;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("minehaul_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& capture = {}) {
  std::string cmd = std::string(MINEHAUL_CLI_PATH) + " " + args;
  cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + capture.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("every key has a default and a description") {
  auto keys = config_keys();
  CHECK(keys.size() > 60);
  for (const auto& k : keys) {
    INFO(k.name);
    CHECK(!k.doc.empty());
    CHECK(!k.default_value.empty());
    CHECK(k.name.find('.') != std::string::npos);
  }
  RunConfig d;
  CHECK(get_value(d, "train.alpha_scale") == "1500");
  CHECK(std::stod(get_value(d, "train.boost_sigma")) == doctest::Approx(1.0 / 15.0).epsilon(1e-15));
  CHECK(get_value(d, "train.lr0") == "0.00020000000000000001");
  CHECK(get_value(d, "train.batch") == "32");
  CHECK(get_value(d, "train.beta1") == "0.90000000000000002");
  CHECK(get_value(d, "train.beta2") == "0.999");
  CHECK(get_value(d, "train.lambda_speed") == "0.10000000000000001");
}

TEST_CASE("canonical text round-trips exactly") {
  RunConfig c;
  set_value(c, "sim.fov_deg", "250");
  set_value(c, "expert.cruise_speed_kmh", "18.5");
  set_value(c, "truck.max_steering_deg", "33");
  set_value(c, "model.scan_hidden", "64, 32");
  set_value(c, "deploy.mode", "uniform");
  set_value(c, "train.regularizer", "standard");
  std::string text = to_ini(c);
  RunConfig back;
  apply_ini(back, text);
  CHECK(to_ini(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  RunConfig d;
  RunConfig d2;
  apply_ini(d2, to_ini(d));
  CHECK(to_ini(d2) == to_ini(d));
}

TEST_CASE("parsing rejects unknown keys and malformed lines") {
  RunConfig c;
  CHECK_THROWS_AS(apply_ini(c, "[train]\nepochz = 3\n"), ConfigError);
  try {
    apply_ini(c, "# comment\n[train]\nepochs = 3\nbogus = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK(c.train.epochs == 3);
  CHECK_THROWS_AS(apply_ini(c, "epochs = 3\n"), ConfigError);
  CHECK_THROWS_AS(apply_ini(c, "[train]\nepochs = three\n"), ConfigError);
  CHECK_THROWS_AS(apply_ini(c, "[train]\nepochs 3\n"), ConfigError);
  CHECK_THROWS_AS(apply_ini(c, "[deploy]\nmode = median\n"), ConfigError);
  CHECK_THROWS_AS(set_value(c, "model.scan_hidden", "64,0"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/minehaul.ini"), IoError);
}

TEST_CASE("environment overrides") {
  RunConfig c;
  apply_env(c, {{"MINEHAUL_TRAIN_EPOCHS", "7"}, {"MINEHAUL_DEPLOY_MODE", "instantaneous"}, {"PATH", "/bin"}});
  CHECK(c.train.epochs == 7);
  CHECK(c.mode == deploy::FusionMode::Instantaneous);
  CHECK_THROWS_AS(apply_env(c, {{"MINEHAUL_TRAIN_EPOCHZ", "7"}}), ConfigError);
}

TEST_CASE("hashes") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
  RunConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  set_value(b, "bench.trials", "31");
  set_value(b, "deploy.mode", "uniform");
  CHECK(config_hash(a) != config_hash(b));
  CHECK(training_hash(a) == training_hash(b));
  set_value(b, "data.K", "4");
  CHECK(training_hash(a) != training_hash(b));
}

TEST_CASE("resolved config shares beams, K and seeds") {
  RunConfig c;
  set_value(c, "sim.beams", "64");
  set_value(c, "data.K", "3");
  set_value(c, "run.seed", "100");
  set_value(c, "bench.seeds", "3");
  RunConfig r = c.resolved();
  CHECK(r.model.beams == 64);
  CHECK(r.model.K == 3);
  CHECK(r.collect.sim.beams == 64);
  CHECK(r.bench.seeds == std::vector<std::uint64_t>{100, 101, 102});
  CHECK(r.train.seed == 100);
}

TEST_CASE("command line: exit codes and config piping") {
  auto dir = scratch("exit");
  CHECK(run_cli("gradcheck") == 0);

  std::ofstream(dir / "bad.ini") << "[train]\nepochz = 1\n";
  CHECK(run_cli("--config " + (dir / "bad.ini").string() + " config") == 2);
  CHECK(run_cli("config --mode median") == 2);
  CHECK(run_cli("filter --out " + (dir / "empty").string()) == 3);
  CHECK(run_cli("eval --out " + (dir / "empty").string()) == 3);

  // emitted config piped back in reproduces itself
  CHECK(run_cli("config --seed 9 --epochs 3 --set model.activation=tanh", dir / "a.ini") == 0);
  CHECK(run_cli("--config " + (dir / "a.ini").string() + " config", dir / "b.ini") == 0);
  CHECK(slurp(dir / "a.ini") == slurp(dir / "b.ini"));
  CHECK(slurp(dir / "a.ini").find("epochs = 3") != std::string::npos);

  // scripted expert benchmark: happy path, then a success threshold it cannot meet
  std::string bench = "bench --expert --seeds 1 --task disturbance --set bench.trials=30 --out " + (dir / "b").string();
  CHECK(run_cli(bench) == 0);
  CHECK(fs::exists(dir / "b" / "bench" / "report.json"));
  CHECK(fs::exists(dir / "b" / "config.ini"));
  CHECK(run_cli(bench + " --set bench.min_success=1.01") == 5);
}
