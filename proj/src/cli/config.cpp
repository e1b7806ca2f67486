#include "minehaul/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "minehaul/errors.hpp"

extern char** environ;

namespace minehaul::cli {

namespace {

constexpr double kDeg = world::kPi / 180.0;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

long long to_int(const std::string& v) {
  std::size_t used = 0;
  long long i = std::stoll(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return i;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false");
}

std::string list_str(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<std::size_t> to_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long n = to_int(trim(item));
    if (n <= 0) throw std::invalid_argument("widths must be positive");
    out.push_back(static_cast<std::size_t>(n));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

struct Field {
  const char* name;
  const char* doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define F_DOUBLE(key, doc, expr)                                                            \
  Field {                                                                                   \
    key, doc, [](const RunConfig& c) { return fmt(c.expr); },                               \
        [](RunConfig& c, const std::string& v) { c.expr = to_double(v); }                   \
  }
#define F_SCALED(key, doc, expr, scale)                                                     \
  Field {                                                                                   \
    key, doc, [](const RunConfig& c) { return fmt(c.expr / (scale)); },                     \
        [](RunConfig& c, const std::string& v) { c.expr = to_double(v) * (scale); }         \
  }
#define F_INT(key, doc, expr, type)                                                         \
  Field {                                                                                   \
    key, doc, [](const RunConfig& c) { return std::to_string(c.expr); },                    \
        [](RunConfig& c, const std::string& v) { c.expr = static_cast<type>(to_int(v)); }   \
  }
#define F_BOOL(key, doc, expr)                                                              \
  Field {                                                                                   \
    key, doc, [](const RunConfig& c) { return std::string(c.expr ? "true" : "false"); },    \
        [](RunConfig& c, const std::string& v) { c.expr = to_bool(v); }                     \
  }
#define F_LIST(key, doc, expr)                                                              \
  Field {                                                                                   \
    key, doc, [](const RunConfig& c) { return list_str(c.expr); },                          \
        [](RunConfig& c, const std::string& v) { c.expr = to_list(v); }                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      F_INT("run.seed", "master seed", seed, std::uint64_t),
      Field{"run.maps", "maps for map-gen: loop, network or both", [](const RunConfig& c) { return c.maps; },
            [](RunConfig& c, const std::string& v) {
              if (v != "loop" && v != "network" && v != "both") throw std::invalid_argument("loop, network or both");
              c.maps = v;
            }},

      F_DOUBLE("truck.wheelbase", "m", truck.wheelbase),
      F_DOUBLE("truck.length", "m", truck.length),
      F_DOUBLE("truck.width", "m", truck.width),
      F_SCALED("truck.max_steering_deg", "road-wheel angle at full command", truck.max_steering, kDeg),
      F_DOUBLE("truck.max_traction_accel", "m/s^2 at full throttle", truck.max_traction_accel),
      F_DOUBLE("truck.electric_brake_gain", "retarder m/s^2 at full command", truck.electric_brake_gain),
      F_DOUBLE("truck.mechanical_brake_gain", "friction brake m/s^2 at full command", truck.mechanical_brake_gain),
      F_DOUBLE("truck.electric_brake_fade_speed", "m/s below which the retarder fades", truck.electric_brake_fade_speed),
      F_DOUBLE("truck.drag", "1/s", truck.drag),

      F_DOUBLE("sim.physics_dt", "s", sim.physics_dt),
      F_INT("sim.substeps", "physics steps per sensor frame", sim.substeps, int),
      F_INT("sim.beams", "range-scan beams (also the model input)", sim.beams, int),
      F_SCALED("sim.fov_deg", "scan field of view", sim.fov, kDeg),
      F_DOUBLE("sim.gnss_failure", "per-frame GNSS dropout probability", sim.gnss_failure),

      F_SCALED("expert.cruise_speed_kmh", "speed limit", expert.cruise_speed, 1.0 / 3.6),
      F_DOUBLE("expert.k_pp", "s, pure pursuit lookahead gain", expert.k_pp),
      F_DOUBLE("expert.min_lookahead", "m", expert.min_lookahead),
      F_DOUBLE("expert.max_lookahead", "m", expert.max_lookahead),
      F_DOUBLE("expert.max_lateral_accel", "m/s^2 curvature speed cap", expert.max_lateral_accel),
      F_DOUBLE("expert.comfort_decel", "m/s^2 for the speed profile", expert.comfort_decel),
      F_DOUBLE("expert.follow_gap", "m to an obstacle ahead", expert.follow_gap),

      F_DOUBLE("collect.minutes", "expert driving to record", collect.minutes),
      F_DOUBLE("collect.episode_seconds", "s per episode", collect.episode_seconds),
      F_DOUBLE("collect.loop_share", "share of episodes on the loop map", collect.loop_share),
      F_DOUBLE("collect.turn_bias", "network episodes started before a turn", collect.turn_bias),
      F_DOUBLE("collect.noise_rate", "steering noise pulses per second", collect.noise_rate),
      F_DOUBLE("collect.noise_amplitude", "peak steering noise", collect.noise_amplitude),
      F_DOUBLE("collect.noise_duration", "s per pulse", collect.noise_duration),
      F_DOUBLE("collect.perturb_share", "episodes started off the reference line", collect.perturb_share),
      F_DOUBLE("collect.perturb_yaw_deg", "max start yaw error", collect.perturb_yaw_deg),
      F_DOUBLE("collect.perturb_lateral", "m, max start offset", collect.perturb_lateral),
      F_INT("collect.traffic", "scripted traffic participants", collect.traffic, int),

      F_INT("data.K", "lookahead predictions", K, int),
      F_DOUBLE("data.spacing", "m between lookaheads", spacing),
      F_DOUBLE("data.confidence", "bias-filter interval", confidence),
      F_BOOL("data.augment", "augment training samples", train.augment),
      F_DOUBLE("data.augment_prob", "share of drawn samples augmented", train.augment_prob),
      F_DOUBLE("data.aug_scale", "range scale c ~ U[1-x, 1+x]", train.augmentation.scale),
      F_DOUBLE("data.aug_yaw_deg", "scan yaw ~ U[-x, x]", train.augmentation.yaw_deg),
      F_DOUBLE("data.aug_gnss_drop", "GNSS drop probability", train.augmentation.gnss_drop),
      F_DOUBLE("data.k_yaw", "steering correction per radian of yaw", train.augmentation.k_yaw),

      F_LIST("model.scan_hidden", "scan encoder widths", model.scan_hidden),
      F_LIST("model.meas_hidden", "measurement encoder widths", model.meas_hidden),
      F_LIST("model.trunk_hidden", "fusion trunk widths", model.trunk_hidden),
      F_INT("model.speed_hidden", "speed head width", model.speed_hidden, std::size_t),
      F_INT("model.branch_hidden", "branch width", model.branch_hidden, std::size_t),
      Field{"model.activation", "identity, relu, tanh, sigmoid or softplus",
            [](const RunConfig& c) { return std::string(nn::to_string(c.model.activation)); },
            [](RunConfig& c, const std::string& v) { c.model.activation = nn::activation_from_string(v); }},

      F_INT("train.epochs", "desk scale; the paper trains 250", train.epochs, int),
      F_INT("train.batch", "samples per step", train.batch, std::size_t),
      F_DOUBLE("train.lr0", "initial learning rate, cosine decay to 0", train.lr0),
      F_DOUBLE("train.beta1", "ADAM", train.adam.beta1),
      F_DOUBLE("train.beta2", "ADAM", train.adam.beta2),
      F_DOUBLE("train.eps", "ADAM", train.adam.eps),
      F_DOUBLE("train.alpha_scale", "MAE scale", train.loss.mae_scale),
      F_DOUBLE("train.boost_sigma", "boost width around zero labels", train.loss.boost_sigma),
      F_BOOL("train.boost", "boost near-zero labels", train.loss.boost),
      F_BOOL("train.evidential", "NLL and regularizer terms", train.loss.evidential),
      F_DOUBLE("train.lambda_speed", "speed branch weight", train.loss.speed_weight),
      Field{"train.regularizer", "paper: |r|(2a+nu), standard: |r|(2nu+a)",
            [](const RunConfig& c) { return std::string(objectives::to_string(c.train.loss.regularizer)); },
            [](RunConfig& c, const std::string& v) { c.train.loss.regularizer = objectives::regularizer_from_string(v); }},
      F_INT("train.checkpoint_every", "epochs between checkpoints", train.checkpoint_every, int),

      Field{"deploy.mode", "instantaneous, uniform or evidential",
            [](const RunConfig& c) { return std::string(deploy::to_string(c.mode)); },
            [](RunConfig& c, const std::string& v) { c.mode = deploy::fusion_mode_from_string(v); }},
      F_DOUBLE("deploy.hlc_activation", "m before a turn zone", hlc_activation),

      Field{"bench.task", "lane-stable, disturbance or navigation",
            [](const RunConfig& c) { return std::string(bench::to_string(c.bench.kind)); },
            [](RunConfig& c, const std::string& v) { c.bench.kind = bench::task_from_string(v); }},
      Field{"bench.direction", "ccw, cw, both, or alternate (by seed)",
            [](const RunConfig& c) { return std::string(bench::to_string(c.bench.direction)); },
            [](RunConfig& c, const std::string& v) { c.bench.direction = bench::direction_from_string(v); }},
      F_INT("bench.seeds", "episodes seeds run.seed .. run.seed + n - 1", bench_seeds, int),
      F_INT("bench.trials", "disturbance trials per class and seed", bench.trials, int),
      F_DOUBLE("bench.gnss_failure", "per-frame GNSS dropout during the benchmark", bench.gnss_failure),
      F_DOUBLE("bench.distance", "m per lane-stable episode", bench.distance),
      F_DOUBLE("bench.min_route_length", "m for navigation routes", bench.min_route_length),
      F_DOUBLE("bench.max_yaw_deg", "disturbance yaw range", bench.max_yaw_deg),
      F_DOUBLE("bench.max_lateral", "m, disturbance offset range", bench.max_lateral),
      F_DOUBLE("bench.recovery_window", "s", bench.recovery_window),
      F_DOUBLE("bench.safe_lateral", "m", bench.safe_lateral),
      F_DOUBLE("bench.safe_heading_deg", "deg", bench.safe_heading_deg),
      F_DOUBLE("bench.safe_hold", "s the safe state must hold", bench.safe_hold),
      F_BOOL("bench.keep_trajectories", "write one trajectory CSV per episode", bench.keep_trajectories),
      F_INT("bench.jobs", "parallel episodes", bench.jobs, int),
      F_DOUBLE("bench.min_success", "success rate below which bench fails", bench_min_success),
  };
  return table;
}

#undef F_DOUBLE
#undef F_SCALED
#undef F_INT
#undef F_BOOL
#undef F_LIST

const Field* find_field(const std::string& key) {
  for (const Field& f : fields())
    if (key == f.name) return &f;
  return nullptr;
}

std::string env_name(const std::string& key) {
  std::string out = "MINEHAUL_";
  for (char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::string section_text(const RunConfig& cfg, const std::vector<std::string>& sections) {
  std::ostringstream os;
  std::string current;
  for (const Field& f : fields()) {
    std::string key = f.name;
    std::string sec = key.substr(0, key.find('.'));
    if (!sections.empty() && std::find(sections.begin(), sections.end(), sec) == sections.end()) continue;
    if (sec != current) {
      os << (current.empty() ? "" : "\n") << "[" << sec << "]\n";
      current = sec;
    }
    os << key.substr(key.find('.') + 1) << " = " << f.get(cfg) << "\n";
  }
  return os.str();
}

}  // namespace

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  r.model.beams = sim.beams;
  r.model.K = K;
  r.collect.sim = sim;
  r.collect.expert = expert;
  r.collect.truck = truck;
  r.train.seed = seed;
  r.bench.mode = mode;
  r.bench.seeds.clear();
  for (int i = 0; i < bench_seeds; ++i) r.bench.seeds.push_back(seed + static_cast<std::uint64_t>(i));
  return r;
}

std::vector<ConfigKey> config_keys() {
  RunConfig defaults;
  std::vector<ConfigKey> out;
  for (const Field& f : fields()) out.push_back({f.name, f.doc, f.get(defaults)});
  return out;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + key + "'");
  try {
    f->set(cfg, trim(value));
  } catch (const std::exception& e) {
    throw ConfigError("bad value '" + value + "' for " + key + ": " + e.what());
  }
}

std::string get_value(const RunConfig& cfg, const std::string& key) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + key + "'");
  return f->get(cfg);
}

void apply_ini(RunConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line, section;
  long n = 0;
  while (std::getline(is, line)) {
    ++n;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(n) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (section.empty()) throw ConfigError("line " + std::to_string(n) + ": key outside a section");
    try {
      set_value(cfg, section + "." + key, s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(n) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  RunConfig cfg;
  apply_ini(cfg, ss.str());
  return cfg;
}

std::map<std::string, std::string> minehaul_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string kv = *e;
    if (kv.rfind("MINEHAUL_", 0) != 0) continue;
    auto eq = kv.find('=');
    out[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
  }
  return out;
}

void apply_env(RunConfig& cfg, const std::map<std::string, std::string>& env) {
  std::map<std::string, std::string> known;
  for (const Field& f : fields()) known[env_name(f.name)] = f.name;
  for (const auto& [name, value] : env) {
    if (name.rfind("MINEHAUL_", 0) != 0) continue;
    auto it = known.find(name);
    if (it == known.end()) throw ConfigError("unknown environment override " + name);
    set_value(cfg, it->second, value);
  }
}

std::string to_ini(const RunConfig& cfg) { return section_text(cfg, {}); }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(to_ini(cfg)); }

std::string training_hash(const RunConfig& cfg) {
  return fnv1a_hex(section_text(cfg, {"truck", "sim", "expert", "collect", "data", "model", "train"}));
}

}  // namespace minehaul::cli
