#include "minehaul/data/dataset_io.hpp"

#include <fstream>

#include "minehaul/errors.hpp"

namespace minehaul::data {

using nlohmann::json;

std::filesystem::path manifest_path(const std::filesystem::path& jsonl) {
  return std::filesystem::path(jsonl.string() + ".manifest.json");
}

json observation_to_json(const Observation& obs) {
  json j;
  j["scan"] = {{"fov", obs.scan.fov},
               {"t", obs.scan.timestamp},
               {"ranges", obs.scan.ranges},
               {"valid", obs.scan.valid}};
  j["gnss"] = {{"x", obs.gnss.position.x},
               {"y", obs.gnss.position.y},
               {"alt", obs.gnss.altitude},
               {"valid", obs.gnss.valid},
               {"t", obs.gnss.timestamp}};
  j["speed"] = obs.speed;
  j["hlc_lat"] = expert::to_string(obs.hlc.lateral);
  j["hlc_lon"] = expert::to_string(obs.hlc.longitudinal);
  return j;
}

Observation observation_from_json(const json& j) {
  Observation o;
  const json& sc = j.at("scan");
  o.scan.fov = sc.at("fov").get<double>();
  o.scan.timestamp = sc.at("t").get<double>();
  o.scan.ranges = sc.at("ranges").get<std::vector<double>>();
  o.scan.valid = sc.at("valid").get<std::vector<std::uint8_t>>();
  o.scan.beams = static_cast<int>(o.scan.ranges.size());
  if (o.scan.valid.size() != o.scan.ranges.size()) throw ParseError("scan ranges and mask differ in length");
  const json& g = j.at("gnss");
  o.gnss.position = {g.at("x").get<double>(), g.at("y").get<double>()};
  o.gnss.altitude = g.value("alt", 0.0);
  o.gnss.valid = g.at("valid").get<bool>();
  o.gnss.timestamp = g.at("t").get<double>();
  o.speed = j.at("speed").get<double>();
  o.hlc.lateral = expert::lateral_from_string(j.at("hlc_lat").get<std::string>());
  o.hlc.longitudinal = expert::longitudinal_from_string(j.at("hlc_lon").get<std::string>());
  return o;
}

namespace {

json frame_json(const Observation& obs, double t, double s, int episode) {
  json j = observation_to_json(obs);
  j["t"] = t;
  j["s"] = s;
  j["episode"] = episode;
  return j;
}

void set_command(json& j, const ControlCommand& c) {
  for (std::size_t ch = 0; ch < kChannels; ++ch) j[std::string(kChannelNames[ch])] = c[ch];
}

ControlCommand get_command(const json& j) {
  ControlCommand c;
  for (std::size_t ch = 0; ch < kChannels; ++ch) c[ch] = j.at(std::string(kChannelNames[ch])).get<double>();
  return c;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <class F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), n);
    }
  }
}

}  // namespace

void write_demonstrations(const std::filesystem::path& path, const DemonstrationSet& demos) {
  std::ofstream out = open_out(path);
  for (const Demonstration& d : demos)
    for (const DemoFrame& f : d.frames) {
      json j = frame_json(f.obs, f.t, f.s, d.episode);
      set_command(j, f.label);
      j["segment"] = f.segment;
      out << j.dump() << '\n';
    }
  if (!out) throw IoError("write failed: " + path.string());
}

DemonstrationSet read_demonstrations(const std::filesystem::path& path) {
  DemonstrationSet out;
  for_each_line(path, [&](const json& j) {
    int ep = j.at("episode").get<int>();
    if (out.empty() || out.back().episode != ep) out.push_back(Demonstration{ep, {}});
    DemoFrame f;
    f.obs = observation_from_json(j);
    f.label = get_command(j);
    f.t = j.at("t").get<double>();
    f.s = j.at("s").get<double>();
    f.segment = j.value("segment", 0u);
    out.back().frames.push_back(std::move(f));
  });
  return out;
}

void write_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples) {
  std::ofstream out = open_out(path);
  for (const TrainingSample& s : samples) {
    json j = frame_json(s.obs, s.t, s.s, s.episode);
    ControlCommand y0;
    for (std::size_t c = 0; c < kChannels; ++c) y0[c] = s.label(c, 0);
    set_command(j, y0);
    j["K"] = s.K;
    j["y"] = s.y;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TrainingSample> read_samples(const std::filesystem::path& path) {
  std::vector<TrainingSample> out;
  for_each_line(path, [&](const json& j) {
    TrainingSample s;
    s.obs = observation_from_json(j);
    s.t = j.at("t").get<double>();
    s.s = j.at("s").get<double>();
    s.episode = j.at("episode").get<int>();
    s.K = j.at("K").get<int>();
    s.y = j.at("y").get<std::vector<double>>();
    if (s.K < 1 || s.y.size() != kChannels * static_cast<std::size_t>(s.K)) throw ParseError("label width does not match K");
    out.push_back(std::move(s));
  });
  return out;
}

json manifest_to_json(const Manifest& m) {
  json j;
  j["schema"] = "minehaul.dataset/1";
  j["kind"] = m.kind;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  if (m.thresholds)
    j["thresholds"] = {{"steer_low", m.thresholds->steer_low},
                       {"steer_up", m.thresholds->steer_up},
                       {"throttle_up", m.thresholds->throttle_up}};
  j["augmentation"] = {{"scale", m.augmentation.scale},
                       {"yaw_deg", m.augmentation.yaw_deg},
                       {"gnss_drop", m.augmentation.gnss_drop},
                       {"k_yaw", m.augmentation.k_yaw}};
  j["K"] = m.K;
  j["spacing"] = m.spacing;
  j["count"] = m.count;
  return j;
}

Manifest manifest_from_json(const json& j) {
  try {
    Manifest m;
    m.kind = j.at("kind").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    if (j.contains("thresholds")) {
      const json& t = j["thresholds"];
      m.thresholds = FilterThresholds{t.at("steer_low").get<double>(), t.at("steer_up").get<double>(),
                                      t.at("throttle_up").get<double>()};
    }
    const json& a = j.at("augmentation");
    m.augmentation = {a.at("scale").get<double>(), a.at("yaw_deg").get<double>(), a.at("gnss_drop").get<double>(),
                      a.at("k_yaw").get<double>()};
    m.K = j.at("K").get<int>();
    m.spacing = j.at("spacing").get<double>();
    m.count = j.at("count").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out = open_out(path);
  out << manifest_to_json(m).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path, const std::optional<std::string>& expected_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
  Manifest m = manifest_from_json(j);
  if (expected_hash && m.config_hash != *expected_hash)
    throw ConfigError("manifest config hash " + m.config_hash + " does not match " + *expected_hash);
  return m;
}

}  // namespace minehaul::data
