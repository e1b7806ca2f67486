#include "minehaul/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "minehaul/errors.hpp"

namespace minehaul::nn {

namespace {

constexpr char kMagic[4] = {'M', 'H', 'C', 'K'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError("truncated checkpoint " + path);
  return v;
}

nlohmann::json read_header(std::istream& is, const std::string& path) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a checkpoint: " + path);
  auto version = get<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  auto len = get<std::uint64_t>(is, path);
  if (len > (1u << 26)) throw ParseError("corrupt checkpoint header " + path);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw ParseError("truncated checkpoint " + path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store, const nlohmann::json& meta) {
  nlohmann::json header;
  header["meta"] = meta;
  header["step"] = store.step;
  header["params"] = nlohmann::json::array();
  for (std::size_t i = 0; i < store.size(); ++i)
    header["params"].push_back({{"name", store[i].name}, {"shape", store[i].shape}});
  std::string text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t i = 0; i < store.size(); ++i)
    for (const auto* buf : {&store[i].value, &store[i].m, &store[i].v})
      os.write(reinterpret_cast<const char*>(buf->data()), static_cast<std::streamsize>(buf->size() * sizeof(double)));
  if (!os) throw IoError("write failed: " + path);
}

nlohmann::json read_checkpoint_meta(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_header(is, path).value("meta", nlohmann::json::object());
}

nlohmann::json load_checkpoint(const std::string& path, ParamStore& store) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  nlohmann::json header = read_header(is, path);
  const auto& params = header.at("params");
  if (params.size() != store.size())
    throw DimensionError("checkpoint has " + std::to_string(params.size()) + " tensors, model has " +
                         std::to_string(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (params[i].at("name").get<std::string>() != store[i].name ||
        params[i].at("shape").get<std::vector<std::size_t>>() != store[i].shape)
      throw DimensionError("checkpoint tensor " + params[i].at("name").get<std::string>() + " does not match " +
                           store[i].name);
  }
  for (std::size_t i = 0; i < store.size(); ++i)
    for (auto* buf : {&store[i].value, &store[i].m, &store[i].v})
      if (!is.read(reinterpret_cast<char*>(buf->data()), static_cast<std::streamsize>(buf->size() * sizeof(double))))
        throw ParseError("truncated checkpoint " + path);
  store.step = header.at("step").get<std::uint64_t>();
  store.zero_grad();
  return header.value("meta", nlohmann::json::object());
}

}  // namespace minehaul::nn
