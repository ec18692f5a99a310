#include "trajpred/train/checkpoint_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "trajpred/core/error.hpp"

namespace trajpred::train {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'R', 'J', 'P', 'C', 'K', 'P', 'T'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& src) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw CheckpointError(src + ": truncated checkpoint");
  return v;
}

}  // namespace

void save_param_file(const std::filesystem::path& path, nlohmann::json header, const nn::ConstParamRefs& params) {
  if (!header.is_object()) throw InvalidInput("checkpoint header must be a JSON object");
  header["params"] = nlohmann::json::array();
  for (const auto* p : params) {
    header["params"].push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p->value.size())));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ParamFile load_param_file(const std::filesystem::path& path) {
  const std::string src = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + src);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw CheckpointError(src + ": not a checkpoint file");
  const auto version = read_pod<std::uint32_t>(in, src);
  if (version != kCheckpointVersion) {
    throw CheckpointError(src + ": checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto len = read_pod<std::uint64_t>(in, src);
  if (len > (1u << 30)) throw CheckpointError(src + ": implausible header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw CheckpointError(src + ": truncated header");
  ParamFile file;
  try {
    file.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(src + ": bad header: " + e.what());
  }
  if (!file.header.contains("params") || !file.header["params"].is_array()) {
    throw CheckpointError(src + ": header lacks parameter table");
  }
  for (const auto& entry : file.header["params"]) {
    const auto name = entry.at("name").get<std::string>();
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw CheckpointError(src + ": negative shape for " + name);
    nn::Matrix m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())))) {
      throw CheckpointError(src + ": truncated payload at " + name);
    }
    file.params.emplace(name, std::move(m));
  }
  return file;
}

void assign_params(const ParamFile& file, const nn::ParamRefs& params) {
  for (auto* p : params) {
    auto it = file.params.find(p->name);
    if (it == file.params.end()) throw CheckpointError("checkpoint lacks parameter " + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw CheckpointError("shape mismatch for parameter " + p->name);
    }
    p->value = it->second;
  }
}

}  // namespace trajpred::train
