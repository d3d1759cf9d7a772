// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/diffcore/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace adm::dc {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'A', 'D', 'M', 'C', 'K', 'P', 'T', '\x01'};

}  // namespace

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path, const nlohmann::json& meta) {
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["dtype"] = "float32";
  manifest["param_count"] = store.entries().size();
  manifest["total_scalars"] = store.scalar_count();
  manifest["meta"] = meta;
  auto params = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : store.entries()) {
    params.push_back({{"name", e.name}, {"shape", e.param.shape()}, {"dtype", "float32"}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(e.param.numel()) * sizeof(float);
  }
  manifest["params"] = std::move(params);
  const std::string text = manifest.dump();

  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw CheckpointError("cannot open '" + path.string() + "' for writing");
  }
  const std::uint64_t len = text.size();
  os.write(kMagic, sizeof(kMagic));
  os.write(reinterpret_cast<const char*>(&len), sizeof(len));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<float> buf;
  for (const auto& e : store.entries()) {
    const auto v = e.param.values();
    buf.assign(v.begin(), v.end());
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!os) {
    throw CheckpointError("write failed for '" + path.string() + "'");
  }
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  }
  char magic[8];
  std::uint64_t len = 0;
  is.read(magic, sizeof(magic));
  is.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("'" + path.string() + "' is not a checkpoint (bad magic)");
  }
  const auto file_size = std::filesystem::file_size(path);
  if (len > file_size) {
    throw CheckpointError("corrupt checkpoint: manifest length exceeds file size");
  }
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
  }

  CheckpointData out;
  try {
    if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw CheckpointError("unsupported checkpoint format_version " + manifest.at("format_version").dump());
    }
    if (manifest.at("dtype").get<std::string>() != "float32") {
      throw CheckpointError("unsupported checkpoint dtype " + manifest.at("dtype").dump());
    }
    const auto& params = manifest.at("params");
    if (manifest.at("param_count").get<std::size_t>() != params.size()) {
      throw CheckpointError("manifest param_count " + manifest.at("param_count").dump() + " does not match " +
                            std::to_string(params.size()) + " listed parameters");
    }
    const std::uint64_t payload_start = sizeof(kMagic) + sizeof(len) + len;
    std::uint64_t expected_offset = 0;
    std::int64_t total = 0;
    std::vector<float> buf;
    for (const auto& p : params) {
      const auto name = p.at("name").get<std::string>();
      const auto shape = p.at("shape").get<Shape>();
      if (p.at("dtype").get<std::string>() != "float32") {
        throw CheckpointError("parameter '" + name + "' has unsupported dtype");
      }
      const auto offset = p.at("offset").get<std::uint64_t>();
      if (offset != expected_offset) {
        throw CheckpointError("parameter '" + name + "' has inconsistent offset");
      }
      const auto n = numel(shape);
      total += n;
      expected_offset += static_cast<std::uint64_t>(n) * sizeof(float);
      if (payload_start + expected_offset > file_size) {
        throw CheckpointError("corrupt checkpoint: payload truncated at '" + name + "'");
      }
      buf.resize(static_cast<std::size_t>(n));
      is.seekg(static_cast<std::streamoff>(payload_start + offset));
      is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
      if (!is) {
        throw CheckpointError("read failed for parameter '" + name + "'");
      }
      out.params.emplace_back(name, Tensor::from_vector(shape, std::vector<double>(buf.begin(), buf.end())));
    }
    if (manifest.at("total_scalars").get<std::int64_t>() != total) {
      throw CheckpointError("manifest total_scalars does not match parameter shapes");
    }
    if (payload_start + expected_offset != file_size) {
      throw CheckpointError("corrupt checkpoint: trailing or missing payload bytes");
    }
    out.meta = manifest.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint manifest: ") + e.what());
  }
  return out;
}

void load_into(ParamStore& store, const CheckpointData& data) {
  std::string unknown;
  for (const auto& [name, t] : data.params) {
    if (!store.contains(name)) {
      unknown += (unknown.empty() ? "" : ", ") + name;
    }
  }
  if (!unknown.empty()) {
    throw CheckpointError("checkpoint has unknown parameters: " + unknown);
  }
  std::string missing;
  for (const auto& e : store.entries()) {
    bool found = false;
    for (const auto& [name, t] : data.params) {
      if (name == e.name) {
        found = true;
        if (t.shape() != e.param.shape()) {
          throw CheckpointError("shape mismatch for '" + name + "': checkpoint " + to_string(t.shape()) +
                                ", model " + to_string(e.param.shape()));
        }
        break;
      }
    }
    if (!found) missing += (missing.empty() ? "" : ", ") + e.name;
  }
  if (!missing.empty()) {
    throw CheckpointError("checkpoint lacks parameters: " + missing);
  }
  for (const auto& [name, t] : data.params) {
    auto dst = store.at(name).mutable_values();
    const auto src = t.values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace adm::dc
