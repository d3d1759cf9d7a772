// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "ADMCKPT\x01"
//   8 bytes   manifest length L
//   L bytes   JSON manifest
//   ...       float32 payload; manifest offsets are relative to its start
//
// Manifest: {"format_version", "dtype", "param_count", "total_scalars",
//            "params": [{"name", "shape", "dtype", "offset"}], "meta": {...}}

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adm/diffcore/param_store.hpp"

namespace adm::dc {

inline constexpr int kCheckpointFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointData {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> params;
};

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path,
                     const nlohmann::json& meta = nlohmann::json::object());

CheckpointData read_checkpoint(const std::filesystem::path& path);

// Copies every tensor of `data` into `store`. Unknown names, missing names
// and shape mismatches are errors; nothing is modified on failure.
void load_into(ParamStore& store, const CheckpointData& data);

inline void load_checkpoint(ParamStore& store, const std::filesystem::path& path) {
  load_into(store, read_checkpoint(path));
}

}  // namespace adm::dc
