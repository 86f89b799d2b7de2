#pragma once

#include <string>

#include "pgnet/params.hpp"

namespace pgnet {

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  ModelDims dims;
  std::string vocab_hash_hex;
  int64_t step = 0;
  bool coverage_enabled = false;
  std::string config_json = "{}";  // echo of the training configuration
};

struct Checkpoint {
  CheckpointMeta meta;
  ModelParams params;
};

// File layout: magic "PGNC", u32 format version, u32 metadata length + JSON
// metadata, then one record per parameter in sorted name order:
// u32 name length, name, u32 rank, u32 dims..., little-endian f32 data.
// save -> load -> save is byte-identical.
void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::string& path);
std::string checkpoint_bytes(const ModelParams& params, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pgnet
