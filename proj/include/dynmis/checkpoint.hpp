#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "json.hpp"

#include "dynmis/model.hpp"

namespace dynmis {

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double loss = 0.0;

  bool operator==(const Provenance&) const = default;
};

/// Trained weights plus the pre-trained G_0 memories they start from.
struct Checkpoint {
  neural::ModelParams params;
  neural::Tensor memories;  // n x memory_dim
  Config cfg;
  Provenance provenance;

  bool operator==(const Checkpoint&) const = default;
};

nlohmann::json to_json(const Config& cfg);
Config config_from_json(const nlohmann::json& j);

// Binary layout (little-endian):
//   "DYNMISCK" | u32 version | u32 entry count | u64 entries...
//   entries: memory_dim, hidden_dim, embed_dim, signal_dim, mlp layer count,
//            mlp widths..., node count
//   then float64 tensors in ModelParams::tensors() order, then memories.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint_binary(std::ostream& out, const Checkpoint& ck);
/// Reads weights and memories; `cfg` supplies everything the binary lacks
/// and must agree with the stored dimension table.
Checkpoint read_checkpoint_binary(std::istream& in, const Config& cfg);

/// Writes `path` (binary) and `path.json` (config, provenance, `metadata`).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck,
                     const nlohmann::json& metadata = nlohmann::json::object());
/// Throws CheckpointMissing if either file is absent, CheckpointCorrupt on
/// malformed content.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace dynmis
