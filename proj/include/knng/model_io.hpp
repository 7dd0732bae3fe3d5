#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "knng/graph_index.hpp"

namespace knng {

// Self-describing binary model file. Little-endian throughout:
//   magic "KNNG", format version u32
//   metadata JSON (u64 length + bytes): resolved config snapshot
//   n u64, d u32, c u32
//   params: M u32, max_degree0 u32, ef_construction u32, ef_search u32,
//           level_norm f64, level_seed u64
//   top_level u32, entry_point u32
//   level table: n x u32
//   per-layer adjacency, layers 0..top_level: for each node with
//   level >= layer, in id order: u32 count + count x u32 ids
//   features: n x d f64
//   node labels: n x u32
//   label mapping: u32 count, then per class u32 length + bytes
inline constexpr char kModelMagic[4] = {'K', 'N', 'N', 'G'};
inline constexpr std::uint32_t kModelVersion = 1;

struct ModelFile {
  GraphIndex index;
  std::vector<std::string> class_names;
  std::string metadata_json;
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

struct ModelInfo {
  std::uint32_t version = 0;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  std::uint32_t c = 0;
  std::uint32_t top_level = 0;
  double avg_degree = 0.0;
  IndexParams params;
  std::string metadata_json;
};

// Header plus derived statistics, for the `inspect` subcommand.
ModelInfo inspect_model(const std::string& path);

}  // namespace knng
