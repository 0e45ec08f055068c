#pragma once

#include <string>
#include <vector>

#include "dga/dataset.hpp"
#include "dga/stack.hpp"
#include "json.hpp"

namespace dga {

/// Dataset source plus optional row slicing applied after load.
struct DataConfig {
  std::string path;
  std::string format = "amat";         // "amat" or "idx"
  std::string binarize = "threshold";  // idx only: "threshold" or "stochastic"
  std::uint64_t binarize_seed = 0;
  Index skip = 0;
  Index take = -1;  // -1 = all remaining rows
};

struct EvalSettings {
  Index n_centroids = 1000;
  long n_is_samples = 100000;
};

/// One JSON document that pins a whole run: model shape(s), training
/// settings, per-stage schedule, eval settings, data source and seed.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  DataConfig data;
  std::vector<ModelShape> stages;
  TrainConfig train;
  StageSchedule schedule;
  EvalSettings eval;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;

  /// Dimension chaining across stages, schedule consistency, value ranges.
  /// Runs before any work starts.
  void validate() const;
};

BinaryDataset load_dataset(const DataConfig& cfg);

/// FNV-1a 64 of a canonical JSON dump, as 16 hex digits. Identifies the
/// effective configuration in every artifact a run writes.
std::string config_hash(const nlohmann::json& j);

}  // namespace dga
