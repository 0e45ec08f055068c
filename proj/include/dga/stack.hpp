#pragma once

#include "dga/training.hpp"

namespace dga {

/// Per-stage annealing targets for greedy pretraining. Early stages may stop
/// short of beta = 1 (reconstruction matters more low in the stack); the
/// final stage must reach exactly 1.
struct StageSchedule {
  struct Stage {
    double beta_target = 1.0;
    int ramp_epochs = 1;
    int epochs = 1;
  };
  std::vector<Stage> stages;

  void validate() const;
};

/// Ordered stages, bottom first; stage k consumes the codes of stage k-1.
/// Only the top stage's prior is used generatively; the lower priors stay
/// around for diagnostics.
struct DeepDga {
  std::vector<DgaModel> stages;

  Index input_dim() const { return stages.front().input_dim(); }
  Index code_dim() const { return stages.back().code_dim(); }

  /// Dimension chaining across stages; ConfigError on a break. Run this after
  /// construction and after deserialization.
  void validate() const;
};

DeepDga deep_from_shallow(DgaModel m);

/// Trains the stack one stage at a time: stage 0 on the raw data, each later
/// stage on the previous stage's frozen codes, materialized once per stage.
/// Stage k trains with cfg overridden by sched.stages[k] (epochs, beta end =
/// beta_target) and a seed derived from cfg.seed (stage 0 uses cfg.seed
/// itself, so a 1-stage call matches shallow training exactly). When
/// stage_data_dir is non-empty the per-stage code datasets are also written
/// there as amat files.
DeepDga greedy_pretrain(const BinaryDataset& data,
                        const std::vector<ModelShape>& shapes,
                        const StageSchedule& sched, const TrainConfig& cfg,
                        std::ostream* progress = nullptr,
                        const std::string& stage_data_dir = "",
                        std::vector<TrainLog>* logs_out = nullptr);

Vector compose_encode(const DeepDga& d, const Vector& x);
Matrix compose_encode_batch(const DeepDga& d, const Matrix& x);

/// Encodes every row; the result is the training set for the next stage.
BinaryDataset encode_dataset(const DgaModel& m, const BinaryDataset& data);

enum class IntermediateMode { Threshold, Sample };

IntermediateMode intermediate_mode_from_string(const std::string& s);
const char* to_string(IntermediateMode m);

/// Ancestral draws: one column per sample. bits are the bottom Bernoulli
/// draws; means are the bottom decoder means the bits were drawn from (what
/// image grids want).
struct SampleBatch {
  Matrix bits;
  Matrix means;
};

/// Samples the top prior, decodes stage by stage. Intermediate binary codes
/// come from the decoder means by thresholding at 0.5 or by Bernoulli
/// sampling, per mode. Throws StateError if the top prior has no
/// observations and no smoothing.
SampleBatch ancestral_sample(const DeepDga& d, Index n, Rng& rng,
                             IntermediateMode mode = IntermediateMode::Threshold);

/// Deterministic top-down decode used by evaluation: threshold at 0.5 through
/// intermediate stages, returning the bottom means.
Vector decode_path_means(const DeepDga& d, const Vector& h_top);
Matrix decode_path_means_batch(const DeepDga& d, const Matrix& h_top);

}  // namespace dga
