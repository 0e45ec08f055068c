#include "dga/stack.hpp"

#include <filesystem>
#include <ostream>

namespace dga {

void StageSchedule::validate() const {
  if (stages.empty()) {
    throw ConfigError("StageSchedule: no stages");
  }
  for (const Stage& s : stages) {
    if (s.beta_target < 0.0 || s.beta_target > 1.0) {
      throw ConfigError("StageSchedule: beta_target must lie in [0, 1]");
    }
    if (s.epochs <= 0) {
      throw ConfigError("StageSchedule: per-stage epochs must be positive");
    }
    if (s.ramp_epochs < 0) {
      throw ConfigError("StageSchedule: ramp_epochs must be >= 0");
    }
  }
  if (stages.back().beta_target != 1.0) {
    throw ConfigError("StageSchedule: the final stage must have beta_target = 1");
  }
}

void DeepDga::validate() const {
  if (stages.empty()) {
    throw ConfigError("DeepDga: no stages");
  }
  for (std::size_t k = 0; k < stages.size(); ++k) {
    stages[k].validate();
    if (k > 0 && stages[k].input_dim() != stages[k - 1].code_dim()) {
      throw ConfigError("DeepDga: stage " + std::to_string(k) + " input " +
                        std::to_string(stages[k].input_dim()) +
                        " != stage " + std::to_string(k - 1) + " code " +
                        std::to_string(stages[k - 1].code_dim()));
    }
  }
}

DeepDga deep_from_shallow(DgaModel m) {
  DeepDga d;
  d.stages.push_back(std::move(m));
  d.validate();
  return d;
}

namespace {

std::uint64_t stage_seed(std::uint64_t base, std::size_t stage) {
  if (stage == 0) {
    return base;
  }
  std::uint64_t s = base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(stage);
  return splitmix64(s);
}

}  // namespace

DeepDga greedy_pretrain(const BinaryDataset& data,
                        const std::vector<ModelShape>& shapes,
                        const StageSchedule& sched, const TrainConfig& cfg,
                        std::ostream* progress, const std::string& stage_data_dir,
                        std::vector<TrainLog>* logs_out) {
  sched.validate();
  if (shapes.size() != sched.stages.size()) {
    throw ConfigError("greedy_pretrain: " + std::to_string(shapes.size()) +
                      " shapes vs " + std::to_string(sched.stages.size()) +
                      " schedule stages");
  }
  if (shapes.front().input_dim != data.width()) {
    throw ConfigError("greedy_pretrain: stage 0 input " +
                      std::to_string(shapes.front().input_dim) +
                      " != dataset width " + std::to_string(data.width()));
  }
  for (std::size_t k = 1; k < shapes.size(); ++k) {
    if (shapes[k].input_dim != shapes[k - 1].code_dim) {
      throw ConfigError("greedy_pretrain: stage " + std::to_string(k) +
                        " input does not chain to stage " + std::to_string(k - 1));
    }
  }

  DeepDga deep;
  BinaryDataset stage_data = data;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    TrainConfig stage_cfg = cfg;
    stage_cfg.epochs = sched.stages[k].epochs;
    stage_cfg.beta.end = sched.stages[k].beta_target;
    stage_cfg.beta.ramp_epochs = sched.stages[k].ramp_epochs;
    stage_cfg.seed = stage_seed(cfg.seed, k);

    TrainLog log;
    DgaModel stage = train_dga(stage_data, shapes[k], stage_cfg, progress, &log);
    if (logs_out) {
      logs_out->push_back(std::move(log));
    }
    deep.stages.push_back(std::move(stage));

    if (k + 1 < shapes.size()) {
      stage_data = encode_dataset(deep.stages.back(), stage_data);
      if (!stage_data_dir.empty()) {
        std::filesystem::create_directories(stage_data_dir);
        save_amat(stage_data, stage_data_dir + "/stage" + std::to_string(k + 1) +
                                  "_codes.amat");
      }
    }
  }
  deep.validate();
  return deep;
}

Vector compose_encode(const DeepDga& d, const Vector& x) {
  d.validate();
  Vector h = x;
  for (const DgaModel& stage : d.stages) {
    h = encode(stage, h).code;
  }
  return h;
}

Matrix compose_encode_batch(const DeepDga& d, const Matrix& x) {
  Matrix h = x;
  for (const DgaModel& stage : d.stages) {
    h = encode_batch(stage, h);
  }
  return h;
}

BinaryDataset encode_dataset(const DgaModel& m, const BinaryDataset& data) {
  const Matrix codes = encode_batch(m, data.to_matrix());
  std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(codes.cols()));
  for (Index j = 0; j < codes.cols(); ++j) {
    auto& row = rows[static_cast<std::size_t>(j)];
    row.resize(static_cast<std::size_t>(codes.rows()));
    for (Index i = 0; i < codes.rows(); ++i) {
      row[static_cast<std::size_t>(i)] = codes(i, j) != 0.0 ? 1 : 0;
    }
  }
  Provenance prov = data.provenance();
  prov.source = "encode(" + prov.source + ")";
  prov.rule = "encoder-threshold";
  return BinaryDataset::from_rows(rows, std::move(prov));
}

IntermediateMode intermediate_mode_from_string(const std::string& s) {
  if (s == "threshold") return IntermediateMode::Threshold;
  if (s == "sample") return IntermediateMode::Sample;
  throw ConfigError("unknown intermediate mode: " + s);
}

const char* to_string(IntermediateMode m) {
  return m == IntermediateMode::Threshold ? "threshold" : "sample";
}

SampleBatch ancestral_sample(const DeepDga& d, Index n, Rng& rng,
                             IntermediateMode mode) {
  d.validate();
  if (n <= 0) {
    throw ConfigError("ancestral_sample: n must be positive");
  }
  const FactorizedBernoulli top = d.stages.back().prior.snapshot();

  Matrix codes(top.dim(), n);
  for (Index j = 0; j < n; ++j) {
    codes.col(j) = top.sample(rng);
  }

  Matrix means;
  for (std::size_t k = d.stages.size(); k-- > 0;) {
    means = decode_means_batch(d.stages[k], codes);
    if (k == 0) {
      break;
    }
    if (mode == IntermediateMode::Threshold) {
      codes = (means.array() > 0.5).cast<double>();
    } else {
      codes.resize(means.rows(), means.cols());
      for (Index j = 0; j < means.cols(); ++j) {
        for (Index i = 0; i < means.rows(); ++i) {
          codes(i, j) = rng.bernoulli(means(i, j)) ? 1.0 : 0.0;
        }
      }
    }
  }

  SampleBatch out;
  out.means = means;
  out.bits.resize(means.rows(), means.cols());
  for (Index j = 0; j < means.cols(); ++j) {
    for (Index i = 0; i < means.rows(); ++i) {
      out.bits(i, j) = rng.bernoulli(means(i, j)) ? 1.0 : 0.0;
    }
  }
  return out;
}

Vector decode_path_means(const DeepDga& d, const Vector& h_top) {
  return decode_path_means_batch(d, h_top);
}

Matrix decode_path_means_batch(const DeepDga& d, const Matrix& h_top) {
  if (d.stages.empty()) {
    throw ConfigError("decode_path_means: no stages");
  }
  Matrix codes = h_top;
  Matrix means;
  for (std::size_t k = d.stages.size(); k-- > 0;) {
    means = decode_means_batch(d.stages[k], codes);
    if (k > 0) {
      codes = (means.array() > 0.5).cast<double>();
    }
  }
  return means;
}

}  // namespace dga
