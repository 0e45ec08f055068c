#include "dga/run_config.hpp"

#include <fstream>

namespace dga {

namespace {

BetaShape beta_shape_from_string(const std::string& s) {
  if (s == "linear") return BetaShape::Linear;
  if (s == "geometric") return BetaShape::Geometric;
  throw ConfigError("unknown beta shape: " + s);
}

const char* to_string(BetaShape s) {
  return s == BetaShape::Linear ? "linear" : "geometric";
}

ModelShape shape_from_json(const nlohmann::json& j) {
  ModelShape s;
  s.input_dim = j.at("input_dim").get<Index>();
  s.code_dim = j.at("code_dim").get<Index>();
  s.encoder_hidden = j.value("encoder_hidden", std::vector<Index>{});
  s.decoder_hidden = j.value("decoder_hidden", std::vector<Index>{});
  return s;
}

nlohmann::json shape_to_json(const ModelShape& s) {
  return {{"input_dim", s.input_dim},
          {"code_dim", s.code_dim},
          {"encoder_hidden", s.encoder_hidden},
          {"decoder_hidden", s.decoder_hidden}};
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.out_dir = j.value("out", std::string("."));

  if (j.contains("data")) {
    const auto& d = j.at("data");
    cfg.data.path = d.value("path", std::string());
    cfg.data.format = d.value("format", std::string("amat"));
    cfg.data.binarize = d.value("binarize", std::string("threshold"));
    cfg.data.binarize_seed = d.value("binarize_seed", std::uint64_t{0});
    cfg.data.skip = d.value("skip", Index{0});
    cfg.data.take = d.value("take", Index{-1});
  }

  if (j.contains("model")) {
    for (const auto& stage : j.at("model").at("stages")) {
      cfg.stages.push_back(shape_from_json(stage));
    }
  }

  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.train.minibatch_size = t.value("minibatch_size", 100);
    cfg.train.learning_rate = t.value("learning_rate", 1.0);
    cfg.train.lr_halving = t.value("lr_halving", true);
    cfg.train.noise_rate = t.value("noise_rate", 0.01);
    cfg.train.epochs = t.value("epochs", 1);
    cfg.train.prior_alpha = t.value("prior_alpha", 1.0);
    cfg.train.prior_decay = t.value("prior_decay", 1.0);
    if (t.contains("beta")) {
      const auto& b = t.at("beta");
      cfg.train.beta.start = b.value("start", 0.0);
      cfg.train.beta.end = b.value("end", 1.0);
      cfg.train.beta.ramp_epochs = b.value("ramp_epochs", 1);
      cfg.train.beta.shape =
          beta_shape_from_string(b.value("shape", std::string("linear")));
    }
  }
  cfg.train.seed = cfg.seed;

  if (j.contains("schedule")) {
    for (const auto& s : j.at("schedule").at("stages")) {
      StageSchedule::Stage stage;
      stage.beta_target = s.value("beta_target", 1.0);
      stage.ramp_epochs = s.value("ramp_epochs", 1);
      stage.epochs = s.value("epochs", 1);
      cfg.schedule.stages.push_back(stage);
    }
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    cfg.eval.n_centroids = e.value("n_centroids", Index{1000});
    cfg.eval.n_is_samples = e.value("n_is_samples", 100000L);
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path + ": cannot open config file");
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError(path + ": invalid JSON");
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json stages = nlohmann::json::array();
  for (const ModelShape& s : this->stages) {
    stages.push_back(shape_to_json(s));
  }
  nlohmann::json sched = nlohmann::json::array();
  for (const auto& s : schedule.stages) {
    sched.push_back({{"beta_target", s.beta_target},
                     {"ramp_epochs", s.ramp_epochs},
                     {"epochs", s.epochs}});
  }
  return nlohmann::json{
      {"seed", seed},
      {"out", out_dir},
      {"data",
       {{"path", data.path},
        {"format", data.format},
        {"binarize", data.binarize},
        {"binarize_seed", data.binarize_seed},
        {"skip", data.skip},
        {"take", data.take}}},
      {"model", {{"stages", stages}}},
      {"train",
       {{"minibatch_size", train.minibatch_size},
        {"learning_rate", train.learning_rate},
        {"lr_halving", train.lr_halving},
        {"noise_rate", train.noise_rate},
        {"epochs", train.epochs},
        {"prior_alpha", train.prior_alpha},
        {"prior_decay", train.prior_decay},
        {"beta",
         {{"start", train.beta.start},
          {"end", train.beta.end},
          {"ramp_epochs", train.beta.ramp_epochs},
          {"shape", to_string(train.beta.shape)}}}}},
      {"schedule", {{"stages", sched}}},
      {"eval",
       {{"n_centroids", eval.n_centroids}, {"n_is_samples", eval.n_is_samples}}}};
}

void RunConfig::validate() const {
  if (stages.empty()) {
    throw ConfigError("RunConfig: no model stages");
  }
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (stages[k].input_dim <= 0 || stages[k].code_dim <= 0) {
      throw ConfigError("RunConfig: stage " + std::to_string(k) +
                        " has non-positive dimensions");
    }
    if (k > 0 && stages[k].input_dim != stages[k - 1].code_dim) {
      throw ConfigError("RunConfig: stage " + std::to_string(k) + " input " +
                        std::to_string(stages[k].input_dim) +
                        " breaks the chain from stage " + std::to_string(k - 1) +
                        " code " + std::to_string(stages[k - 1].code_dim));
    }
  }
  train.validate();
  if (!schedule.stages.empty()) {
    schedule.validate();
    if (schedule.stages.size() != stages.size()) {
      throw ConfigError("RunConfig: schedule has " +
                        std::to_string(schedule.stages.size()) + " stages, model has " +
                        std::to_string(stages.size()));
    }
  }
  if (eval.n_centroids < 1 || eval.n_is_samples < 2) {
    throw ConfigError("RunConfig: eval needs n_centroids >= 1 and n_is_samples >= 2");
  }
}

BinaryDataset load_dataset(const DataConfig& cfg) {
  if (cfg.path.empty()) {
    throw ConfigError("load_dataset: no data path given");
  }
  BinaryDataset data = [&] {
    if (cfg.format == "amat") {
      return load_amat(cfg.path);
    }
    if (cfg.format == "idx") {
      if (cfg.binarize == "threshold") {
        return load_idx_and_binarize(cfg.path, BinarizeRule::Threshold);
      }
      if (cfg.binarize == "stochastic") {
        return load_idx_and_binarize(cfg.path, BinarizeRule::Stochastic,
                                     cfg.binarize_seed);
      }
      throw ConfigError("load_dataset: unknown binarize rule '" + cfg.binarize + "'");
    }
    throw ConfigError("load_dataset: unknown format '" + cfg.format + "'");
  }();
  if (cfg.skip == 0 && cfg.take < 0) {
    return data;
  }
  const Index take = cfg.take < 0 ? data.rows() - cfg.skip : cfg.take;
  return data.slice(cfg.skip, take,
                    "rows[" + std::to_string(cfg.skip) + "," +
                        std::to_string(cfg.skip + take) + ")");
}

std::string config_hash(const nlohmann::json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dga
