#include "dga/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dga/eval.hpp"
#include "dga/image.hpp"
#include "dga/model_io.hpp"
#include "dga/run_config.hpp"

namespace dga {

namespace {

namespace fs = std::filesystem;

const char* error_kind(const Error& e) {
  if (dynamic_cast<const ShapeError*>(&e)) return "shape_error";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  if (dynamic_cast<const FormatError*>(&e)) return "format_error";
  if (dynamic_cast<const StateError*>(&e)) return "state_error";
  if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
  return "error";
}

void write_text_file(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError(path + ": cannot open for writing");
  }
  out << text;
}

/// Flags every subcommand shares; applied over the config file values.
struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> model;
  std::optional<Index> n_centroids;
  std::optional<long> n_is_samples;
  std::optional<int> beta_ramp_epochs;
  std::optional<double> noise_rate;
  std::string intermediate_mode = "threshold";
  std::optional<std::string> format;
  std::optional<std::string> binarize;
  std::optional<Index> skip;
  std::optional<Index> take;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--seed", args.seed, "seed override");
  cmd->add_option("--out", args.out, "output directory or file");
  cmd->add_option("--data", args.data, "dataset path override");
  cmd->add_option("--model", args.model, "model file");
  cmd->add_option("--n-centroids", args.n_centroids, "proposal mixture size");
  cmd->add_option("--n-is-samples", args.n_is_samples, "importance samples");
  cmd->add_option("--beta-ramp-epochs", args.beta_ramp_epochs, "beta ramp override");
  cmd->add_option("--noise-rate", args.noise_rate, "salt-and-pepper rate override");
  cmd->add_option("--intermediate-mode", args.intermediate_mode,
                  "threshold or sample (stacked decoding)");
  cmd->add_option("--format", args.format, "dataset format: amat or idx");
  cmd->add_option("--binarize", args.binarize, "idx rule: threshold or stochastic");
  cmd->add_option("--skip", args.skip, "skip leading dataset rows");
  cmd->add_option("--take", args.take, "row count after skip");
}

RunConfig effective_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig{}
                                           : RunConfig::from_file(args.config_path);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.train.seed = *args.seed;
  }
  if (args.out) cfg.out_dir = *args.out;
  if (args.data) cfg.data.path = *args.data;
  if (args.format) cfg.data.format = *args.format;
  if (args.binarize) cfg.data.binarize = *args.binarize;
  if (args.skip) cfg.data.skip = *args.skip;
  if (args.take) cfg.data.take = *args.take;
  if (args.n_centroids) cfg.eval.n_centroids = *args.n_centroids;
  if (args.n_is_samples) cfg.eval.n_is_samples = *args.n_is_samples;
  if (args.beta_ramp_epochs) {
    cfg.train.beta.ramp_epochs = *args.beta_ramp_epochs;
    for (auto& stage : cfg.schedule.stages) {
      stage.ramp_epochs = *args.beta_ramp_epochs;
    }
  }
  if (args.noise_rate) cfg.train.noise_rate = *args.noise_rate;
  return cfg;
}

nlohmann::json run_stamp(const RunConfig& cfg) {
  return nlohmann::json{{"seed", cfg.seed}, {"config_hash", config_hash(cfg.to_json())}};
}

void write_train_log(const std::string& path, const nlohmann::json& stamp,
                     const std::vector<TrainLog>& logs) {
  std::string text = stamp.dump() + "\n";
  for (const TrainLog& log : logs) {
    for (const EpochSummary& s : log.epochs) {
      nlohmann::json line{{"epoch", s.epoch},
                          {"recon_nll", s.reconstruction_nll},
                          {"prior_nll", s.prior_nll},
                          {"beta", s.beta},
                          {"lr", s.learning_rate}};
      text += line.dump() + "\n";
    }
  }
  write_text_file(path, text);
}

int cmd_train(const CommonArgs& args) {
  RunConfig cfg = effective_config(args);
  if (cfg.stages.size() != 1) {
    throw ConfigError("train: config must define exactly one model stage (use "
                      "`stack` for deep models)");
  }
  cfg.validate();
  const BinaryDataset data = load_dataset(cfg.data);

  TrainLog log;
  const DgaModel model = train_dga(data, cfg.stages.front(), cfg.train, &std::cout, &log);

  nlohmann::json meta = run_stamp(cfg);
  meta["config"] = cfg.to_json();
  meta["data_provenance"] = {{"source", data.provenance().source},
                             {"rule", data.provenance().rule},
                             {"split", data.provenance().split}};
  fs::create_directories(cfg.out_dir);
  save_model(deep_from_shallow(model), cfg.out_dir + "/model.dga", meta);
  write_train_log(cfg.out_dir + "/train_log.jsonl", run_stamp(cfg), {log});
  return 0;
}

int cmd_stack(const CommonArgs& args) {
  RunConfig cfg = effective_config(args);
  if (cfg.stages.empty()) {
    throw ConfigError("stack: config must define model.stages");
  }
  if (cfg.schedule.stages.empty()) {
    throw ConfigError("stack: config must define schedule.stages");
  }
  cfg.validate();
  const BinaryDataset data = load_dataset(cfg.data);

  fs::create_directories(cfg.out_dir);
  std::vector<TrainLog> logs;
  const DeepDga model =
      greedy_pretrain(data, cfg.stages, cfg.schedule, cfg.train, &std::cout,
                      cfg.out_dir + "/stage_data", &logs);

  nlohmann::json meta = run_stamp(cfg);
  meta["config"] = cfg.to_json();
  meta["data_provenance"] = {{"source", data.provenance().source},
                             {"rule", data.provenance().rule},
                             {"split", data.provenance().split}};
  save_model(model, cfg.out_dir + "/model.dga", meta);
  write_train_log(cfg.out_dir + "/train_log.jsonl", run_stamp(cfg), logs);
  return 0;
}

int cmd_sample(const CommonArgs& args, Index n, int grid_rows, int grid_cols,
               int img_h, int img_w) {
  if (!args.model) {
    throw ConfigError("sample: --model is required");
  }
  RunConfig cfg = effective_config(args);
  const DeepDga model = load_model(*args.model);
  const IntermediateMode mode =
      intermediate_mode_from_string(args.intermediate_mode);

  if (n <= 0) {
    n = static_cast<Index>(grid_rows) * grid_cols;
  }
  if (img_h <= 0 || img_w <= 0) {
    const double side = std::sqrt(static_cast<double>(model.input_dim()));
    if (side != std::floor(side)) {
      throw ConfigError("sample: input dimension " +
                        std::to_string(model.input_dim()) +
                        " is not a perfect square; pass --img-h and --img-w");
    }
    img_h = img_w = static_cast<int>(side);
  }

  Rng rng(cfg.seed);
  const SampleBatch batch = ancestral_sample(model, n, rng, mode);

  const std::string out_path = args.out ? *args.out : "samples.pgm";
  write_pgm_grid(batch.means, grid_rows, grid_cols, img_h, img_w, out_path);

  nlohmann::json sidecar = run_stamp(cfg);
  sidecar["model"] = *args.model;
  sidecar["n"] = n;
  sidecar["intermediate_mode"] = to_string(mode);
  write_text_file(out_path + ".json", sidecar.dump() + "\n");
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  if (!args.model) {
    throw ConfigError("eval: --model is required");
  }
  RunConfig cfg = effective_config(args);
  const DeepDga model = load_model(*args.model);
  const BinaryDataset data = load_dataset(cfg.data);

  const EvalReport report =
      evaluate(model, data, cfg.eval.n_centroids, cfg.eval.n_is_samples, cfg.seed);

  nlohmann::json j = nlohmann::json::parse(to_json_string(report));
  j.update(run_stamp(cfg));
  j["model"] = *args.model;
  j["data_provenance"] = {{"source", data.provenance().source},
                          {"rule", data.provenance().rule},
                          {"split", data.provenance().split}};
  std::cout << j.dump() << "\n";
  if (args.out) {
    write_text_file(*args.out, j.dump() + "\n");
  }
  return 0;
}

int cmd_metrics(const CommonArgs& args, bool as_table) {
  RunConfig cfg = effective_config(args);
  BinaryDataset data = load_dataset(cfg.data);

  struct Row {
    std::string name;
    Table1Metrics m;
  };
  std::vector<Row> rows;
  rows.push_back({"Data (X)", table1_metrics(data)});

  if (args.model) {
    const DeepDga model = load_model(*args.model);
    std::string inner = "X";
    BinaryDataset codes = data;
    for (std::size_t k = 0; k < model.stages.size(); ++k) {
      codes = encode_dataset(model.stages[k], codes);
      inner = "f" + std::to_string(k + 1) + "(" + inner + ")";
      rows.push_back({inner, table1_metrics(codes)});
    }
  }

  if (as_table) {
    std::printf("%-24s %12s %18s %18s\n", "Samples", "Entropy", "Avg # active bits",
                "||Corr-diag||_F");
    for (const Row& r : rows) {
      std::printf("%-24s %12.1f %18.1f %18.1f\n", r.name.c_str(), r.m.entropy_bits,
                  r.m.avg_active_bits, r.m.offdiag_corr_fro);
    }
    return 0;
  }

  nlohmann::json out = run_stamp(cfg);
  out["rows"] = nlohmann::json::array();
  for (const Row& r : rows) {
    out["rows"].push_back({{"name", r.name},
                           {"entropy_bits", r.m.entropy_bits},
                           {"avg_active_bits", r.m.avg_active_bits},
                           {"offdiag_corr_fro", r.m.offdiag_corr_fro}});
  }
  std::cout << out.dump() << "\n";
  if (args.out) {
    write_text_file(*args.out, out.dump() + "\n");
  }
  return 0;
}

int cmd_synth(const CommonArgs& args, Index n, Index d_x, Index k) {
  RunConfig cfg = effective_config(args);
  Rng rng(cfg.seed);
  const BinaryDataset data = synth_manifold(n, d_x, k, rng);
  const std::string out_path = args.out ? *args.out : "synth.amat";
  fs::path p(out_path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  save_amat(data, out_path);
  nlohmann::json sidecar = run_stamp(cfg);
  sidecar["source"] = data.provenance().source;
  write_text_file(out_path + ".json", sidecar.dump() + "\n");
  return 0;
}

int cmd_oracle(const CommonArgs& args) {
  if (!args.model) {
    throw ConfigError("oracle: --model is required");
  }
  RunConfig cfg = effective_config(args);
  const DeepDga model = load_model(*args.model);

  const double log_z = enumerate_log_z(model);
  const CodeEnumeration codes = enumerate_codes(model);

  const Index d = model.input_dim();
  double max_violation = -std::numeric_limits<double>::infinity();
  Vector x(d);
  for (std::uint64_t pattern = 0; pattern < (1ULL << d); ++pattern) {
    for (Index i = 0; i < d; ++i) {
      x[i] = (pattern >> i) & 1 ? 1.0 : 0.0;
    }
    const double star = std::exp(log_p_star(model, x));
    const double exact = std::exp(log_marginal(codes, x));
    max_violation = std::max(max_violation, star - exact);
  }

  nlohmann::json out = run_stamp(cfg);
  out["log_z_enumerated"] = log_z;
  out["bound_max_violation"] = max_violation;
  out["bound_holds"] = max_violation <= 1e-12;
  out["n_inputs"] = 1ULL << d;
  out["model"] = *args.model;
  std::cout << out.dump() << "\n";
  if (args.out) {
    write_text_file(*args.out, out.dump() + "\n");
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Discrete-code generative autoencoders: train, stack, sample, evaluate"};
  app.require_subcommand(1);

  CommonArgs args;
  Index sample_n = 0;
  int grid_rows = 10, grid_cols = 10, img_h = 0, img_w = 0;
  bool metrics_table = false;

  CLI::App* train = app.add_subcommand("train", "train a shallow model");
  add_common_flags(train, args);
  CLI::App* stack = app.add_subcommand("stack", "greedy deep pretraining");
  add_common_flags(stack, args);
  CLI::App* sample = app.add_subcommand("sample", "ancestral sampling to a PGM grid");
  add_common_flags(sample, args);
  sample->add_option("--n", sample_n, "sample count (default grid size)");
  sample->add_option("--grid-rows", grid_rows, "grid rows");
  sample->add_option("--grid-cols", grid_cols, "grid columns");
  sample->add_option("--img-h", img_h, "image height (default: square)");
  sample->add_option("--img-w", img_w, "image width (default: square)");
  CLI::App* eval = app.add_subcommand("eval", "log-likelihood report");
  add_common_flags(eval, args);
  CLI::App* metrics = app.add_subcommand("metrics", "representation diagnostics");
  add_common_flags(metrics, args);
  metrics->add_flag("--table", metrics_table, "plain-text table instead of JSON");
  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive checks on tiny models");
  add_common_flags(oracle, args);
  Index synth_n = 2000, synth_dx = 12, synth_k = 3;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic binary dataset");
  add_common_flags(synth, args);
  synth->add_option("--n", synth_n, "row count");
  synth->add_option("--d-x", synth_dx, "data width (<= 20)");
  synth->add_option("--k", synth_k, "latent bits (< d-x)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(args);
    if (stack->parsed()) return cmd_stack(args);
    if (sample->parsed())
      return cmd_sample(args, sample_n, grid_rows, grid_cols, img_h, img_w);
    if (eval->parsed()) return cmd_eval(args);
    if (metrics->parsed()) return cmd_metrics(args, metrics_table);
    if (oracle->parsed()) return cmd_oracle(args);
    if (synth->parsed()) return cmd_synth(args, synth_n, synth_dx, synth_k);
  } catch (const Error& e) {
    nlohmann::json err{{"error", {{"type", error_kind(e)}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"type", "internal_error"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dga
