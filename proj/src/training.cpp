#include "dga/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

namespace dga {

double BetaSchedule::at(int epoch) const {
  const double t = ramp_epochs <= 0
                       ? 1.0
                       : std::min(1.0, static_cast<double>(epoch) /
                                           static_cast<double>(ramp_epochs));
  if (shape == BetaShape::Linear) {
    return start + (end - start) * t;
  }
  if (epoch == 0) {
    return start;
  }
  const double floor = std::max(start, 1e-3);
  return floor * std::pow(end / floor, t);
}

void BetaSchedule::validate() const {
  if (start < 0.0 || start > 1.0 || end < 0.0 || end > 1.0) {
    throw ConfigError("BetaSchedule: beta values must lie in [0, 1]");
  }
  if (end < start) {
    throw ConfigError("BetaSchedule: end must be >= start (beta is non-decreasing)");
  }
  if (ramp_epochs < 0) {
    throw ConfigError("BetaSchedule: ramp_epochs must be >= 0");
  }
}

void TrainConfig::validate() const {
  if (minibatch_size <= 0) {
    throw ConfigError("TrainConfig: minibatch_size must be positive");
  }
  if (learning_rate <= 0.0) {
    throw ConfigError("TrainConfig: learning_rate must be positive");
  }
  if (noise_rate < 0.0 || noise_rate > 0.5) {
    throw ConfigError("TrainConfig: noise_rate must lie in [0, 0.5]");
  }
  if (epochs <= 0) {
    throw ConfigError("TrainConfig: epochs must be positive");
  }
  if (prior_decay <= 0.0 || prior_decay > 1.0) {
    throw ConfigError("TrainConfig: prior_decay must be in (0, 1]");
  }
  if (!prior_free && prior_alpha <= 0.0) {
    throw ConfigError(
        "TrainConfig: prior_alpha must be > 0 for training (alpha = 0 is a "
        "diagnostics-only fit)");
  }
  beta.validate();
}

Vector straight_through_delta(const Vector& grad_wrt_f) {
  return grad_wrt_f;
}

Vector salt_and_pepper(const Vector& h, double rate, Rng& rng) {
  if (rate < 0.0 || rate > 0.5) {
    throw ConfigError("salt_and_pepper: rate must lie in [0, 0.5]");
  }
  if (rate == 0.0) {
    return h;
  }
  Vector out = h;
  for (Index i = 0; i < out.size(); ++i) {
    if (rng.uniform01() < rate) {
      out[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
  }
  return out;
}

Matrix salt_and_pepper_batch(const Matrix& h, double rate, Rng& rng) {
  if (rate < 0.0 || rate > 0.5) {
    throw ConfigError("salt_and_pepper: rate must lie in [0, 0.5]");
  }
  if (rate == 0.0) {
    return h;
  }
  Matrix out = h;
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) {
      if (rng.uniform01() < rate) {
        out(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

DgaLossResult dga_loss(const DgaModel& m, const Vector& x, double beta, Rng& rng,
                       double noise_rate) {
  if (beta < 0.0 || beta > 1.0) {
    throw ConfigError("dga_loss: beta must lie in [0, 1]");
  }
  EncoderActivations enc = encode(m, x);
  FactorizedBernoulli snapshot = m.prior.snapshot();
  Vector corrupted = salt_and_pepper(enc.code, noise_rate, rng);

  Mlp::Cache dec_cache;
  Vector means = decode_means_batch(m, corrupted, &dec_cache);

  StepReport report;
  report.reconstruction_nll = bernoulli_nll(x, means);
  report.prior_nll = -snapshot.log_prob(enc.code);
  report.beta = beta;
  report.total_loss = report.reconstruction_nll + beta * report.prior_nll;

  return DgaLossResult{report,          std::move(enc),  std::move(corrupted),
                       std::move(dec_cache), std::move(means), std::move(snapshot)};
}

EpochSummary train_epoch(DgaModel& m, const BinaryDataset& data,
                         const TrainConfig& cfg, int epoch, double learning_rate,
                         Rng& rng) {
  cfg.validate();
  if (data.rows() == 0) {
    throw ConfigError("train_epoch: empty dataset");
  }
  if (data.width() != m.input_dim()) {
    throw ShapeError("train_epoch: dataset width " + std::to_string(data.width()) +
                     " != model input " + std::to_string(m.input_dim()));
  }
  const double beta = cfg.beta.at(epoch);

  std::vector<Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  shuffle(order, rng);

  double sum_recon = 0.0;
  double sum_prior = 0.0;
  double sum_total = 0.0;

  const Index n = data.rows();
  const Index batch = cfg.minibatch_size;
  for (Index begin = 0; begin < n; begin += batch) {
    const Index count = std::min<Index>(batch, n - begin);
    const Matrix x = data.gather_columns(
        std::span<const Index>(order.data() + begin, static_cast<std::size_t>(count)));

    Mlp::Cache enc_cache;
    const Matrix codes = encode_batch(m, x, &enc_cache);

    // Snapshot frozen at minibatch start; this batch's counts only reach
    // later minibatches.
    Vector prior_nll_cols = Vector::Zero(count);
    std::optional<FactorizedBernoulli> snapshot;
    if (!cfg.prior_free) {
      snapshot.emplace(m.prior.snapshot());
      m.prior.update_batch(codes);
      prior_nll_cols = -snapshot->log_prob_batch(codes);
    }

    const Matrix corrupted = salt_and_pepper_batch(codes, cfg.noise_rate, rng);

    Mlp::Cache dec_cache;
    const Matrix means = decode_means_batch(m, corrupted, &dec_cache);
    const Vector recon_nll_cols = bernoulli_nll_batch(x, means);

    m.encoder.zero_grads();
    m.decoder.zero_grads();
    Matrix grad_wrt_code = decoder_backward(m, dec_cache, x);
    if (!cfg.prior_free && beta != 0.0) {
      grad_wrt_code.colwise() +=
          (beta * snapshot->relaxed_cross_entropy_grad()).eval();
    }
    // Straight-through: the gradient on f(x) becomes the pseudo-gradient on
    // the encoder pre-activation unchanged.
    m.encoder.backward(enc_cache, grad_wrt_code);

    const double scale = 1.0 / static_cast<double>(count);
    m.encoder.sgd_step(learning_rate, scale);
    m.decoder.sgd_step(learning_rate, scale);

    sum_recon += recon_nll_cols.sum();
    sum_prior += prior_nll_cols.sum();
    for (Index j = 0; j < count; ++j) {
      sum_total += recon_nll_cols[j] + beta * prior_nll_cols[j];
    }
  }

  EpochSummary summary;
  summary.epoch = epoch;
  summary.reconstruction_nll = sum_recon / static_cast<double>(n);
  summary.prior_nll = sum_prior / static_cast<double>(n);
  summary.total_loss = sum_total / static_cast<double>(n);
  summary.beta = beta;
  summary.learning_rate = learning_rate;
  return summary;
}

double lr_policy(const std::vector<double>& epoch_avg_losses, double lr) {
  const std::size_t k = epoch_avg_losses.size();
  if (k < 2) {
    return lr;
  }
  return epoch_avg_losses[k - 1] > epoch_avg_losses[k - 2] ? lr / 2.0 : lr;
}

TrainLog train(DgaModel& m, const BinaryDataset& data, const TrainConfig& cfg,
               Rng& rng, std::ostream* progress) {
  cfg.validate();
  TrainLog log;
  double lr = cfg.learning_rate;
  std::vector<double> loss_history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochSummary s = train_epoch(m, data, cfg, epoch, lr, rng);
    loss_history.push_back(s.total_loss);
    // Halving compares like with like: while beta is still ramping the
    // objective itself moves, so a cost increase says nothing about the
    // step size. Only consult the policy across equal-beta epochs.
    if (cfg.lr_halving && epoch > 0 && cfg.beta.at(epoch) == cfg.beta.at(epoch - 1)) {
      lr = lr_policy(loss_history, lr);
    }
    if (progress) {
      *progress << "{\"epoch\":" << s.epoch << ",\"recon_nll\":" << s.reconstruction_nll
                << ",\"prior_nll\":" << s.prior_nll << ",\"beta\":" << s.beta
                << ",\"lr\":" << s.learning_rate << "}\n";
    }
    log.epochs.push_back(s);
  }
  log.final_learning_rate = lr;
  return log;
}

DgaModel train_dga(const BinaryDataset& data, const ModelShape& shape,
                   const TrainConfig& cfg, std::ostream* progress, TrainLog* log_out) {
  cfg.validate();
  Rng rng(cfg.seed);
  DgaModel m = make_dga(shape, rng, cfg.prior_alpha, cfg.prior_decay);
  TrainLog log = train(m, data, cfg, rng, progress);
  if (log_out) {
    *log_out = std::move(log);
  }
  return m;
}

double reconstruction_nll(const DgaModel& m, const BinaryDataset& data) {
  if (data.rows() == 0) {
    throw ConfigError("reconstruction_nll: empty dataset");
  }
  const Matrix x = data.to_matrix();
  const Matrix codes = encode_batch(m, x);
  const Matrix means = decode_means_batch(m, codes);
  return bernoulli_nll_batch(x, means).mean();
}

}  // namespace dga
