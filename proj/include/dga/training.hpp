#pragma once

#include <iosfwd>
#include <vector>

#include "dga/dataset.hpp"
#include "dga/network.hpp"

namespace dga {

enum class BetaShape { Linear, Geometric };

/// Ramp for the prior-term weight over epochs.
///
/// Linear: beta(k) = start + (end - start) * min(1, k / ramp_epochs).
/// Geometric interpolates in log space from max(start, 1e-3) to end, with
/// beta(0) pinned to start so a zero start stays exact. Both shapes are
/// non-decreasing and reach end at ramp_epochs.
struct BetaSchedule {
  double start = 0.0;
  double end = 1.0;
  int ramp_epochs = 1;
  BetaShape shape = BetaShape::Linear;

  double at(int epoch) const;
  void validate() const;
};

struct TrainConfig {
  int minibatch_size = 100;
  double learning_rate = 1.0;  // sensible picks are 10.0, 1.0 or 0.1
  bool lr_halving = true;
  BetaSchedule beta;
  double noise_rate = 0.01;
  int epochs = 1;
  std::uint64_t seed = 0;
  double prior_alpha = 1.0;
  double prior_decay = 1.0;
  /// Plain autoencoder path: no prior counting, no prior loss, no prior
  /// gradient. Exists so the beta = 0 trajectory has a reference to match.
  bool prior_free = false;

  void validate() const;
};

struct StepReport {
  int epoch = 0;
  int minibatch = 0;
  double reconstruction_nll = 0.0;
  double prior_nll = 0.0;
  double beta = 0.0;
  double total_loss = 0.0;  // reconstruction_nll + beta * prior_nll
};

struct EpochSummary {
  int epoch = 0;
  double reconstruction_nll = 0.0;
  double prior_nll = 0.0;
  double total_loss = 0.0;
  double beta = 0.0;
  double learning_rate = 0.0;
};

/// Everything dga_loss computed, for callers that keep going (backprop,
/// inspection, tests).
struct DgaLossResult {
  StepReport report;
  EncoderActivations enc;
  Vector corrupted_code;
  Mlp::Cache decoder_cache;
  Vector means;
  FactorizedBernoulli prior_snapshot;
};

/// Encodes x, corrupts the code with salt-and-pepper noise, decodes, and
/// evaluates reconstruction + beta * prior cross-entropy (the prior term on
/// the clean code, under the current prior snapshot). Does not update the
/// prior counter.
DgaLossResult dga_loss(const DgaModel& m, const Vector& x, double beta, Rng& rng,
                       double noise_rate = 0.01);

/// The straight-through rule: the pseudo-gradient on the encoder
/// pre-activation a is the gradient with respect to f(x), unchanged.
Vector straight_through_delta(const Vector& grad_wrt_f);

/// Each bit is selected with probability rate and replaced by a fair coin
/// flip, so a selected bit keeps its value half the time. rate = 0 returns
/// the input without consuming randomness. Training-time only; never applied
/// in evaluation or sampling.
Vector salt_and_pepper(const Vector& h, double rate, Rng& rng);

/// Column-wise salt_and_pepper, consuming draws in column order.
Matrix salt_and_pepper_batch(const Matrix& h, double rate, Rng& rng);

/// One pass over shuffled minibatches: encode, count codes into the prior,
/// corrupt, decode, decoder gradient step and straight-through encoder step,
/// gradients averaged per minibatch. The prior snapshot used by the loss is
/// frozen at each minibatch start.
EpochSummary train_epoch(DgaModel& m, const BinaryDataset& data,
                         const TrainConfig& cfg, int epoch, double learning_rate,
                         Rng& rng);

/// lr/2 when the last epoch's average loss strictly exceeded the previous
/// one's, else lr unchanged.
double lr_policy(const std::vector<double>& epoch_avg_losses, double lr);

struct TrainLog {
  std::vector<EpochSummary> epochs;
  double final_learning_rate = 0.0;
};

/// Full loop over cfg.epochs with the beta schedule and learning-rate
/// halving. When progress is given, one JSON line per epoch is written to it
/// (keys: epoch, recon_nll, prior_nll, beta, lr).
TrainLog train(DgaModel& m, const BinaryDataset& data, const TrainConfig& cfg,
               Rng& rng, std::ostream* progress = nullptr);

/// Builds the model from cfg.seed and trains it; initialization and training
/// consume one generator, so a seed pins the whole trajectory.
DgaModel train_dga(const BinaryDataset& data, const ModelShape& shape,
                   const TrainConfig& cfg, std::ostream* progress = nullptr,
                   TrainLog* log_out = nullptr);

/// Mean clean reconstruction NLL (nats/example): no corruption, no updates.
double reconstruction_nll(const DgaModel& m, const BinaryDataset& data);

}  // namespace dga
