#pragma once

#include "dga/numerics.hpp"
#include "dga/rng.hpp"

namespace dga {

/// Product of independent Bernoulli dimensions. This is both the code prior
/// P(h) and the decoder's output family over pixels.
///
/// Immutable after construction; every probability is strictly inside (0,1)
/// so log_prob is always finite.
class FactorizedBernoulli {
 public:
  explicit FactorizedBernoulli(Vector probs);

  Index dim() const { return probs_.size(); }
  const Vector& probs() const { return probs_; }

  /// sum_i [h_i log p_i + (1 - h_i) log(1 - p_i)]
  double log_prob(const Vector& h) const;

  /// Same quantity for every column of a batch (dim x n).
  Vector log_prob_batch(const Matrix& h) const;

  /// Gradient of the relaxed cross-entropy
  ///   -sum_i [f_i log p_i + (1 - f_i) log(1 - p_i)]
  /// with respect to f. The loss is linear in f, so component i is
  /// log((1 - p_i) / p_i) regardless of the f values; the argument is only
  /// length-checked.
  Vector relaxed_cross_entropy_grad(const Vector& f) const;

  /// The same gradient vector without a carrier argument.
  const Vector& relaxed_cross_entropy_grad() const { return log_odds_against_; }

  /// Independent Bernoulli draw per dimension.
  Vector sample(Rng& rng) const;

  /// sum_i of the binary entropy of p_i, in bits.
  double entropy_bits() const;

 private:
  Vector probs_;
  Vector log_p_, log_1mp_;
  Vector log_odds_against_;
};

/// Running 0/1 frequency counts over code vectors, smoothed at snapshot time.
///
/// snapshot() returns (ones + alpha) / (total + 2 alpha) for alpha > 0. With
/// alpha = 0 the raw frequencies are clamped to [1e-6, 1 - 1e-6]; that mode
/// is meant for diagnostics fits, not training. decay < 1 turns the counts
/// into an exponential moving estimate so the prior can track an encoder
/// that is still moving.
class PriorCounter {
 public:
  explicit PriorCounter(Index dim, double alpha = 1.0, double decay = 1.0);

  void update(const Vector& h);

  /// Counts every column of a batch (dim x n), in column order.
  void update_batch(const Matrix& h);

  /// Adds another counter's observations. Commutative.
  void merge(const PriorCounter& other);

  FactorizedBernoulli snapshot() const;

  Index dim() const { return ones_.size(); }
  double total() const { return total_; }
  const Vector& ones() const { return ones_; }
  double alpha() const { return alpha_; }
  double decay() const { return decay_; }

  /// Rebuilds a counter from persisted state.
  static PriorCounter restore(Vector ones, double total, double alpha, double decay);

 private:
  Vector ones_;
  double total_ = 0.0;
  double alpha_ = 1.0;
  double decay_ = 1.0;
};

}  // namespace dga
