#include "dga/prior.hpp"

#include <cmath>
#include <numbers>

namespace dga {

namespace {

constexpr double kClampEps = 1e-6;

void check_dim(Index expected, Index actual, const char* where) {
  if (expected != actual) {
    throw ShapeError(std::string(where) + ": expected length " +
                     std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

void check_binary(const Vector& h, const char* where) {
  if (!((h.array() == 0.0) || (h.array() == 1.0)).all()) {
    throw DomainError(std::string(where) + ": entries must be 0 or 1");
  }
}

}  // namespace

FactorizedBernoulli::FactorizedBernoulli(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) {
    throw ConfigError("FactorizedBernoulli: zero dimensions");
  }
  if (!((probs_.array() > 0.0) && (probs_.array() < 1.0)).all()) {
    throw DomainError("FactorizedBernoulli: probabilities must lie strictly in (0,1)");
  }
  log_p_ = probs_.array().log();
  log_1mp_ = (1.0 - probs_.array()).log();
  log_odds_against_ = log_1mp_ - log_p_;
}

double FactorizedBernoulli::log_prob(const Vector& h) const {
  check_dim(dim(), h.size(), "FactorizedBernoulli::log_prob");
  return h.dot(log_p_) + (1.0 - h.array()).matrix().dot(log_1mp_);
}

Vector FactorizedBernoulli::log_prob_batch(const Matrix& h) const {
  check_dim(dim(), h.rows(), "FactorizedBernoulli::log_prob_batch");
  return (h.transpose() * log_p_) +
         ((1.0 - h.array()).matrix().transpose() * log_1mp_);
}

Vector FactorizedBernoulli::relaxed_cross_entropy_grad(const Vector& f) const {
  check_dim(dim(), f.size(), "FactorizedBernoulli::relaxed_cross_entropy_grad");
  return log_odds_against_;
}

Vector FactorizedBernoulli::sample(Rng& rng) const {
  Vector out(dim());
  for (Index i = 0; i < dim(); ++i) {
    out[i] = rng.bernoulli(probs_[i]) ? 1.0 : 0.0;
  }
  return out;
}

double FactorizedBernoulli::entropy_bits() const {
  const auto p = probs_.array();
  return -(p * p.log() + (1.0 - p) * (1.0 - p).log()).sum() / std::numbers::ln2;
}

PriorCounter::PriorCounter(Index dim, double alpha, double decay)
    : ones_(Vector::Zero(dim)), alpha_(alpha), decay_(decay) {
  if (dim <= 0) {
    throw ConfigError("PriorCounter: dim must be positive");
  }
  if (alpha < 0.0) {
    throw ConfigError("PriorCounter: alpha must be >= 0");
  }
  if (decay <= 0.0 || decay > 1.0) {
    throw ConfigError("PriorCounter: decay must be in (0, 1]");
  }
}

void PriorCounter::update(const Vector& h) {
  check_dim(dim(), h.size(), "PriorCounter::update");
  check_binary(h, "PriorCounter::update");
  if (decay_ != 1.0) {
    ones_ *= decay_;
    total_ *= decay_;
  }
  ones_ += h;
  total_ += 1.0;
}

void PriorCounter::update_batch(const Matrix& h) {
  check_dim(dim(), h.rows(), "PriorCounter::update_batch");
  if (decay_ == 1.0) {
    ones_ += h.rowwise().sum();
    total_ += static_cast<double>(h.cols());
  } else {
    for (Index j = 0; j < h.cols(); ++j) {
      ones_ *= decay_;
      total_ *= decay_;
      ones_ += h.col(j);
      total_ += 1.0;
    }
  }
}

void PriorCounter::merge(const PriorCounter& other) {
  check_dim(dim(), other.dim(), "PriorCounter::merge");
  ones_ += other.ones_;
  total_ += other.total_;
}

FactorizedBernoulli PriorCounter::snapshot() const {
  if (alpha_ > 0.0) {
    return FactorizedBernoulli((ones_.array() + alpha_) / (total_ + 2.0 * alpha_));
  }
  if (total_ == 0.0) {
    throw StateError("PriorCounter::snapshot: no observations and alpha = 0");
  }
  return FactorizedBernoulli(
      (ones_.array() / total_).min(1.0 - kClampEps).max(kClampEps));
}

PriorCounter PriorCounter::restore(Vector ones, double total, double alpha,
                                   double decay) {
  PriorCounter c(ones.size(), alpha, decay);
  c.ones_ = std::move(ones);
  c.total_ = total;
  return c;
}

}  // namespace dga
