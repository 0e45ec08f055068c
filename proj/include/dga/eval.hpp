#pragma once

#include <string>

#include "dga/stack.hpp"

namespace dga {

/// Uniform mixture of factorized Bernoullis whose centroids are decoder means
/// of prior draws. Centroids are clamped to [1e-6, 1-1e-6] so the density is
/// positive everywhere and importance weights stay finite.
class ProposalMixture {
 public:
  explicit ProposalMixture(Matrix centroids);  // d_x x N

  Index n() const { return centroids_.cols(); }
  Index dim() const { return centroids_.rows(); }
  const Matrix& centroids() const { return centroids_; }

  double log_pdf(const Vector& x) const;
  Vector log_pdf_batch(const Matrix& x) const;
  Vector sample(Rng& rng) const;

 private:
  Matrix centroids_;
  Matrix log_c_, log_1mc_;
};

/// N prior draws decoded to mean vectors (deterministic threshold path for
/// stacked models), used as mixture centroids.
ProposalMixture build_proposal(const DeepDga& m, Index n, Rng& rng);

/// log P*(x) = log P(x | h = f(x)) + log P(h = f(x)) along the deterministic
/// encode path; f is the composed encoder and decoding goes through the
/// threshold path for stacked models.
double log_p_star(const DeepDga& m, const Vector& x);
double log_p_star(const DgaModel& m, const Vector& x);

struct LogPStarParts {
  double reconstruction_ll = 0.0;
  double prior_ll = 0.0;
};
LogPStarParts log_p_star_parts(const DeepDga& m, const Vector& x);

Vector log_p_star_batch(const DeepDga& m, const Matrix& x);
Vector log_p_star_dataset(const DeepDga& m, const BinaryDataset& data);

struct LogZEstimate {
  double log_z = 0.0;
  double std_error = 0.0;  // delta-method error of log_z, from the linear-scale
                           // weight variance
  long samples = 0;
};

/// Importance sampling against the mixture proposal:
/// Z = E_pi[P*(x)/pi(x)], averaged in log space by log-sum-exp.
LogZEstimate estimate_log_z(const DeepDga& m, const ProposalMixture& proposal,
                            long s, Rng& rng);

/// Exhaustive log sum over all 2^d_x inputs of P*(x). Guarded at d_x <= 20.
double enumerate_log_z(const DeepDga& m);

/// Decoder means and prior log-probabilities for every code of the top
/// stage, for exact marginals on tiny models. Guarded at code dim <= 20.
struct CodeEnumeration {
  Matrix code_means;  // d_x x 2^d_h
  Vector log_prior;   // 2^d_h
};
CodeEnumeration enumerate_codes(const DeepDga& m);

/// Exact log sum_h P(x|h) P(h) from a code enumeration.
double log_marginal(const CodeEnumeration& codes, const Vector& x);

/// Convenience wrapper: enumerate_codes once, then log_marginal.
double enumerate_log_p(const DeepDga& m, const Vector& x);

struct Table1Metrics {
  double entropy_bits = 0.0;
  double avg_active_bits = 0.0;
  double offdiag_corr_fro = 0.0;
};

/// Representation diagnostics over a binary dataset: entropy in bits of the
/// factorized fit (alpha = 0, clamped); mean number of 1s per example after
/// flipping each dimension so 0 is the majority value; Frobenius norm of the
/// correlation matrix with its diagonal zeroed (zero-variance dimensions
/// contribute zero by convention).
Table1Metrics table1_metrics(const BinaryDataset& codes);

struct EvalReport {
  double mean_log_p_star_nats = 0.0;
  double mean_log_p_star_bits = 0.0;
  double log_z = 0.0;
  double log_z_std_error = 0.0;
  double mean_log_p_nats = 0.0;  // mean_log_p_star_nats - log_z, exactly
  double mean_log_p_bits = 0.0;
  long n_examples = 0;
  Index n_centroids = 0;
  long n_is_samples = 0;
  std::uint64_t seed = 0;
};

/// Full likelihood report over a dataset: mean log P*(x), importance-sampled
/// log Z, and the normalized mean log P(x).
EvalReport evaluate(const DeepDga& m, const BinaryDataset& data, Index n_centroids,
                    long n_is_samples, std::uint64_t seed);

std::string to_json_string(const EvalReport& r);
std::string to_json_string(const LogZEstimate& e);

}  // namespace dga
