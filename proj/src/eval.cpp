#include "dga/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"

namespace dga {

namespace {

constexpr double kCentroidClamp = 1e-6;
constexpr Index kEnumLimit = 20;
constexpr Index kEvalChunk = 2048;

Vector bits_of(std::uint64_t pattern, Index dim) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = (pattern >> i) & 1 ? 1.0 : 0.0;
  }
  return v;
}

}  // namespace

ProposalMixture::ProposalMixture(Matrix centroids)
    : centroids_(std::move(centroids)) {
  if (centroids_.cols() < 1 || centroids_.rows() < 1) {
    throw ConfigError("ProposalMixture: need at least one centroid");
  }
  centroids_ = centroids_.array().min(1.0 - kCentroidClamp).max(kCentroidClamp);
  log_c_ = centroids_.array().log();
  log_1mc_ = (1.0 - centroids_.array()).log();
}

double ProposalMixture::log_pdf(const Vector& x) const {
  if (x.size() != dim()) {
    throw ShapeError("ProposalMixture::log_pdf: input length " +
                     std::to_string(x.size()) + " != " + std::to_string(dim()));
  }
  // log (1/N) sum_j exp(sum_i x_i log c_ij + (1-x_i) log(1-c_ij))
  const Vector per_centroid =
      log_c_.transpose() * x + log_1mc_.transpose() * (1.0 - x.array()).matrix();
  return log_sum_exp(per_centroid) - std::log(static_cast<double>(n()));
}

Vector ProposalMixture::log_pdf_batch(const Matrix& x) const {
  if (x.rows() != dim()) {
    throw ShapeError("ProposalMixture::log_pdf_batch: input rows " +
                     std::to_string(x.rows()) + " != " + std::to_string(dim()));
  }
  const Matrix per_centroid =
      log_c_.transpose() * x + log_1mc_.transpose() * (1.0 - x.array()).matrix();
  Vector out(x.cols());
  const double log_n = std::log(static_cast<double>(n()));
  for (Index j = 0; j < x.cols(); ++j) {
    out[j] = log_sum_exp(per_centroid.col(j)) - log_n;
  }
  return out;
}

Vector ProposalMixture::sample(Rng& rng) const {
  const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n())));
  Vector x(dim());
  for (Index i = 0; i < dim(); ++i) {
    x[i] = rng.bernoulli(centroids_(i, j)) ? 1.0 : 0.0;
  }
  return x;
}

ProposalMixture build_proposal(const DeepDga& m, Index n, Rng& rng) {
  m.validate();
  if (n < 1) {
    throw ConfigError("build_proposal: need n >= 1 centroids");
  }
  const FactorizedBernoulli top = m.stages.back().prior.snapshot();
  Matrix codes(top.dim(), n);
  for (Index j = 0; j < n; ++j) {
    codes.col(j) = top.sample(rng);
  }
  return ProposalMixture(decode_path_means_batch(m, codes));
}

LogPStarParts log_p_star_parts(const DeepDga& m, const Vector& x) {
  m.validate();
  if (x.size() != m.input_dim()) {
    throw ShapeError("log_p_star: input length " + std::to_string(x.size()) +
                     " != " + std::to_string(m.input_dim()));
  }
  const Vector h = compose_encode(m, x);
  const Vector means = decode_path_means(m, h);
  LogPStarParts parts;
  parts.reconstruction_ll = -bernoulli_nll(x, means);
  parts.prior_ll = m.stages.back().prior.snapshot().log_prob(h);
  return parts;
}

double log_p_star(const DeepDga& m, const Vector& x) {
  const LogPStarParts parts = log_p_star_parts(m, x);
  return parts.reconstruction_ll + parts.prior_ll;
}

double log_p_star(const DgaModel& m, const Vector& x) {
  DeepDga d;
  d.stages.push_back(m);
  return log_p_star(d, x);
}

Vector log_p_star_batch(const DeepDga& m, const Matrix& x) {
  const Matrix h = compose_encode_batch(m, x);
  const Matrix means = decode_path_means_batch(m, h);
  const FactorizedBernoulli top = m.stages.back().prior.snapshot();
  return -bernoulli_nll_batch(x, means) + top.log_prob_batch(h);
}

Vector log_p_star_dataset(const DeepDga& m, const BinaryDataset& data) {
  m.validate();
  Vector out(data.rows());
  std::vector<Index> idx;
  for (Index begin = 0; begin < data.rows(); begin += kEvalChunk) {
    const Index count = std::min<Index>(kEvalChunk, data.rows() - begin);
    idx.resize(static_cast<std::size_t>(count));
    for (Index j = 0; j < count; ++j) {
      idx[static_cast<std::size_t>(j)] = begin + j;
    }
    out.segment(begin, count) = log_p_star_batch(m, data.gather_columns(idx));
  }
  return out;
}

LogZEstimate estimate_log_z(const DeepDga& m, const ProposalMixture& proposal,
                            long s, Rng& rng) {
  m.validate();
  if (s < 2) {
    throw ConfigError("estimate_log_z: need at least 2 samples");
  }
  if (proposal.dim() != m.input_dim()) {
    throw ShapeError("estimate_log_z: proposal dimension " +
                     std::to_string(proposal.dim()) + " != model input " +
                     std::to_string(m.input_dim()));
  }

  Vector log_w(s);
  Matrix chunk(proposal.dim(), kEvalChunk);
  long done = 0;
  while (done < s) {
    const Index count = static_cast<Index>(std::min<long>(kEvalChunk, s - done));
    for (Index j = 0; j < count; ++j) {
      chunk.col(j) = proposal.sample(rng);
    }
    const auto block = chunk.leftCols(count);
    log_w.segment(done, count) =
        log_p_star_batch(m, block) - proposal.log_pdf_batch(block);
    done += count;
  }

  // Stable mean and variance of the linear-scale weights via a max shift;
  // the shift cancels in the relative error, which is what the log-scale
  // standard error needs.
  const double shift = log_w.maxCoeff();
  const Vector u = (log_w.array() - shift).exp();
  const double mean_u = u.mean();
  const double var_u =
      (u.array() - mean_u).square().sum() / static_cast<double>(s - 1);
  const double se_u = std::sqrt(var_u / static_cast<double>(s));

  LogZEstimate est;
  est.log_z = shift + std::log(mean_u);
  est.std_error = se_u / mean_u;
  est.samples = s;
  return est;
}

double enumerate_log_z(const DeepDga& m) {
  m.validate();
  const Index d = m.input_dim();
  if (d > kEnumLimit) {
    throw ConfigError("enumerate_log_z: input dimension " + std::to_string(d) +
                      " exceeds the exhaustive limit " + std::to_string(kEnumLimit));
  }
  const std::uint64_t total = 1ULL << d;
  double acc = -std::numeric_limits<double>::infinity();
  Matrix chunk(d, kEvalChunk);
  std::uint64_t pattern = 0;
  while (pattern < total) {
    const Index count =
        static_cast<Index>(std::min<std::uint64_t>(kEvalChunk, total - pattern));
    for (Index j = 0; j < count; ++j) {
      chunk.col(j) = bits_of(pattern + static_cast<std::uint64_t>(j), d);
    }
    const Vector lp = log_p_star_batch(m, chunk.leftCols(count));
    const double chunk_lse = log_sum_exp(lp);
    const double hi = std::max(acc, chunk_lse);
    acc = hi + std::log(std::exp(acc - hi) + std::exp(chunk_lse - hi));
    pattern += static_cast<std::uint64_t>(count);
  }
  return acc;
}

CodeEnumeration enumerate_codes(const DeepDga& m) {
  m.validate();
  const Index d_h = m.code_dim();
  if (d_h > kEnumLimit) {
    throw ConfigError("enumerate_codes: code dimension " + std::to_string(d_h) +
                      " exceeds the exhaustive limit " + std::to_string(kEnumLimit));
  }
  const Index total = static_cast<Index>(1ULL << d_h);
  Matrix codes(d_h, total);
  for (Index j = 0; j < total; ++j) {
    codes.col(j) = bits_of(static_cast<std::uint64_t>(j), d_h);
  }
  CodeEnumeration out;
  out.code_means = decode_path_means_batch(m, codes);
  out.log_prior = m.stages.back().prior.snapshot().log_prob_batch(codes);
  return out;
}

double log_marginal(const CodeEnumeration& codes, const Vector& x) {
  if (x.size() != codes.code_means.rows()) {
    throw ShapeError("log_marginal: input length " + std::to_string(x.size()) +
                     " != " + std::to_string(codes.code_means.rows()));
  }
  Matrix xm(x.size(), 1);
  xm.col(0) = x;
  Vector terms(codes.log_prior.size());
  const Matrix x_rep = xm.replicate(1, codes.log_prior.size());
  terms = -bernoulli_nll_batch(x_rep, codes.code_means) + codes.log_prior;
  return log_sum_exp(terms);
}

double enumerate_log_p(const DeepDga& m, const Vector& x) {
  return log_marginal(enumerate_codes(m), x);
}

Table1Metrics table1_metrics(const BinaryDataset& codes) {
  if (codes.rows() == 0) {
    throw ConfigError("table1_metrics: empty dataset");
  }
  const Matrix x = codes.to_matrix();  // d x n
  const double n = static_cast<double>(x.cols());
  const Vector q = x.rowwise().mean();

  PriorCounter counter(codes.width(), /*alpha=*/0.0);
  counter.update_batch(x);
  Table1Metrics out;
  out.entropy_bits = counter.snapshot().entropy_bits();

  // Flip so 0 is the majority value, then the mean count of 1s per example
  // is the sum of min(q, 1-q).
  out.avg_active_bits = q.array().min(1.0 - q.array()).sum();

  const Matrix centered = x.colwise() - q;
  Matrix cov = (centered * centered.transpose()) / n;
  Vector sd = cov.diagonal().array().sqrt();
  // Zero-variance dimensions contribute zero correlation by convention.
  Vector inv_sd = (sd.array() > 0.0).select(sd.array().inverse(), 0.0);
  Matrix corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  corr.diagonal().setZero();
  out.offdiag_corr_fro = corr.norm();
  return out;
}

EvalReport evaluate(const DeepDga& m, const BinaryDataset& data, Index n_centroids,
                    long n_is_samples, std::uint64_t seed) {
  m.validate();
  if (data.rows() == 0) {
    throw ConfigError("evaluate: empty dataset");
  }
  Rng rng(seed);
  const Vector log_star = log_p_star_dataset(m, data);
  const ProposalMixture proposal = build_proposal(m, n_centroids, rng);
  const LogZEstimate z = estimate_log_z(m, proposal, n_is_samples, rng);

  EvalReport r;
  r.mean_log_p_star_nats = log_star.mean();
  r.mean_log_p_star_bits = r.mean_log_p_star_nats / std::numbers::ln2;
  r.log_z = z.log_z;
  r.log_z_std_error = z.std_error;
  r.mean_log_p_nats = r.mean_log_p_star_nats - r.log_z;
  r.mean_log_p_bits = r.mean_log_p_nats / std::numbers::ln2;
  r.n_examples = data.rows();
  r.n_centroids = n_centroids;
  r.n_is_samples = n_is_samples;
  r.seed = seed;
  return r;
}

std::string to_json_string(const EvalReport& r) {
  nlohmann::json j{{"mean_log_p_star_nats", r.mean_log_p_star_nats},
                   {"mean_log_p_star_bits", r.mean_log_p_star_bits},
                   {"log_z", r.log_z},
                   {"log_z_std_error", r.log_z_std_error},
                   {"mean_log_p_nats", r.mean_log_p_nats},
                   {"mean_log_p_bits", r.mean_log_p_bits},
                   {"n_examples", r.n_examples},
                   {"n_centroids", r.n_centroids},
                   {"n_is_samples", r.n_is_samples},
                   {"seed", r.seed}};
  return j.dump();
}

std::string to_json_string(const LogZEstimate& e) {
  nlohmann::json j{
      {"log_z", e.log_z}, {"std_error", e.std_error}, {"samples", e.samples}};
  return j.dump();
}

}  // namespace dga
