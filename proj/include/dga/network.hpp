#pragma once

#include <string>
#include <vector>

#include "dga/numerics.hpp"
#include "dga/prior.hpp"
#include "dga/rng.hpp"

namespace dga {

enum class Activation { Tanh, Sigmoid, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
  Matrix w;  // out x in
  Vector b;
  Activation act = Activation::Identity;
  // gradient accumulators, same shapes as w and b
  Matrix gw;
  Vector gb;
};

/// Feedforward network with manual backprop. Batch matrices hold one example
/// per column.
class Mlp {
 public:
  Mlp() = default;

  /// sizes = {in, h1, ..., out}, one activation per affine layer. Weights are
  /// Glorot-uniform, +-sqrt(6 / (fan_in + fan_out)), drawn coefficient-wise in
  /// column-major order; biases are zero. Throws ConfigError on a zero-sized
  /// layer.
  static Mlp init(const std::vector<Index>& sizes,
                  const std::vector<Activation>& acts, Rng& rng);

  /// Per-layer activations cached by forward() for a later backward().
  struct Cache {
    Matrix input;
    std::vector<Matrix> post;
    bool valid = false;
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

  /// Backprop from a gradient on the top pre-activation. Accumulates into the
  /// layer gradient buffers and returns the gradient with respect to the
  /// input. Throws StateError when the cache does not come from forward().
  Matrix backward(const Cache& cache, const Matrix& delta_top);

  void zero_grads();

  /// w -= lr * scale * gw; scale folds in minibatch averaging.
  void sgd_step(double lr, double scale = 1.0);

  Index input_dim() const { return layers_.front().w.cols(); }
  Index output_dim() const { return layers_.back().w.rows(); }
  Index layer_count() const { return static_cast<Index>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t param_count() const;

 private:
  std::vector<Layer> layers_;
};

/// Shape of one DGA: encoder input_dim -> code_dim with the given hidden
/// widths (tanh), decoder code_dim -> input_dim likewise.
struct ModelShape {
  Index input_dim = 0;
  Index code_dim = 0;
  std::vector<Index> encoder_hidden;
  std::vector<Index> decoder_hidden;
};

/// Discrete-code autoencoder: deterministic encoder (identity top activation,
/// output thresholded at zero), probabilistic decoder (sigmoid means), and a
/// running Bernoulli prior over the codes.
struct DgaModel {
  Mlp encoder;
  Mlp decoder;
  PriorCounter prior;

  Index input_dim() const { return encoder.input_dim(); }
  Index code_dim() const { return encoder.output_dim(); }

  /// Checks the encoder/decoder/prior dimension chain; ConfigError on break.
  void validate() const;
};

DgaModel make_dga(const ModelShape& shape, Rng& rng, double prior_alpha = 1.0,
                  double prior_decay = 1.0);

/// Forward pass of the encoder on one example, with everything the
/// straight-through backward pass needs.
struct EncoderActivations {
  Mlp::Cache cache;
  Vector preactivation;  // a(x)
  Vector code;           // h; h_i = 1 exactly when a_i > 0
};

EncoderActivations encode(const DgaModel& m, const Vector& x);

/// Batched encode; returns codes (code_dim x n). The cache, when given, feeds
/// Mlp::backward.
Matrix encode_batch(const DgaModel& m, const Matrix& x, Mlp::Cache* cache = nullptr);

Vector decode_means(const DgaModel& m, const Vector& h);
Matrix decode_means_batch(const DgaModel& m, const Matrix& h,
                          Mlp::Cache* cache = nullptr);

/// Reconstruction cross-entropy -sum_j [x_j log m_j + (1-x_j) log(1-m_j)],
/// with means clamped to [1e-7, 1-1e-7] so saturation cannot produce inf.
double bernoulli_nll(const Vector& x, const Vector& means);

/// Column-wise version of bernoulli_nll for batches.
Vector bernoulli_nll_batch(const Matrix& x, const Matrix& means);

/// Gradients of the summed reconstruction cross-entropy for targets x, given
/// the cached decoder forward pass. Accumulates into the decoder's gradient
/// buffers and returns d loss / d h (h treated as continuous). The top delta
/// uses the stable (means - target) form, unaffected by clamping.
Matrix decoder_backward(DgaModel& m, const Mlp::Cache& cache, const Matrix& x);

}  // namespace dga
