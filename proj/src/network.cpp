#include "dga/network.hpp"

#include <cmath>

namespace dga {

namespace {

constexpr double kMeanClamp = 1e-7;
// Forward-value clamp keeping sigmoid outputs away from the exact 0.0/1.0
// they round to under saturation. Backward passes use the raw cache, so
// gradients keep the (mean - target) form.
constexpr double kRangeClamp = 1e-12;

Matrix apply_activation(Activation act, Matrix z) {
  switch (act) {
    case Activation::Tanh:
      return z.array().tanh().matrix();
    case Activation::Sigmoid:
      return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::Identity:
      return z;
  }
  throw ConfigError("unknown activation");
}

// act'(z) expressed through the post-activation value.
Matrix activation_deriv_from_post(Activation act, const Matrix& post) {
  switch (act) {
    case Activation::Tanh:
      return (1.0 - post.array().square()).matrix();
    case Activation::Sigmoid:
      return (post.array() * (1.0 - post.array())).matrix();
    case Activation::Identity:
      return Matrix::Ones(post.rows(), post.cols());
  }
  throw ConfigError("unknown activation");
}

void check_input_dim(Index expected, Index actual, const char* where) {
  if (expected != actual) {
    throw ShapeError(std::string(where) + ": expected input of length " +
                     std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Identity:
      return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation: " + s);
}

Mlp Mlp::init(const std::vector<Index>& sizes, const std::vector<Activation>& acts,
              Rng& rng) {
  if (sizes.size() < 2) {
    throw ConfigError("Mlp::init: need at least one layer");
  }
  if (acts.size() != sizes.size() - 1) {
    throw ConfigError("Mlp::init: one activation per affine layer required");
  }
  for (Index s : sizes) {
    if (s <= 0) {
      throw ConfigError("Mlp::init: zero-size layer");
    }
  }
  Mlp net;
  net.layers_.reserve(acts.size());
  for (std::size_t k = 0; k < acts.size(); ++k) {
    const Index fan_in = sizes[k];
    const Index fan_out = sizes[k + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Layer layer;
    layer.w = Matrix(fan_out, fan_in);
    for (Index j = 0; j < fan_in; ++j) {
      for (Index i = 0; i < fan_out; ++i) {
        layer.w(i, j) = rng.uniform(-r, r);
      }
    }
    layer.b = Vector::Zero(fan_out);
    layer.act = acts[k];
    layer.gw = Matrix::Zero(fan_out, fan_in);
    layer.gb = Vector::Zero(fan_out);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  check_input_dim(input_dim(), x.rows(), "Mlp::forward");
  if (cache) {
    cache->input = x;
    cache->post.clear();
    cache->post.reserve(layers_.size());
  }
  Matrix a = x;
  for (const Layer& layer : layers_) {
    Matrix z = layer.w * a;
    z.colwise() += layer.b;
    a = apply_activation(layer.act, std::move(z));
    if (cache) {
      cache->post.push_back(a);
    }
  }
  if (cache) {
    cache->valid = true;
  }
  return a;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& delta_top) {
  if (!cache.valid || cache.post.size() != layers_.size()) {
    throw StateError("Mlp::backward: no matching forward pass cached");
  }
  if (delta_top.rows() != output_dim() || delta_top.cols() != cache.input.cols()) {
    throw ShapeError("Mlp::backward: delta shape " +
                     shape_str(delta_top.rows(), delta_top.cols()) +
                     " does not match top layer " +
                     shape_str(output_dim(), cache.input.cols()));
  }
  Matrix delta = delta_top;  // gradient on the current layer's pre-activation
  for (Index k = layer_count() - 1; k >= 0; --k) {
    Layer& layer = layers_[static_cast<std::size_t>(k)];
    const Matrix& below = k == 0 ? cache.input : cache.post[static_cast<std::size_t>(k - 1)];
    layer.gw.noalias() += delta * below.transpose();
    layer.gb += delta.rowwise().sum();
    Matrix grad_below = layer.w.transpose() * delta;
    if (k == 0) {
      return grad_below;
    }
    const Layer& prev = layers_[static_cast<std::size_t>(k - 1)];
    delta = grad_below.cwiseProduct(activation_deriv_from_post(prev.act, below));
  }
  return {};  // unreachable
}

void Mlp::zero_grads() {
  for (Layer& layer : layers_) {
    layer.gw.setZero();
    layer.gb.setZero();
  }
}

void Mlp::sgd_step(double lr, double scale) {
  const double step = lr * scale;
  for (Layer& layer : layers_) {
    layer.w -= step * layer.gw;
    layer.b -= step * layer.gb;
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) {
    n += static_cast<std::size_t>(layer.w.size() + layer.b.size());
  }
  return n;
}

void DgaModel::validate() const {
  if (encoder.layer_count() == 0 || decoder.layer_count() == 0) {
    throw ConfigError("DgaModel: empty encoder or decoder");
  }
  if (encoder.output_dim() != decoder.input_dim()) {
    throw ConfigError("DgaModel: encoder output " +
                      std::to_string(encoder.output_dim()) +
                      " != decoder input " + std::to_string(decoder.input_dim()));
  }
  if (encoder.input_dim() != decoder.output_dim()) {
    throw ConfigError("DgaModel: encoder input " +
                      std::to_string(encoder.input_dim()) +
                      " != decoder output " + std::to_string(decoder.output_dim()));
  }
  if (prior.dim() != encoder.output_dim()) {
    throw ConfigError("DgaModel: prior dimension " + std::to_string(prior.dim()) +
                      " != code dimension " + std::to_string(encoder.output_dim()));
  }
}

DgaModel make_dga(const ModelShape& shape, Rng& rng, double prior_alpha,
                  double prior_decay) {
  if (shape.input_dim <= 0 || shape.code_dim <= 0) {
    throw ConfigError("make_dga: input_dim and code_dim must be positive");
  }
  std::vector<Index> enc_sizes{shape.input_dim};
  enc_sizes.insert(enc_sizes.end(), shape.encoder_hidden.begin(),
                   shape.encoder_hidden.end());
  enc_sizes.push_back(shape.code_dim);
  std::vector<Activation> enc_acts(enc_sizes.size() - 2, Activation::Tanh);
  enc_acts.push_back(Activation::Identity);

  std::vector<Index> dec_sizes{shape.code_dim};
  dec_sizes.insert(dec_sizes.end(), shape.decoder_hidden.begin(),
                   shape.decoder_hidden.end());
  dec_sizes.push_back(shape.input_dim);
  std::vector<Activation> dec_acts(dec_sizes.size() - 2, Activation::Tanh);
  dec_acts.push_back(Activation::Sigmoid);

  DgaModel m{Mlp::init(enc_sizes, enc_acts, rng), Mlp::init(dec_sizes, dec_acts, rng),
             PriorCounter(shape.code_dim, prior_alpha, prior_decay)};
  m.validate();
  return m;
}

EncoderActivations encode(const DgaModel& m, const Vector& x) {
  check_input_dim(m.input_dim(), x.size(), "encode");
  if (!((x.array() == 0.0) || (x.array() == 1.0)).all()) {
    throw DomainError("encode: input entries must be 0 or 1");
  }
  EncoderActivations out;
  out.preactivation = m.encoder.forward(x, &out.cache);
  out.code = (out.preactivation.array() > 0.0).cast<double>();
  return out;
}

Matrix encode_batch(const DgaModel& m, const Matrix& x, Mlp::Cache* cache) {
  return (m.encoder.forward(x, cache).array() > 0.0).cast<double>();
}

Vector decode_means(const DgaModel& m, const Vector& h) {
  check_input_dim(m.code_dim(), h.size(), "decode_means");
  return m.decoder.forward(h).array().min(1.0 - kRangeClamp).max(kRangeClamp);
}

Matrix decode_means_batch(const DgaModel& m, const Matrix& h, Mlp::Cache* cache) {
  return m.decoder.forward(h, cache).array().min(1.0 - kRangeClamp).max(kRangeClamp);
}

double bernoulli_nll(const Vector& x, const Vector& means) {
  if (x.size() != means.size()) {
    throw ShapeError("bernoulli_nll: target length " + std::to_string(x.size()) +
                     " != mean length " + std::to_string(means.size()));
  }
  const auto m = means.array().min(1.0 - kMeanClamp).max(kMeanClamp);
  return -(x.array() * m.log() + (1.0 - x.array()) * (1.0 - m).log()).sum();
}

Vector bernoulli_nll_batch(const Matrix& x, const Matrix& means) {
  if (x.rows() != means.rows() || x.cols() != means.cols()) {
    throw ShapeError("bernoulli_nll_batch: target " + shape_str(x.rows(), x.cols()) +
                     " != means " + shape_str(means.rows(), means.cols()));
  }
  const auto m = means.array().min(1.0 - kMeanClamp).max(kMeanClamp);
  return -(x.array() * m.log() + (1.0 - x.array()) * (1.0 - m).log())
              .colwise()
              .sum()
              .transpose();
}

Matrix decoder_backward(DgaModel& m, const Mlp::Cache& cache, const Matrix& x) {
  if (!cache.valid) {
    throw StateError("decoder_backward: run a decoder forward pass first");
  }
  const Matrix& means = cache.post.back();
  if (x.rows() != means.rows() || x.cols() != means.cols()) {
    throw ShapeError("decoder_backward: target " + shape_str(x.rows(), x.cols()) +
                     " != means " + shape_str(means.rows(), means.cols()));
  }
  // sigmoid + cross-entropy: d loss / d top-preactivation = means - x
  return m.decoder.backward(cache, means - x);
}

}  // namespace dga
