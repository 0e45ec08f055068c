// Test-only reference implementations, deliberately written with plain loops
// and independent arithmetic so they can stand as oracles for the library
// path. Nothing here may call into the code under test.
#pragma once

#include <quadmath.h>

#include <cmath>
#include <functional>
#include <vector>

#include <mpfr.h>

#include "dga/numerics.hpp"

namespace oracle {

/// Entry-wise triple-loop matrix product.
inline dga::Matrix matmul_naive(const dga::Matrix& a, const dga::Matrix& b) {
  dga::Matrix c = dga::Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        acc += a(i, k) * b(k, j);
      }
      c(i, j) = acc;
    }
  }
  return c;
}

/// log sum exp with the sum accumulated in 128-bit floats, no shifting.
inline double log_sum_exp_quad(const std::vector<double>& values) {
  __float128 acc = 0;
  for (double v : values) {
    acc += expq(static_cast<__float128>(v));
  }
  return static_cast<double>(logq(acc));
}

/// Factorized Bernoulli log-probability at 256-bit precision.
inline double bernoulli_log_prob_mpfr(const std::vector<double>& probs,
                                      const std::vector<double>& h) {
  mpfr_t acc, term, p;
  mpfr_inits2(256, acc, term, p, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_zero(acc, 1);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (h[i] != 0.0) {
      mpfr_set_d(p, probs[i], MPFR_RNDN);
    } else {
      mpfr_set_d(p, 1.0, MPFR_RNDN);
      mpfr_sub_d(p, p, probs[i], MPFR_RNDN);
    }
    mpfr_log(term, p, MPFR_RNDN);
    mpfr_add(acc, acc, term, MPFR_RNDN);
  }
  const double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clears(acc, term, p, static_cast<mpfr_ptr>(nullptr));
  return out;
}

/// Central finite difference of f at x, step eps.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

/// Scalar-loop forward pass of an affine+activation stack; weights are
/// (out x in) row-major nested vectors. act: 0 tanh, 1 sigmoid, 2 identity.
struct ScalarNet {
  struct Layer {
    std::vector<std::vector<double>> w;
    std::vector<double> b;
    int act;
  };
  std::vector<Layer> layers;

  std::vector<double> forward(std::vector<double> x) const {
    for (const Layer& layer : layers) {
      std::vector<double> z(layer.b);
      for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
          z[i] += layer.w[i][j] * x[j];
        }
        switch (layer.act) {
          case 0:
            z[i] = std::tanh(z[i]);
            break;
          case 1:
            z[i] = 1.0 / (1.0 + std::exp(-z[i]));
            break;
          default:
            break;
        }
      }
      x = std::move(z);
    }
    return x;
  }
};

}  // namespace oracle
