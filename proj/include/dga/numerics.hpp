#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>

#include "dga/errors.hpp"

namespace dga {

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixT<double>;
using Vector = VectorT<double>;
using Index = Eigen::Index;

/// Shape-checked matrix product. Eigen asserts (or reads garbage in release
/// builds) on mismatched operands; this throws ShapeError instead, carrying
/// both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);

/// log(1 / (1 + exp(-x))) without overflow for any finite x.
inline double stable_log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// 1 / (1 + exp(-x)), saturating without overflow.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log sum_i exp(v_i) by max shift. All-(-inf) input gives -inf.
/// Throws DomainError on empty input.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  if (v.size() == 0) {
    throw DomainError("log_sum_exp: empty input");
  }
  const double m = v.derived().maxCoeff();
  if (std::isinf(m) && m < 0) {
    return m;
  }
  return m + std::log((v.derived().array() - m).exp().sum());
}

double log_sum_exp(std::span<const double> values);

}  // namespace dga
