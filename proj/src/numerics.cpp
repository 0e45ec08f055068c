#include "dga/numerics.hpp"

namespace dga {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " +
                     shape_str(a.rows(), a.cols()) + " * " +
                     shape_str(b.rows(), b.cols()));
  }
  return a * b;
}

double log_sum_exp(std::span<const double> values) {
  return log_sum_exp(
      Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
}

}  // namespace dga
