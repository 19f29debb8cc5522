#include "mcdc/transform.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "mcdc/error.hpp"

namespace mcdc {

Transformation::Transformation(Kind kind, Matrix forward, Matrix inverse)
    : kind_(kind), forward_(std::move(forward)), inverse_(std::move(inverse)) {
  if (forward_.rows() != forward_.cols() || forward_.rows() == 0)
    throw ValidationError("Transformation: forward matrix must be square and non-empty");
  const Matrix composed = forward_ * inverse_;
  const double err = max_abs_diff(composed, Matrix::identity(forward_.rows()));
  if (err > 1e-12)
    throw ValidationError(cat("Transformation: forward * inverse deviates from the "
                              "identity by ", err));
}

Transformation Transformation::identity(std::size_t dim) {
  return Transformation(Kind::identity, Matrix::identity(dim), Matrix::identity(dim));
}

Transformation Transformation::swap2() {
  Matrix s = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  return Transformation(Kind::swap, s, s);  // the swap is its own inverse
}

Transformation Transformation::linear(const Matrix& forward) {
  try {
    return Transformation(Kind::linear, forward, invert(forward));
  } catch (const NumericError&) {
    throw ValidationError("Transformation: forward matrix is not invertible");
  }
}

Transformation Transformation::rotation_scale2(double degrees, double scale) {
  if (scale == 0.0) throw ValidationError("rotation_scale2: scale must be non-zero");
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  Matrix fwd = Matrix::from_rows({{scale * c, -scale * s}, {scale * s, scale * c}});
  Matrix inv = Matrix::from_rows({{c / scale, s / scale}, {-s / scale, c / scale}});
  return Transformation(Kind::linear, fwd, inv);
}

Vec Transformation::apply(std::span<const double> y, Direction dir) const {
  if (y.size() != dim())
    throw ValidationError(cat("Transformation: point has dimension ", y.size(),
                              ", transform expects ", dim()));
  return mat_vec(dir == Direction::forward ? forward_ : inverse_, y);
}

std::string Transformation::name() const {
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::swap: return "swap";
    case Kind::linear: return "linear";
  }
  return "unknown";
}

}  // namespace mcdc
