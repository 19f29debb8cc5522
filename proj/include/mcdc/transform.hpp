#pragma once

#include <span>
#include <string>

#include "mcdc/linalg.hpp"

namespace mcdc {

/// An invertible linear map describing how corrupted observations were
/// altered.  A corrupted point is T(y_true); correction applies T^-1.
///
/// The forward and inverse matrices are stored explicitly and verified to
/// compose to the identity within 1e-12 at construction.
class Transformation {
 public:
  enum class Kind { identity, swap, linear };
  enum class Direction { forward, inverse };

  static Transformation identity(std::size_t dim);
  /// Coordinate swap in two dimensions: (y1, y2) -> (y2, y1).
  static Transformation swap2();
  /// General invertible map; the inverse is computed and verified.
  static Transformation linear(const Matrix& forward);
  /// Counter-clockwise rotation by `degrees` composed with uniform scaling,
  /// in two dimensions.
  static Transformation rotation_scale2(double degrees, double scale);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return forward_.rows(); }
  const Matrix& forward() const { return forward_; }
  const Matrix& inverse() const { return inverse_; }
  bool is_identity() const { return kind_ == Kind::identity; }

  Vec apply(std::span<const double> y, Direction dir) const;
  Vec apply_forward(std::span<const double> y) const { return apply(y, Direction::forward); }
  Vec apply_inverse(std::span<const double> y) const { return apply(y, Direction::inverse); }

  /// Human-readable tag for reports ("identity", "swap", "linear").
  std::string name() const;

 private:
  Transformation(Kind kind, Matrix forward, Matrix inverse);

  Kind kind_;
  Matrix forward_;
  Matrix inverse_;
};

}  // namespace mcdc
