#include "doctest.h"

#include <cmath>
#include <vector>

#include "mcdc/error.hpp"
#include "mcdc/transform.hpp"

using namespace mcdc;

TEST_SUITE("transform") {

TEST_CASE("identity") {
  Transformation t = Transformation::identity(3);
  CHECK(t.is_identity());
  CHECK(t.dim() == 3);
  Vec y = t.apply_forward(std::vector<double>{1, 2, 3});
  CHECK(y == Vec{1, 2, 3});
  CHECK(t.name() == "identity");
}

TEST_CASE("coordinate swap is its own inverse") {
  Transformation t = Transformation::swap2();
  Vec f = t.apply_forward(std::vector<double>{1, 2});
  CHECK(f == Vec{2, 1});
  Vec b = t.apply_inverse(std::vector<double>{1, 2});
  CHECK(b == Vec{2, 1});
  CHECK(t.name() == "swap");
  CHECK(max_abs_diff(t.forward(), t.inverse()) == 0.0);
}

TEST_CASE("general linear map computes its inverse") {
  Transformation t = Transformation::linear(Matrix::from_rows({{2, 1}, {0, 1}}));
  Vec f = t.apply_forward(std::vector<double>{3, 4});
  CHECK(f[0] == doctest::Approx(10.0));
  CHECK(f[1] == doctest::Approx(4.0));
  Vec back = t.apply_inverse(f);
  CHECK(back[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("rotation with scaling matches the closed form") {
  // 2 * R(120 degrees) applied to (1, 0) lands on (-1, sqrt(3)).
  Transformation t = Transformation::rotation_scale2(120.0, 2.0);
  Vec f = t.apply_forward(std::vector<double>{1, 0});
  CHECK(f[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(1.7320508075688772935).epsilon(1e-14));

  // Forward then inverse is the identity.
  Vec p{0.3, -1.7};
  Vec round = t.apply_inverse(t.apply_forward(p));
  CHECK(round[0] == doctest::Approx(p[0]).epsilon(1e-12));
  CHECK(round[1] == doctest::Approx(p[1]).epsilon(1e-12));
  CHECK(max_abs_diff(t.forward() * t.inverse(), Matrix::identity(2)) < 1e-12);
}

TEST_CASE("invalid transformations are rejected") {
  // Singular forward matrix.
  CHECK_THROWS(Transformation::linear(Matrix::from_rows({{1, 2}, {2, 4}})));
  // Zero scale.
  CHECK_THROWS(Transformation::rotation_scale2(45.0, 0.0));
}

TEST_CASE("dimension mismatch on apply") {
  Transformation t = Transformation::swap2();
  CHECK_THROWS_AS((void)t.apply_forward(std::vector<double>{1, 2, 3}), ValidationError);
}

}  // TEST_SUITE
