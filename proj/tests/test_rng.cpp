#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "mcdc/rng.hpp"

using namespace mcdc;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("split is a pure function of (seed, stream)") {
  Rng root(7);
  Rng s1 = root.split(3);
  root.next_u64();  // advancing the parent must not change derived streams
  Rng s2 = root.split(3);
  for (int i = 0; i < 20; ++i) CHECK(s1.next_u64() == s2.next_u64());

  Rng other = root.split(4);
  bool differs = false;
  Rng s3 = Rng(7).split(3);
  for (int i = 0; i < 20; ++i)
    if (other.next_u64() != s3.next_u64()) differs = true;
  CHECK(differs);
}

TEST_CASE("uniform stays in [0,1) with the right mean") {
  Rng r(123);
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("uniform(lo,hi) respects its bounds") {
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
  }
}

TEST_CASE("uniform_index covers the range uniformly") {
  Rng r(99);
  std::vector<int> counts(7, 0);
  const int n = 14000;
  for (int i = 0; i < n; ++i) {
    std::size_t k = r.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 2000) < 300);
  CHECK(Rng(1).uniform_index(1) == 0);
}

TEST_CASE("normal deviates have standard moments") {
  Rng r(2024);
  const int n = 20000;
  double sum = 0, sumsq = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    double z0, z1;
    r.normal_pair(z0, z1);
    sum += z0 + z1;
    sumsq += z0 * z0 + z1 * z1;
    cross += z0 * z1;
  }
  CHECK(sum / (2 * n) == doctest::Approx(0.0).epsilon(1).scale(0.02));
  CHECK(sumsq / (2 * n) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(cross / n == doctest::Approx(0.0).epsilon(1).scale(0.03));
}

TEST_CASE("bernoulli tracks its probability") {
  Rng r(31);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.3) ? 1 : 0;
  CHECK(double(hits) / n == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("distinct seeds give distinct streams") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 64; ++s) firsts.insert(Rng(s).next_u64());
  CHECK(firsts.size() == 64);
}

}  // TEST_SUITE
