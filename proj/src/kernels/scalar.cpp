#include <cmath>
#include <limits>

#include "mcdc/kernels.hpp"

namespace mcdc::kernels {

namespace scalar {

void log_density2(const Term2& t, const double* xs, const double* ys, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - t.mu0;
    const double dy = ys[i] - t.mu1;
    const double u = t.a * dx;
    const double v = t.b * dx + t.c * dy;
    out[i] = t.bias - 0.5 * (u * u + v * v);
  }
}

double posterior_normalize(double* const* terms, std::size_t nterms, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < nterms; ++t) hi = std::max(hi, terms[t][i]);
    if (!std::isfinite(hi)) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t t = 0; t < nterms; ++t) {
      const double e = std::exp(terms[t][i] - hi);
      terms[t][i] = e;
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (std::size_t t = 0; t < nterms; ++t) terms[t][i] *= inv;
    total += hi + std::log(sum);
  }
  return total;
}

WeightedSums weighted_sums2(const double* xs, const double* ys, const double* w,
                            std::size_t n) {
  WeightedSums s;
  for (std::size_t i = 0; i < n; ++i) {
    s.w += w[i];
    s.x += w[i] * xs[i];
    s.y += w[i] * ys[i];
  }
  return s;
}

WeightedScatter weighted_scatter2(const double* xs, const double* ys, const double* w,
                                  double mu0, double mu1, std::size_t n) {
  WeightedScatter s;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = xs[i] - mu0;
    const double cy = ys[i] - mu1;
    s.xx += w[i] * cx * cx;
    s.xy += w[i] * cx * cy;
    s.yy += w[i] * cy * cy;
  }
  return s;
}

void vexp(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

void vlog(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log(in[i]);
}

}  // namespace scalar

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",
      &scalar::log_density2,
      &scalar::posterior_normalize,
      &scalar::weighted_sums2,
      &scalar::weighted_scatter2,
      &scalar::vexp,
      &scalar::vlog,
  };
  return backend;
}

std::size_t first_vanished_index(const double* const* terms, std::size_t nterms,
                                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    bool any_finite = false;
    for (std::size_t t = 0; t < nterms && !any_finite; ++t)
      any_finite = std::isfinite(terms[t][i]);
    if (!any_finite) return i;
  }
  return n;
}

}  // namespace mcdc::kernels
