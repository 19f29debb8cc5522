#pragma once

#include <cstddef>

namespace mcdc::kernels {

/// Fused per-term parameters for the two-dimensional Gaussian density kernel.
/// With L the lower Cholesky factor of sigma and
///   a = 1/L00,  b = -L10/(L00*L11),  c = 1/L11,
/// the squared Mahalanobis distance of (x, y) is
///   q = (a*dx)^2 + (b*dx + c*dy)^2,   dx = x - mu0, dy = y - mu1,
/// and the weighted log density is  bias - q/2  where bias folds the
/// normalizing constant together with the term's log prior weight.
struct Term2 {
  double mu0 = 0, mu1 = 0;
  double a = 1, b = 0, c = 1;
  double bias = 0;
};

struct WeightedSums {
  double w = 0, x = 0, y = 0;
};

struct WeightedScatter {
  double xx = 0, xy = 0, yy = 0;
};

/// A set of interchangeable kernel implementations.  `scalar_backend()` is the
/// reference; vector backends must agree with it within the tolerances pinned
/// in the equivalence tests (weights to 1e-12 absolute, reductions to 1e-12
/// relative).
struct Backend {
  const char* name;

  /// out[i] = t.bias - q(xs[i], ys[i]) / 2.
  void (*log_density2)(const Term2& t, const double* xs, const double* ys,
                       double* out, std::size_t n);

  /// In-place posterior normalization across `nterms` parallel arrays of
  /// length n:  terms[t][i] <- exp(terms[t][i] - lse_i)  with lse_i the
  /// log-sum-exp over t.  Returns sum_i lse_i.  If some observation has no
  /// finite term the return value is non-finite and the array contents are
  /// unspecified.
  double (*posterior_normalize)(double* const* terms, std::size_t nterms,
                                std::size_t n);

  /// { sum w, sum w*x, sum w*y }.
  WeightedSums (*weighted_sums2)(const double* xs, const double* ys,
                                 const double* w, std::size_t n);

  /// Centered second moments { sum w*cx*cx, sum w*cx*cy, sum w*cy*cy } with
  /// cx = x - mu0, cy = y - mu1.
  WeightedScatter (*weighted_scatter2)(const double* xs, const double* ys,
                                       const double* w, double mu0, double mu1,
                                       std::size_t n);

  /// Element-wise exp / log, the building blocks of the kernels above.
  /// vexp flushes to zero below -745 and is valid up to 709; vlog expects
  /// positive normal inputs.
  void (*vexp)(const double* in, double* out, std::size_t n);
  void (*vlog)(const double* in, double* out, std::size_t n);
};

/// Portable reference implementation (plain loops, libm).
const Backend& scalar_backend();

/// AVX2+FMA implementation, or nullptr if not compiled in or the CPU lacks
/// the instructions.
const Backend* avx2_backend();

/// The backend every caller should use.  Chosen once: the MCDC_KERNEL
/// environment variable ("scalar" or "avx2") forces a choice, otherwise the
/// best available backend wins.
const Backend& active_backend();

/// Overrides the active backend (tests); nullptr restores automatic choice.
void set_backend(const Backend* backend);

/// Index of the first observation whose terms are all non-finite, or n if
/// none.  Used to name the offending point after posterior_normalize fails.
std::size_t first_vanished_index(const double* const* terms, std::size_t nterms,
                                 std::size_t n);

}  // namespace mcdc::kernels
