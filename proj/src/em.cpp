#include "mcdc/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <numeric>
#include <optional>
#include <utility>

#include "mcdc/error.hpp"
#include "mcdc/kernels.hpp"
#include "mcdc/rng.hpp"

namespace mcdc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Data views.  The back-transformed image of every observation is computed
// once per fit; both EM steps then run over flat arrays, which is what the
// kernel backends consume.

struct PointSets {
  std::size_t n = 0, d = 0;
  std::vector<double> xs0, ys0, xs1, ys1;  // d == 2 fast path (SoA)
  std::vector<double> rows0, rows1;        // generic path (row-major)
};

PointSets make_point_sets(const Dataset& data, const Transformation& transform) {
  PointSets ps;
  ps.n = data.size();
  ps.d = data.dim();
  if (ps.d == 2) {
    ps.xs0 = data.column(0);
    ps.ys0 = data.column(1);
    const Matrix& ti = transform.inverse();
    ps.xs1.resize(ps.n);
    ps.ys1.resize(ps.n);
    for (std::size_t i = 0; i < ps.n; ++i) {
      ps.xs1[i] = ti(0, 0) * ps.xs0[i] + ti(0, 1) * ps.ys0[i];
      ps.ys1[i] = ti(1, 0) * ps.xs0[i] + ti(1, 1) * ps.ys0[i];
    }
  } else {
    ps.rows0 = data.values();
    ps.rows1.resize(ps.n * ps.d);
    for (std::size_t i = 0; i < ps.n; ++i) {
      const Vec back = transform.apply_inverse(data.row(i));
      std::copy(back.begin(), back.end(), ps.rows1.begin() + i * ps.d);
    }
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Per-iteration term parameters derived from the component parameters.
// Terms come in pairs per component: index 2k is the untransformed branch
// (weight tau_k * pi_k), index 2k+1 the transformed branch evaluated at the
// back-transformed points (weight tau_k * (1 - pi_k)).

struct TermCache {
  std::vector<kernels::Term2> t1, t0;  // d == 2
  std::vector<Matrix> lower;           // generic
  std::vector<double> bias1, bias0;    // generic
};

// Returns the index of a component whose covariance is not positive
// definite, or -1 on success.
int build_terms2(const std::vector<ComponentParams>& comps, TermCache& tc) {
  const std::size_t g = comps.size();
  tc.t1.resize(g);
  tc.t0.resize(g);
  for (std::size_t k = 0; k < g; ++k) {
    const auto& cp = comps[k];
    const double s00 = cp.sigma(0, 0), s01 = cp.sigma(0, 1), s11 = cp.sigma(1, 1);
    if (!(s00 > 0.0)) return static_cast<int>(k);
    const double l00 = std::sqrt(s00);
    const double l10 = s01 / l00;
    const double rem = s11 - l10 * l10;
    if (!(rem > 0.0)) return static_cast<int>(k);
    const double l11 = std::sqrt(rem);
    kernels::Term2 t;
    t.mu0 = cp.mu[0];
    t.mu1 = cp.mu[1];
    t.a = 1.0 / l00;
    t.b = -l10 / (l00 * l11);
    t.c = 1.0 / l11;
    const double base = -kLog2Pi - std::log(l00 * l11) + std::log(cp.tau);
    t.bias = base + std::log(cp.pi);
    tc.t1[k] = t;
    t.bias = base + std::log1p(-cp.pi);
    tc.t0[k] = t;
  }
  return -1;
}

int build_terms_g(const std::vector<ComponentParams>& comps, std::size_t d,
                  TermCache& tc) {
  const std::size_t g = comps.size();
  tc.lower.resize(g);
  tc.bias1.resize(g);
  tc.bias0.resize(g);
  for (std::size_t k = 0; k < g; ++k) {
    const auto& cp = comps[k];
    if (!cholesky(cp.sigma, tc.lower[k])) return static_cast<int>(k);
    const double base = -0.5 * (static_cast<double>(d) * kLog2Pi +
                                chol_log_det(tc.lower[k])) +
                        std::log(cp.tau);
    tc.bias1[k] = base + std::log(cp.pi);
    tc.bias0[k] = base + std::log1p(-cp.pi);
  }
  return -1;
}

int build_terms(const std::vector<ComponentParams>& comps, const PointSets& ps,
                TermCache& tc) {
  return ps.d == 2 ? build_terms2(comps, tc) : build_terms_g(comps, ps.d, tc);
}

void fill_log_terms(const PointSets& ps, const std::vector<ComponentParams>& comps,
                    const TermCache& tc, Responsibilities& resp,
                    const kernels::Backend& kb) {
  const std::size_t g = comps.size();
  if (ps.d == 2) {
    for (std::size_t k = 0; k < g; ++k) {
      kb.log_density2(tc.t1[k], ps.xs0.data(), ps.ys0.data(), resp.term(2 * k).data(),
                      ps.n);
      kb.log_density2(tc.t0[k], ps.xs1.data(), ps.ys1.data(),
                      resp.term(2 * k + 1).data(), ps.n);
    }
    return;
  }
  Vec diff(ps.d);
  for (std::size_t k = 0; k < g; ++k) {
    auto w1 = resp.term(2 * k);
    auto w0 = resp.term(2 * k + 1);
    for (std::size_t i = 0; i < ps.n; ++i) {
      for (int pass = 0; pass < 2; ++pass) {
        const double* row = (pass == 0 ? ps.rows0 : ps.rows1).data() + i * ps.d;
        for (std::size_t j = 0; j < ps.d; ++j) diff[j] = row[j] - comps[k].mu[j];
        const Vec u = chol_forward_solve(tc.lower[k], diff);
        double q = 0.0;
        for (double v : u) q += v * v;
        (pass == 0 ? w1 : w0)[i] = (pass == 0 ? tc.bias1[k] : tc.bias0[k]) - 0.5 * q;
      }
    }
  }
}

double normalize_terms(Responsibilities& resp, std::vector<double*>& ptrs,
                       const kernels::Backend& kb) {
  const std::size_t nterms = 2 * resp.g();
  ptrs.resize(nterms);
  for (std::size_t t = 0; t < nterms; ++t) ptrs[t] = resp.term(t).data();
  return kb.posterior_normalize(ptrs.data(), nterms, resp.n());
}

// ---------------------------------------------------------------------------
// M-step.  Means and covariances blend the untransformed points (weighted by
// w1) with the back-transformed points (weighted by w0).  Returns the index
// of a degenerate component or -1.

int m_step_core(const PointSets& ps, const Responsibilities& resp, double ridge,
                std::vector<ComponentParams>& out, const kernels::Backend& kb) {
  const std::size_t g = resp.g();
  const double n = static_cast<double>(ps.n);
  const double min_mass = static_cast<double>(ps.d + 1);
  out.resize(g);
  for (std::size_t k = 0; k < g; ++k) {
    const double* w1 = resp.term(2 * k).data();
    const double* w0 = resp.term(2 * k + 1).data();
    if (ps.d == 2) {
      const auto s1 = kb.weighted_sums2(ps.xs0.data(), ps.ys0.data(), w1, ps.n);
      const auto s0 = kb.weighted_sums2(ps.xs1.data(), ps.ys1.data(), w0, ps.n);
      const double nk = s1.w + s0.w;
      if (!(nk >= min_mass)) return static_cast<int>(k);
      const double mu0 = (s1.x + s0.x) / nk;
      const double mu1 = (s1.y + s0.y) / nk;
      const auto c1 =
          kb.weighted_scatter2(ps.xs0.data(), ps.ys0.data(), w1, mu0, mu1, ps.n);
      const auto c0 =
          kb.weighted_scatter2(ps.xs1.data(), ps.ys1.data(), w0, mu0, mu1, ps.n);
      double s00 = (c1.xx + c0.xx) / nk;
      double s01 = (c1.xy + c0.xy) / nk;
      double s11 = (c1.yy + c0.yy) / nk;
      const double mean_eig = 0.5 * (s00 + s11);
      const double half_gap = 0.5 * std::sqrt((s00 - s11) * (s00 - s11) + 4.0 * s01 * s01);
      if (mean_eig - half_gap < ridge * mean_eig) {
        s00 += ridge * mean_eig;
        s11 += ridge * mean_eig;
      }
      if (!(s00 > 0.0 && s00 * s11 - s01 * s01 > 0.0)) return static_cast<int>(k);
      auto& cp = out[k];
      cp.mu = {mu0, mu1};
      cp.sigma = Matrix::from_rows({{s00, s01}, {s01, s11}});
      cp.tau = std::clamp(nk / n, 0.0, 1.0);
      cp.pi = std::clamp(s1.w / nk, 0.0, 1.0);
    } else {
      const std::size_t d = ps.d;
      double nk = 0.0, n1 = 0.0;
      Vec mu(d, 0.0);
      for (std::size_t i = 0; i < ps.n; ++i) {
        nk += w1[i] + w0[i];
        n1 += w1[i];
        for (std::size_t j = 0; j < d; ++j)
          mu[j] += w1[i] * ps.rows0[i * d + j] + w0[i] * ps.rows1[i * d + j];
      }
      if (!(nk >= min_mass)) return static_cast<int>(k);
      for (double& m : mu) m /= nk;
      Matrix sigma(d, d);
      for (std::size_t i = 0; i < ps.n; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
          const double w = pass == 0 ? w1[i] : w0[i];
          const double* row = (pass == 0 ? ps.rows0 : ps.rows1).data() + i * d;
          for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = r; c < d; ++c)
              sigma(r, c) += w * (row[r] - mu[r]) * (row[c] - mu[c]);
        }
      }
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < r; ++c) sigma(r, c) = sigma(c, r);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) sigma(r, c) /= nk;
      const double mean_eig = trace(sigma) / static_cast<double>(d);
      if (smallest_eigenvalue_sym(sigma) < ridge * mean_eig)
        for (std::size_t j = 0; j < d; ++j) sigma(j, j) += ridge * mean_eig;
      Matrix lower;
      if (!cholesky(sigma, lower)) return static_cast<int>(k);
      auto& cp = out[k];
      cp.mu = std::move(mu);
      cp.sigma = std::move(sigma);
      cp.tau = std::clamp(nk / n, 0.0, 1.0);
      cp.pi = std::clamp(n1 / nk, 0.0, 1.0);
    }
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Driver for one restart.

struct EngineFit {
  std::vector<ComponentParams> components;
  Responsibilities resp;
  double loglik = kNegInf;
  int n_iter = 0;
  bool converged = false;
  std::vector<double> trace;
};

std::optional<EngineFit> fit_once(const PointSets& ps,
                                  std::vector<ComponentParams> params,
                                  const EmConfig& cfg, const kernels::Backend& kb) {
  Responsibilities resp(ps.n, params.size());
  std::vector<double*> ptrs;
  TermCache tc;
  std::vector<double> trace;
  double prev = 0.0, ll = kNegInf;
  bool converged = false;
  int iters = 0;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    if (build_terms(params, ps, tc) >= 0) return std::nullopt;
    fill_log_terms(ps, params, tc, resp, kb);
    ll = normalize_terms(resp, ptrs, kb);
    if (!std::isfinite(ll)) return std::nullopt;
    trace.push_back(ll);
    iters = iter;
    if (iter > 1 && std::abs(ll - prev) <= cfg.rel_tol * (1.0 + std::abs(ll))) {
      converged = true;
      break;
    }
    prev = ll;
    if (iter == cfg.max_iter) break;  // keep resp consistent with params
    if (m_step_core(ps, resp, cfg.ridge, params, kb) >= 0) return std::nullopt;
  }
  return EngineFit{std::move(params), std::move(resp), ll, iters, converged,
                   std::move(trace)};
}

void check_config(const EmConfig& cfg) {
  if (cfg.max_iter < 1) throw ValidationError("EmConfig: max_iter must be positive");
  if (cfg.restarts < 1) throw ValidationError("EmConfig: restarts must be positive");
  if (!(cfg.rel_tol >= 0.0)) throw ValidationError("EmConfig: rel_tol must be non-negative");
  if (!(cfg.ridge >= 0.0)) throw ValidationError("EmConfig: ridge must be non-negative");
}

}  // namespace

Responsibilities e_step(const Dataset& data,
                        const std::vector<ComponentParams>& components,
                        const Transformation& transform) {
  check_model(components, data.dim());
  if (transform.dim() != data.dim())
    throw ValidationError("e_step: transform dimension mismatch");
  const auto& kb = kernels::active_backend();
  const PointSets ps = make_point_sets(data, transform);
  Responsibilities resp(ps.n, components.size());
  TermCache tc;
  const int bad = build_terms(components, ps, tc);
  if (bad >= 0)
    throw NumericError(cat("e_step: component ", bad,
                           " covariance is not positive definite"));
  fill_log_terms(ps, components, tc, resp, kb);
  std::vector<double*> ptrs;
  const double ll = normalize_terms(resp, ptrs, kb);
  if (!std::isfinite(ll)) {
    // The failed normalization overwrote the log terms; recompute them to
    // name the offending observation.
    fill_log_terms(ps, components, tc, resp, kb);
    std::vector<const double*> cptrs(ptrs.begin(), ptrs.end());
    const std::size_t idx =
        kernels::first_vanished_index(cptrs.data(), cptrs.size(), ps.n);
    if (idx < ps.n)
      throw NumericError(cat("e_step: mixture density vanished at observation '",
                             data.id(idx), "' (index ", idx, ")"));
    throw NumericError("e_step: posterior normalization failed");
  }
  return resp;
}

MStepResult m_step(const Dataset& data, const Responsibilities& resp,
                   const Transformation& transform, const EmConfig& config) {
  check_config(config);
  if (resp.n() != data.size())
    throw ValidationError("m_step: responsibilities do not match the dataset");
  if (resp.g() == 0) throw ValidationError("m_step: no components");
  if (transform.dim() != data.dim())
    throw ValidationError("m_step: transform dimension mismatch");
  const PointSets ps = make_point_sets(data, transform);
  MStepResult out;
  out.degenerate_component = m_step_core(ps, resp, config.ridge, out.components,
                                         kernels::active_backend());
  return out;
}

std::vector<ComponentParams> initialize(const Dataset& data, int g,
                                        const Transformation& transform,
                                        std::uint64_t seed) {
  const std::size_t n = data.size(), d = data.dim();
  if (g < 1) throw ValidationError("initialize: g must be at least 1");
  if (static_cast<std::size_t>(g) > n)
    throw ValidationError(cat("initialize: ", g, " components but only ", n,
                              " observations"));
  if (transform.dim() != d)
    throw ValidationError("initialize: transform dimension mismatch");
  Rng rng(seed);

  // Provisionally un-transform the points that the inverse map pulls closer
  // to the data's coordinate-wise median; the EM iterations then sort out
  // which points were actually altered.  Corrupted points land back on their
  // home cluster under T^-1, while clean points are dragged away from the
  // bulk, so this keeps the k-means centers below off both decoy regions
  // (the corrupted images and the spurious back-transforms of clean points).
  std::vector<double> pts(n * d);
  if (transform.is_identity()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = data.row(i);
      std::copy(row.begin(), row.end(), pts.begin() + i * d);
    }
  } else {
    std::vector<double> median(d), col(n);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) col[i] = data.row(i)[j];
      std::nth_element(col.begin(), col.begin() + n / 2, col.end());
      median[j] = col[n / 2];
    }
    // Require the pull to be decisive (factor 2): near-ties arise for maps
    // that roughly preserve distances to the median (e.g. a coordinate swap
    // straddling the diagonal), and resolving them by noise can invert a
    // whole cluster's orientation.  Keeping ties matches the "mostly
    // untransformed" prior that pi = 0.75 encodes below.
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = data.row(i);
      const Vec back = transform.apply_inverse(row);
      double d_keep = 0.0, d_back = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        d_keep += (row[j] - median[j]) * (row[j] - median[j]);
        d_back += (back[j] - median[j]) * (back[j] - median[j]);
      }
      const std::span<const double> src =
          d_keep <= 2.0 * d_back ? row : std::span<const double>(back);
      std::copy(src.begin(), src.end(), pts.begin() + i * d);
    }
  }

  // k-means on the provisional points: g distinct random starting centers,
  // ten Lloyd rounds, empty clusters reseeded from a random point.
  const std::size_t gz = static_cast<std::size_t>(g);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t j = 0; j < gz; ++j)
    std::swap(perm[j], perm[j + rng.uniform_index(n - j)]);
  std::vector<double> centers(gz * d);
  for (std::size_t k = 0; k < gz; ++k)
    std::copy_n(pts.begin() + perm[k] * d, d, centers.begin() + k * d);

  std::vector<std::size_t> label(n, 0);
  std::vector<double> sums(gz * d);
  std::vector<std::size_t> counts(gz);
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t k = 0; k < gz; ++k) {
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = pts[i * d + j] - centers[k * d + j];
          dist += diff * diff;
        }
        if (dist < best) {
          best = dist;
          arg = k;
        }
      }
      label[i] = arg;
    }
  };
  for (int round = 0; round < 10; ++round) {
    assign();
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[label[i]] += 1;
      for (std::size_t j = 0; j < d; ++j) sums[label[i] * d + j] += pts[i * d + j];
    }
    for (std::size_t k = 0; k < gz; ++k) {
      if (counts[k] == 0) {
        std::copy_n(pts.begin() + rng.uniform_index(n) * d, d,
                    centers.begin() + k * d);
      } else {
        for (std::size_t j = 0; j < d; ++j)
          centers[k * d + j] = sums[k * d + j] / static_cast<double>(counts[k]);
      }
    }
  }
  assign();
  std::fill(sums.begin(), sums.end(), 0.0);
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    counts[label[i]] += 1;
    for (std::size_t j = 0; j < d; ++j) sums[label[i] * d + j] += pts[i * d + j];
  }
  for (std::size_t k = 0; k < gz; ++k)
    if (counts[k] > 0)
      for (std::size_t j = 0; j < d; ++j)
        centers[k * d + j] = sums[k * d + j] / static_cast<double>(counts[k]);

  // Pooled within-cluster covariance, shared across components, with the
  // usual ridge guard so it is safely positive definite.
  Matrix pooled(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = centers.data() + label[i] * d;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t cidx = r; cidx < d; ++cidx)
        pooled(r, cidx) += (pts[i * d + r] - c[r]) * (pts[i * d + cidx] - c[cidx]);
  }
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < r; ++c) pooled(r, c) = pooled(c, r);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) pooled(r, c) /= static_cast<double>(n);
  double mean_eig = trace(pooled) / static_cast<double>(d);
  if (!(mean_eig > 0.0)) {
    pooled = Matrix::identity(d);
    mean_eig = 1.0;
  }
  if (smallest_eigenvalue_sym(pooled) < 1e-6 * mean_eig)
    for (std::size_t j = 0; j < d; ++j) pooled(j, j) += 1e-6 * mean_eig;

  std::vector<ComponentParams> comps(gz);
  double tau_sum = 0.0;
  const double floor_tau = 1.0 / (10.0 * static_cast<double>(gz));
  for (std::size_t k = 0; k < gz; ++k) {
    auto& cp = comps[k];
    cp.mu.assign(centers.begin() + k * d, centers.begin() + (k + 1) * d);
    cp.sigma = pooled;
    cp.tau = std::max(static_cast<double>(counts[k]) / static_cast<double>(n),
                      floor_tau);
    cp.pi = 0.75;
    tau_sum += cp.tau;
  }
  for (auto& cp : comps) cp.tau /= tau_sum;
  return comps;
}

MixtureFit run_em(const Dataset& data, int g, const Transformation& transform,
                  const EmConfig& config) {
  check_config(config);
  if (transform.dim() != data.dim())
    throw ValidationError("run_em: transform dimension mismatch");
  if (g < 1) throw ValidationError("run_em: g must be at least 1");
  if (static_cast<std::size_t>(g) * (data.dim() + 1) > data.size())
    throw ValidationError(cat("run_em: ", g, " components need at least ",
                              static_cast<std::size_t>(g) * (data.dim() + 1),
                              " observations, dataset has ", data.size()));
  const auto& kb = kernels::active_backend();
  const PointSets ps = make_point_sets(data, transform);
  const Rng seeder(config.seed);
  std::optional<EngineFit> best;
  for (int r = 0; r < config.restarts; ++r) {
    auto params = initialize(data, g, transform, seeder.split(static_cast<std::uint64_t>(r)).seed());
    auto fit = fit_once(ps, std::move(params), config, kb);
    if (fit && (!best || fit->loglik > best->loglik)) best = std::move(*fit);
  }
  if (!best)
    throw NumericError(cat("run_em: all ", config.restarts,
                           " restarts degenerated for g = ", g));
  MixtureFit out;
  out.components = std::move(best->components);
  out.resp = std::move(best->resp);
  out.loglik = best->loglik;
  out.n_iter = best->n_iter;
  out.converged = best->converged;
  out.loglik_trace = std::move(best->trace);
  return out;
}

}  // namespace mcdc
