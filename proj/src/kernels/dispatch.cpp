#include <cstdlib>
#include <cstring>

#include "mcdc/kernels.hpp"

namespace mcdc::kernels {

#if defined(MCDC_HAVE_AVX2)
namespace detail {
const Backend& avx2_backend_impl();
bool cpu_has_avx2();
}  // namespace detail
#endif

const Backend* avx2_backend() {
#if defined(MCDC_HAVE_AVX2)
  if (detail::cpu_has_avx2()) return &detail::avx2_backend_impl();
#endif
  return nullptr;
}

namespace {

const Backend* resolve() {
  // MCDC_KERNEL=scalar|avx2 forces a backend; an unavailable or unknown
  // request falls back to the default preference order.
  if (const char* pick = std::getenv("MCDC_KERNEL")) {
    if (std::strcmp(pick, "scalar") == 0) return &scalar_backend();
    if (std::strcmp(pick, "avx2") == 0)
      if (const Backend* b = avx2_backend()) return b;
  }
  if (const Backend* b = avx2_backend()) return b;
  return &scalar_backend();
}

const Backend* g_override = nullptr;

}  // namespace

const Backend& active_backend() {
  if (g_override) return *g_override;
  static const Backend* chosen = resolve();
  return *chosen;
}

void set_backend(const Backend* backend) { g_override = backend; }

}  // namespace mcdc::kernels
