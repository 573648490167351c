#include "nahm/kernels.hpp"

#include <atomic>

#if defined(__GNUC__) || defined(__clang__)
#include <immintrin.h>
#endif

namespace nahm::kernels {

static std::atomic<bool> g_force_scalar{false};

void set_force_scalar(bool v) { g_force_scalar.store(v, std::memory_order_relaxed); }

cd wdot_scalar(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps) {
  double re = 0, im = 0;
  for (std::size_t j = 0; j < nodes; ++j) {
    double sr = 0, si = 0;
    const cd* pa = a + j * comps;
    const cd* pb = b + j * comps;
    for (std::size_t c = 0; c < comps; ++c) {
      sr += pa[c].real() * pb[c].real() + pa[c].imag() * pb[c].imag();
      si += pa[c].real() * pb[c].imag() - pa[c].imag() * pb[c].real();
    }
    re += w[j] * sr;
    im += w[j] * si;
  }
  return {re, im};
}

#if defined(__GNUC__) || defined(__clang__)
__attribute__((target("avx2,fma")))
cd wdot_avx2(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps) {
  const double* da = reinterpret_cast<const double*>(a);
  const double* db = reinterpret_cast<const double*>(b);
  __m256d acc_re = _mm256_setzero_pd();  // lanes: ar*br, ai*bi, ...
  __m256d acc_im = _mm256_setzero_pd();  // lanes: ar*bi, ai*br, ...
  const std::size_t stride = 2 * comps;
  for (std::size_t j = 0; j < nodes; ++j) {
    __m256d sre = _mm256_setzero_pd(), sim = _mm256_setzero_pd();
    const double* pa = da + j * stride;
    const double* pb = db + j * stride;
    for (std::size_t c = 0; c < stride; c += 4) {
      __m256d va = _mm256_loadu_pd(pa + c);
      __m256d vb = _mm256_loadu_pd(pb + c);
      __m256d vs = _mm256_permute_pd(vb, 0x5);  // swap re/im within each complex
      sre = _mm256_fmadd_pd(va, vb, sre);
      sim = _mm256_fmadd_pd(va, vs, sim);
    }
    __m256d vw = _mm256_set1_pd(w[j]);
    acc_re = _mm256_fmadd_pd(vw, sre, acc_re);
    acc_im = _mm256_fmadd_pd(vw, sim, acc_im);
  }
  alignas(32) double r[4], i[4];
  _mm256_store_pd(r, acc_re);
  _mm256_store_pd(i, acc_im);
  return {(r[0] + r[1]) + (r[2] + r[3]), (i[0] - i[1]) + (i[2] - i[3])};
}
#else
cd wdot_avx2(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps) {
  return wdot_scalar(w, a, b, nodes, comps);
}
#endif

bool avx2_available() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

cd wdot(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps) {
  static const bool has_avx2 = avx2_available();
  if (!g_force_scalar.load(std::memory_order_relaxed) && has_avx2 && comps % 2 == 0)
    return wdot_avx2(w, a, b, nodes, comps);
  return wdot_scalar(w, a, b, nodes, comps);
}

}  // namespace nahm::kernels
