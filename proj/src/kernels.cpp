#include "infodyn/kernels.hpp"

#include <atomic>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define INFODYN_HAVE_X86 1
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#define INFODYN_HAVE_NEON 1
#endif

namespace infodyn::kernels {

namespace {
std::atomic<bool> g_force_scalar{false};
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  // Four independent accumulators so the reference path is not serialized on
  // the FP add latency; the SIMD variants mirror this accumulator layout.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (s0 + s1) + (s2 + s3) + tail;
}

#if defined(INFODYN_HAVE_X86)
__attribute__((target("avx2,fma"))) static double dot_avx2(const double* a,
                                                           const double* b,
                                                           std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  const __m256d sum01 = _mm256_add_pd(acc0, acc1);
  const __m256d sum23 = _mm256_add_pd(acc2, acc3);
  const __m256d sum = _mm256_add_pd(sum01, sum23);
  const __m128d lo = _mm256_castpd256_pd128(sum);
  const __m128d hi = _mm256_extractf128_pd(sum, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double result = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) result += a[i] * b[i];
  return result;
}
#endif

#if defined(INFODYN_HAVE_NEON)
static double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double result = vaddvq_f64(vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3)));
  for (; i < n; ++i) result += a[i] * b[i];
  return result;
}
#endif

namespace {
Variant detect_variant() {
#if defined(INFODYN_HAVE_X86)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Variant::kAvx2;
  }
#elif defined(INFODYN_HAVE_NEON)
  return Variant::kNeon;
#endif
  return Variant::kScalar;
}
}  // namespace

Variant active_variant() {
  if (g_force_scalar.load(std::memory_order_relaxed)) return Variant::kScalar;
  static const Variant detected = detect_variant();
  return detected;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kAvx2:
      return "avx2";
    case Variant::kNeon:
      return "neon";
    default:
      return "scalar";
  }
}

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

double dot(const double* a, const double* b, std::size_t n) {
  switch (active_variant()) {
#if defined(INFODYN_HAVE_X86)
    case Variant::kAvx2:
      return dot_avx2(a, b, n);
#endif
#if defined(INFODYN_HAVE_NEON)
    case Variant::kNeon:
      return dot_neon(a, b, n);
#endif
    default:
      return dot_scalar(a, b, n);
  }
}

}  // namespace infodyn::kernels
