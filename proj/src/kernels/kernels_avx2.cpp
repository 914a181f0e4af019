// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "gridlock/kernels.hpp"

#include <cmath>

#if defined(GRIDLOCK_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace gridlock::kernels {

#if defined(GRIDLOCK_HAVE_AVX2)
namespace {

// Rotation recurrences drift by a few ulps per step; re-seed the lanes from a
// direct evaluation this often (in groups of four samples).
constexpr std::size_t kReanchorGroups = 64;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

void damped_phasor_avx2(std::complex<double> coef, std::complex<double> pole, double t0, double dt,
                        std::span<double> out) {
  const std::size_t n_total = out.size();
  const std::size_t n_vec = n_total / 4 * 4;
  const std::complex<double> step4 = std::exp(pole * (4.0 * dt));
  const __m256d wr = _mm256_set1_pd(step4.real());
  const __m256d wi = _mm256_set1_pd(step4.imag());

  std::size_t n = 0;
  while (n < n_vec) {
    alignas(32) double zr0[4];
    alignas(32) double zi0[4];
    for (int l = 0; l < 4; ++l) {
      const std::complex<double> z = coef * std::exp(pole * (t0 + static_cast<double>(n + l) * dt));
      zr0[l] = z.real();
      zi0[l] = z.imag();
    }
    __m256d zr = _mm256_load_pd(zr0);
    __m256d zi = _mm256_load_pd(zi0);
    for (std::size_t g = 0; g < kReanchorGroups && n < n_vec; ++g, n += 4) {
      const __m256d acc = _mm256_loadu_pd(out.data() + n);
      _mm256_storeu_pd(out.data() + n, _mm256_add_pd(acc, zr));
      const __m256d nr = _mm256_fmsub_pd(zr, wr, _mm256_mul_pd(zi, wi));
      const __m256d ni = _mm256_fmadd_pd(zr, wi, _mm256_mul_pd(zi, wr));
      zr = nr;
      zi = ni;
    }
  }
  for (; n < n_total; ++n) {
    out[n] += (coef * std::exp(pole * (t0 + static_cast<double>(n) * dt))).real();
  }
}

std::complex<double> correlate_avx2(std::span<const double> x, double w, double p0) {
  const std::size_t n_total = x.size();
  const std::size_t n_vec = n_total / 4 * 4;
  const __m256d wr = _mm256_set1_pd(std::cos(4.0 * w));
  const __m256d wi = _mm256_set1_pd(std::sin(4.0 * w));
  __m256d acc_c = _mm256_setzero_pd();
  __m256d acc_s = _mm256_setzero_pd();

  std::size_t n = 0;
  while (n < n_vec) {
    alignas(32) double cr0[4];
    alignas(32) double si0[4];
    for (int l = 0; l < 4; ++l) {
      const double arg = w * static_cast<double>(n + l) + p0;
      cr0[l] = std::cos(arg);
      si0[l] = std::sin(arg);
    }
    __m256d cr = _mm256_load_pd(cr0);
    __m256d si = _mm256_load_pd(si0);
    for (std::size_t g = 0; g < kReanchorGroups && n < n_vec; ++g, n += 4) {
      const __m256d xv = _mm256_loadu_pd(x.data() + n);
      acc_c = _mm256_fmadd_pd(xv, cr, acc_c);
      acc_s = _mm256_fmadd_pd(xv, si, acc_s);
      const __m256d nr = _mm256_fmsub_pd(cr, wr, _mm256_mul_pd(si, wi));
      const __m256d ni = _mm256_fmadd_pd(cr, wi, _mm256_mul_pd(si, wr));
      cr = nr;
      si = ni;
    }
  }
  double c = hsum(acc_c);
  double s = hsum(acc_s);
  for (; n < n_total; ++n) {
    const double arg = w * static_cast<double>(n) + p0;
    c += x[n] * std::cos(arg);
    s += x[n] * std::sin(arg);
  }
  return {c, s};
}

double abs_max_avx2(std::span<const double> x) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t n = 0;
  for (; n + 4 <= x.size(); n += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x.data() + n)));
  }
  double r = hmax(m);
  for (; n < x.size(); ++n) r = std::fmax(r, std::abs(x[n]));
  return r;
}

std::ptrdiff_t last_above_avx2(std::span<const double> x, double threshold) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d thr = _mm256_set1_pd(threshold);
  std::size_t n = x.size();
  while (n % 4 != 0) {
    --n;
    if (std::abs(x[n]) > threshold) return static_cast<std::ptrdiff_t>(n);
  }
  while (n >= 4) {
    n -= 4;
    const __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(x.data() + n));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, thr, _CMP_GT_OQ));
    if (mask != 0) return static_cast<std::ptrdiff_t>(n) + (31 - __builtin_clz(static_cast<unsigned>(mask)));
  }
  return -1;
}

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{"avx2", damped_phasor_avx2, correlate_avx2, abs_max_avx2,
                                 last_above_avx2};
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace gridlock::kernels
