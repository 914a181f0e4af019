#pragma once
// Data-parallel inner loops used by the settling-time search and the DFT
// based THD measurement. Every kernel has a scalar reference version and an
// AVX2/FMA version; the active table is picked once at runtime from CPUID and
// can be pinned with GRIDLOCK_SIMD=scalar.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace gridlock::kernels {

// out[n] += Re(coef * exp(pole * (t0 + n*dt))) for n in [0, out.size()).
using DampedPhasorFn = void (*)(std::complex<double> coef, std::complex<double> pole, double t0,
                                double dt, std::span<double> out);

// Returns (sum x[n] cos(w n + p0), sum x[n] sin(w n + p0)).
using CorrelateFn = std::complex<double> (*)(std::span<const double> x, double w, double p0);

// Largest |x[n]|; 0 for an empty span.
using AbsMaxFn = double (*)(std::span<const double> x);

// Index of the last element with |x[n]| > threshold, or -1 when none.
using LastAboveFn = std::ptrdiff_t (*)(std::span<const double> x, double threshold);

struct KernelTable {
  std::string_view name;
  DampedPhasorFn damped_phasor;
  CorrelateFn correlate;
  AbsMaxFn abs_max;
  LastAboveFn last_above;
};

const KernelTable& scalar_table();

// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// Table selected for this process.
const KernelTable& active();

}  // namespace gridlock::kernels
