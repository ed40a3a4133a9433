// AVX2 + FMA variants.  Compiled with -mavx2 -mfma; only dispatched to when
// the running CPU reports both features.  4-lane main loop, scalar tail.

#include <cstddef>
#include <span>

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace scorelab::kernels::detail {

static inline double hsum256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(std::span<const double> x) {
  const double* p = x.data();
  std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + i));
  double s = hsum256(acc);
  for (; i < n; ++i) s += p[i];
  return s;
}

double dot_avx2(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc);
  double s = hsum256(acc);
  for (; i < n; ++i) s += pa[i] * pb[i];
  return s;
}

double axpby_sum_sq_avx2(double a, std::span<const double> x, double b,
                         std::span<const double> y) {
  const double* px = x.data();
  const double* py = y.data();
  std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(px + i));
    t = _mm256_fmadd_pd(vb, _mm256_loadu_pd(py + i), t);
    acc = _mm256_fmadd_pd(t, t, acc);
  }
  double s = hsum256(acc);
  for (; i < n; ++i) {
    const double t = a * px[i] + b * py[i];
    s += t * t;
  }
  return s;
}

double max_abs_avx2(std::span<const double> x) {
  const double* p = x.data();
  std::size_t n = x.size();
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_andnot_pd(signmask, _mm256_loadu_pd(p + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = lanes[0];
  for (int k = 1; k < 4; ++k) r = r > lanes[k] ? r : lanes[k];
  for (; i < n; ++i) {
    const double v = p[i] < 0 ? -p[i] : p[i];
    if (v > r) r = v;
  }
  return r;
}

}  // namespace scorelab::kernels::detail

#endif  // __AVX2__ && __FMA__
