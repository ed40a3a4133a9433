// NEON variants for aarch64 (2-lane doubles).  Same loop structure as the
// AVX2 file: vector main loop, scalar tail.

#include <cstddef>
#include <span>

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace scorelab::kernels::detail {

double sum_neon(std::span<const double> x) {
  const double* p = x.data();
  std::size_t n = x.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(p + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += p[i];
  return s;
}

double dot_neon(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  std::size_t n = a.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(pa + i), vld1q_f64(pb + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += pa[i] * pb[i];
  return s;
}

double axpby_sum_sq_neon(double a, std::span<const double> x, double b,
                         std::span<const double> y) {
  const double* px = x.data();
  const double* py = y.data();
  std::size_t n = x.size();
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t t = vmulq_f64(va, vld1q_f64(px + i));
    t = vfmaq_f64(t, vb, vld1q_f64(py + i));
    acc = vfmaq_f64(acc, t, t);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double t = a * px[i] + b * py[i];
    s += t * t;
  }
  return s;
}

double max_abs_neon(std::span<const double> x) {
  const double* p = x.data();
  std::size_t n = x.size();
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(p + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) {
    const double v = p[i] < 0 ? -p[i] : p[i];
    if (v > r) r = v;
  }
  return r;
}

}  // namespace scorelab::kernels::detail

#endif  // __aarch64__ && __ARM_NEON
