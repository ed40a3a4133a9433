#include <cmath>
#include <cstddef>
#include <span>

// Reference implementations.  Plain loops, one accumulator, no tricks:
// these define the semantics the vector paths are tested against.

namespace scorelab::kernels::detail {

double sum_scalar(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot_scalar(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double axpby_sum_sq_scalar(double a, std::span<const double> x, double b,
                           std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = a * x[i] + b * y[i];
    acc += t * t;
  }
  return acc;
}

double max_abs_scalar(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace scorelab::kernels::detail
