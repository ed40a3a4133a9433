#include "scorelab/kernels.hpp"

#include <string>

#include "scorelab/errors.hpp"

namespace scorelab::kernels {

namespace detail {

double sum_scalar(std::span<const double>);
double dot_scalar(std::span<const double>, std::span<const double>);
double axpby_sum_sq_scalar(double, std::span<const double>, double,
                           std::span<const double>);
double max_abs_scalar(std::span<const double>);

#if defined(SCORELAB_KERNELS_AVX2)
double sum_avx2(std::span<const double>);
double dot_avx2(std::span<const double>, std::span<const double>);
double axpby_sum_sq_avx2(double, std::span<const double>, double,
                         std::span<const double>);
double max_abs_avx2(std::span<const double>);
#endif

#if defined(__aarch64__) && defined(__ARM_NEON)
double sum_neon(std::span<const double>);
double dot_neon(std::span<const double>, std::span<const double>);
double axpby_sum_sq_neon(double, std::span<const double>, double,
                         std::span<const double>);
double max_abs_neon(std::span<const double>);
#endif

}  // namespace detail

namespace {

struct Backend {
  std::string_view name;
  double (*sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*axpby_sum_sq)(double, std::span<const double>, double,
                         std::span<const double>);
  double (*max_abs)(std::span<const double>);
};

constexpr Backend kScalar{"scalar", detail::sum_scalar, detail::dot_scalar,
                          detail::axpby_sum_sq_scalar, detail::max_abs_scalar};

#if defined(SCORELAB_KERNELS_AVX2)
constexpr Backend kAvx2{"avx2", detail::sum_avx2, detail::dot_avx2,
                        detail::axpby_sum_sq_avx2, detail::max_abs_avx2};
#endif

#if defined(__aarch64__) && defined(__ARM_NEON)
constexpr Backend kNeon{"neon", detail::sum_neon, detail::dot_neon,
                        detail::axpby_sum_sq_neon, detail::max_abs_neon};
#endif

std::vector<const Backend*> usable_backends() {
  std::vector<const Backend*> out{&kScalar};
#if defined(SCORELAB_KERNELS_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    out.push_back(&kAvx2);
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
  out.push_back(&kNeon);  // baseline on aarch64
#endif
  return out;
}

// Fastest usable backend wins; "scalar" is always index 0.
const Backend* g_active = usable_backends().back();

}  // namespace

double sum(std::span<const double> x) { return g_active->sum(x); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw validation_error("kernels::dot: size mismatch");
  return g_active->dot(a, b);
}

double axpby_sum_sq(double a, std::span<const double> x, double b,
                    std::span<const double> y) {
  if (x.size() != y.size())
    throw validation_error("kernels::axpby_sum_sq: size mismatch");
  return g_active->axpby_sum_sq(a, x, b, y);
}

double max_abs(std::span<const double> x) { return g_active->max_abs(x); }

std::string_view active_backend() { return g_active->name; }

std::vector<std::string_view> available_backends() {
  std::vector<std::string_view> names;
  for (const Backend* b : usable_backends()) names.push_back(b->name);
  return names;
}

void force_backend(std::string_view name) {
  for (const Backend* b : usable_backends()) {
    if (b->name == name) {
      g_active = b;
      return;
    }
  }
  throw validation_error("kernels: backend '" + std::string(name) +
                         "' is not available on this machine");
}

}  // namespace scorelab::kernels
