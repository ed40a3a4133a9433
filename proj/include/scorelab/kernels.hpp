#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace scorelab::kernels {

// Reduction kernels behind the numeric layer.  Each has a portable scalar
// reference implementation plus vectorized variants (AVX2 on x86, NEON on
// aarch64) selected once at startup from CPU capabilities.  Vector paths
// reassociate partial sums, so backends agree to rounding error, not bitwise;
// within one backend results are deterministic.

/// Σ x[i]
double sum(std::span<const double> x);

/// Σ a[i]·b[i]; sizes must match.
double dot(std::span<const double> a, std::span<const double> b);

/// Σ (a·x[i] + b·y[i])²; the workhorse behind quadratic-form objectives
/// and residual sums of squares.  Sizes must match.
double axpby_sum_sq(double a, std::span<const double> x, double b,
                    std::span<const double> y);

/// max |x[i]|; 0 for an empty span.
double max_abs(std::span<const double> x);

/// Name of the backend currently in use ("scalar", "avx2", "neon").
std::string_view active_backend();

/// Backends compiled in and usable on this CPU.
std::vector<std::string_view> available_backends();

/// Force a specific backend by name (mainly for equivalence tests).
/// Throws scorelab::validation_error if the backend is unavailable.
void force_backend(std::string_view name);

}  // namespace scorelab::kernels
