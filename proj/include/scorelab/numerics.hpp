#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace scorelab {

/// Uniform 1-D quadrature/search grid with at least two nodes.
struct Grid1D {
  double lower;
  double upper;
  std::size_t points;

  Grid1D(double lo, double hi, std::size_t n);

  double step() const {
    return (upper - lower) / static_cast<double>(points - 1);
  }
  std::vector<double> nodes() const;
};

/// Composite Simpson integral of f over the grid.  An odd interval count is
/// closed with a 3/8 segment so fourth-order accuracy is kept; a two-point
/// grid degrades to the trapezoid.  A non-finite integrand value raises
/// domain_error naming the node.
double integrate(const std::function<double(double)>& f, const Grid1D& grid);

/// Quadrature weights matching integrate(); useful when many integrands
/// share one grid.
std::vector<double> simpson_weights(const Grid1D& grid);

using ObjectiveFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient.  step <= 0 selects the default
/// cbrt(machine epsilon)·(1+|x_i|) per coordinate; an explicit step is used
/// as given.
std::vector<double> finite_diff_gradient(const ObjectiveFn& f,
                                         std::span<const double> x,
                                         double step = 0.0);

/// Central-difference Laplacian (sum of pure second differences per axis),
/// same step convention as finite_diff_gradient.
double finite_diff_laplacian(const ObjectiveFn& f, std::span<const double> x,
                             double step = 0.0);

/// Optional per-coordinate box; empty bounds vector means unconstrained.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
  bool empty() const { return lower.empty() && upper.empty(); }
  void clamp(std::span<double> x) const;
};

struct MinimizeOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  Box bounds;
};

struct MinimizeResult {
  std::vector<double> argmin;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Derivative-free simplex descent followed by a finite-difference polish
/// (Newton step when the local curvature is positive definite, damped
/// gradient step otherwise).  The converged flag requires both a successive
/// decrease below tolerance and a gradient norm below sqrt(tolerance).
MinimizeResult minimize(const ObjectiveFn& f, std::span<const double> start,
                        const MinimizeOptions& options = {});

}  // namespace scorelab
