#include "scorelab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/kernels.hpp"
#include "scorelab/matrix.hpp"

namespace scorelab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kFdStep = std::cbrt(kEps);         // first-derivative default
const double kHessStep = std::pow(kEps, 0.25);  // internal second-derivative step

double guarded(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

Grid1D::Grid1D(double lo, double hi, std::size_t n)
    : lower(lo), upper(hi), points(n) {
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw validation_error("Grid1D: bounds must be finite");
  if (!(lo < hi)) throw validation_error("Grid1D: lower bound must be below upper");
  if (n < 2) throw validation_error("Grid1D: at least two points required");
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(points);
  const double h = step();
  for (std::size_t i = 0; i < points; ++i)
    x[i] = lower + h * static_cast<double>(i);
  x.back() = upper;
  return x;
}

std::vector<double> simpson_weights(const Grid1D& grid) {
  const std::size_t n = grid.points - 1;  // interval count
  const double h = grid.step();
  std::vector<double> w(grid.points, 0.0);
  if (n == 1) {
    w[0] = w[1] = h / 2.0;
    return w;
  }
  // Even interval count: plain composite Simpson.  Odd: composite Simpson on
  // the first n-3 intervals, 3/8 rule on the last three, weights merged at
  // the junction node; both pieces are fourth order.
  const std::size_t simpson_end = (n % 2 == 0) ? n : n - 3;
  if (simpson_end > 0) {
    w[0] += h / 3.0;
    w[simpson_end] += h / 3.0;
    for (std::size_t i = 1; i < simpson_end; ++i)
      w[i] += (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
  }
  if (n % 2 == 1) {
    const double c = 3.0 * h / 8.0;
    w[n - 3] += c;
    w[n - 2] += 3.0 * c;
    w[n - 1] += 3.0 * c;
    w[n] += c;
  }
  return w;
}

double integrate(const std::function<double(double)>& f, const Grid1D& grid) {
  const std::vector<double> x = grid.nodes();
  const std::vector<double> w = simpson_weights(grid);
  std::vector<double> fx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    fx[i] = f(x[i]);
    if (!std::isfinite(fx[i]))
      throw domain_error("integrate: integrand is not finite at node " +
                         std::to_string(i) + " (x = " + std::to_string(x[i]) +
                         ")");
  }
  return kernels::dot(w, fx);
}

std::vector<double> finite_diff_gradient(const ObjectiveFn& f,
                                         std::span<const double> x,
                                         double step) {
  std::vector<double> g(x.size());
  std::vector<double> xt(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step > 0.0 ? step : kFdStep * (1.0 + std::fabs(x[i]));
    const double xi = x[i];
    xt[i] = xi + h;
    const double fp = f(xt);
    xt[i] = xi - h;
    const double fm = f(xt);
    xt[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double finite_diff_laplacian(const ObjectiveFn& f, std::span<const double> x,
                             double step) {
  std::vector<double> xt(x.begin(), x.end());
  const double f0 = f(xt);
  double lap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step > 0.0 ? step : kFdStep * (1.0 + std::fabs(x[i]));
    const double xi = x[i];
    xt[i] = xi + h;
    const double fp = f(xt);
    xt[i] = xi - h;
    const double fm = f(xt);
    xt[i] = xi;
    lap += (fp - 2.0 * f0 + fm) / (h * h);
  }
  return lap;
}

void Box::clamp(std::span<double> x) const {
  if (empty()) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i < lower.size() && x[i] < lower[i]) x[i] = lower[i];
    if (i < upper.size() && x[i] > upper[i]) x[i] = upper[i];
  }
}

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

// Central-difference Hessian used only inside the polish phase.
Matrix fd_hessian(const ObjectiveFn& f, std::span<const double> x, double f0) {
  const std::size_t d = x.size();
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i)
    h[i] = kHessStep * (1.0 + std::fabs(x[i]));
  Matrix hess(d, d);
  std::vector<double> xt(x.begin(), x.end());
  for (std::size_t i = 0; i < d; ++i) {
    xt[i] = x[i] + h[i];
    const double fp = f(xt);
    xt[i] = x[i] - h[i];
    const double fm = f(xt);
    xt[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < d; ++j) {
      xt[i] = x[i] + h[i];
      xt[j] = x[j] + h[j];
      const double fpp = f(xt);
      xt[j] = x[j] - h[j];
      const double fpm = f(xt);
      xt[i] = x[i] - h[i];
      const double fmm = f(xt);
      xt[j] = x[j] + h[j];
      const double fmp = f(xt);
      xt[i] = x[i];
      xt[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return hess;
}

}  // namespace

MinimizeResult minimize(const ObjectiveFn& f, std::span<const double> start,
                        const MinimizeOptions& options) {
  const std::size_t d = start.size();
  if (d == 0) throw validation_error("minimize: empty start point");
  const double tol = options.tolerance;
  const Box& box = options.bounds;

  auto eval = [&](std::vector<double>& x) {
    box.clamp(x);
    return guarded(f(x));
  };

  // --- simplex phase -------------------------------------------------------
  std::vector<Vertex> s(d + 1);
  s[0].x.assign(start.begin(), start.end());
  s[0].f = eval(s[0].x);
  for (std::size_t i = 0; i < d; ++i) {
    s[i + 1].x = s[0].x;
    s[i + 1].x[i] += 0.05 * (1.0 + std::fabs(s[0].x[i]));
    s[i + 1].f = eval(s[i + 1].x);
  }

  int iter = 0;
  const int nm_budget = std::min<int>(options.max_iterations,
                                      std::max<int>(200, 400 * static_cast<int>(d)));
  // Ties must keep the incumbent in front: on a machine-flat plateau every
  // vertex compares equal, and an unstable sort would let a tying newcomer
  // displace an exactly-optimal start point.
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

  while (iter < nm_budget) {
    std::stable_sort(s.begin(), s.end(), by_value);
    const double fspread = s[d].f - s[0].f;
    double xspread = 0.0;
    for (std::size_t i = 1; i <= d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        xspread = std::max(xspread, std::fabs(s[i].x[j] - s[0].x[j]));
    if (fspread <= std::max(1e-14 * (1.0 + std::fabs(s[0].f)), tol * 1e-3) &&
        xspread <= 1e-10 * (1.0 + kernels::max_abs(s[0].x)))
      break;

    ++iter;
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) centroid[j] += s[i].x[j];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto blend = [&](double t) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j)
        x[j] = centroid[j] + t * (centroid[j] - s[d].x[j]);
      return x;
    };

    std::vector<double> xr = blend(1.0);
    const double fr = eval(xr);
    if (fr < s[0].f) {
      std::vector<double> xe = blend(2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        s[d] = {std::move(xe), fe};
      } else {
        s[d] = {std::move(xr), fr};
      }
    } else if (fr < s[d - 1].f) {
      s[d] = {std::move(xr), fr};
    } else {
      const bool outside = fr < s[d].f;
      std::vector<double> xc = blend(outside ? 0.5 : -0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, s[d].f)) {
        s[d] = {std::move(xc), fc};
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 1; i <= d; ++i) {
          for (std::size_t j = 0; j < d; ++j)
            s[i].x[j] = s[0].x[j] + 0.5 * (s[i].x[j] - s[0].x[j]);
          s[i].f = eval(s[i].x);
        }
      }
    }
  }
  std::stable_sort(s.begin(), s.end(), by_value);

  // --- finite-difference polish --------------------------------------------
  MinimizeResult result;
  std::vector<double> x = s[0].x;
  double fx = s[0].f;
  bool converged = false;
  std::vector<double> g = finite_diff_gradient(f, x);
  double gnorm = std::sqrt(kernels::dot(g, g));

  const int polish_budget = std::min(400, options.max_iterations - iter);
  for (int k = 0; k < polish_budget; ++k) {
    if (!std::isfinite(fx)) break;
    if (gnorm <= std::sqrt(tol) * (1.0 + std::fabs(fx))) {
      converged = true;
      break;
    }
    ++iter;

    // Newton direction when curvature allows, steepest descent otherwise.
    std::vector<double> dir;
    bool newton = false;
    if (gnorm > 0.0) {
      try {
        const Matrix h = fd_hessian(f, x, fx);
        dir = Cholesky::factor(h).solve(g);
        newton = true;
      } catch (const domain_error&) {
        dir = g;
      }
    } else {
      dir = g;
    }
    double slope = kernels::dot(g, dir);
    if (!(slope > 0.0)) {  // not a descent direction; fall back to gradient
      dir = g;
      slope = gnorm * gnorm;
      newton = false;
    }
    if (slope <= 0.0) break;

    double t = newton ? 1.0 : 1.0 / (1.0 + gnorm);
    double fnew = std::numeric_limits<double>::infinity();
    std::vector<double> xnew;
    while (t > 1e-14) {
      xnew = x;
      for (std::size_t j = 0; j < d; ++j) xnew[j] -= t * dir[j];
      box.clamp(xnew);
      fnew = guarded(f(xnew));
      if (fnew <= fx - 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (!(fnew < fx)) {  // no progress in this direction
      if (gnorm < std::sqrt(tol)) converged = true;
      break;
    }
    const double decrease = fx - fnew;
    x = std::move(xnew);
    fx = fnew;
    g = finite_diff_gradient(f, x);
    gnorm = std::sqrt(kernels::dot(g, g));
    if (decrease < tol && gnorm < std::sqrt(tol)) {
      converged = true;
      break;
    }
  }

  result.argmin = std::move(x);
  result.value = fx;
  result.converged = converged && std::isfinite(fx);
  result.iterations = iter;
  result.gradient_norm = gnorm;
  return result;
}

}  // namespace scorelab
