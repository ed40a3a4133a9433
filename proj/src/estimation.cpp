#include "scorelab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scorelab/errors.hpp"
#include "scorelab/kernels.hpp"

namespace scorelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double v) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) *
         (1.0 + std::fabs(v));
}

// Standard normal pdf scaled to sd sigma, as a LocationDensity shape.
LocationDensity scaled_normal_shape(double sigma) {
  LocationDensity d;
  d.name = "normal";
  const double inv_s = 1.0 / sigma;
  const double c = inv_s / std::sqrt(2.0 * std::numbers::pi);
  d.pdf = [inv_s, c](double u) {
    const double z = u * inv_s;
    return c * std::exp(-0.5 * z * z);
  };
  d.dpdf = [inv_s, c](double u) {
    const double z = u * inv_s;
    return -z * inv_s * c * std::exp(-0.5 * z * z);
  };
  d.draw = [sigma](RandomStream& rng) { return sigma * rng.next_normal(); };
  d.derivative_bounded = true;
  return d;
}

double open_uniform(RandomStream& rng) {
  double u = rng.next_uniform();
  while (u == 0.0) u = rng.next_uniform();
  return u;  // next_uniform is already < 1
}

void symmetrize(Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
}

void accumulate_outer(Matrix& acc, std::span<const double> v, double weight) {
  for (std::size_t i = 0; i < acc.rows(); ++i)
    for (std::size_t j = 0; j < acc.cols(); ++j)
      acc(i, j) += weight * v[i] * v[j];
}

double psi_dual_term(const PsiTriple& psi, double t) {
  if (t <= 0.0) return psi.value(0.0);  // limit of psi(t) - t psi'(t)
  return psi.value(t) - t * psi.d1(t);
}

}  // namespace

// ---------------------------------------------------------------------------
// Family defaults

std::vector<double> Family::grad_log_density_x(
    std::span<const double> x, std::span<const double> theta) const {
  const std::vector<double> th(theta.begin(), theta.end());
  return finite_diff_gradient(
      [this, &th](std::span<const double> xv) { return log_density(xv, th); },
      x);
}

double Family::laplacian_log_density_x(std::span<const double> x,
                                       std::span<const double> theta) const {
  const std::vector<double> th(theta.begin(), theta.end());
  return finite_diff_laplacian(
      [this, &th](std::span<const double> xv) { return log_density(xv, th); },
      x);
}

void Family::sample(std::span<const double>, RandomStream&,
                    std::span<double>) const {
  throw capability_error(name() + " has no sampler");
}

Grid1D Family::x_quadrature(std::span<const double>) const {
  throw capability_error(name() +
                         " does not define an observation quadrature grid");
}

DiscreteDistribution Family::discrete_law(std::span<const double>) const {
  throw capability_error(name() + " is not a finite-support family");
}

bool Family::closed_form_gradient(const RuleSpec&, std::span<const double>,
                                  std::span<const double>,
                                  std::span<double>) const {
  return false;
}

std::vector<double> Family::default_start(const Matrix&) const {
  std::vector<double> start(param_dim(), 0.0);
  theta_domain().clamp(start);
  return start;
}

// ---------------------------------------------------------------------------
// Location density shapes

LocationDensity location_normal() { return scaled_normal_shape(1.0); }

LocationDensity location_logistic() {
  LocationDensity d;
  d.name = "logistic";
  d.pdf = [](double u) {
    const double F = 1.0 / (1.0 + std::exp(-u));
    return F * (1.0 - F);
  };
  d.dpdf = [](double u) {
    const double F = 1.0 / (1.0 + std::exp(-u));
    return F * (1.0 - F) * (1.0 - 2.0 * F);
  };
  d.draw = [](RandomStream& rng) {
    const double u = open_uniform(rng);
    return std::log(u / (1.0 - u));
  };
  d.derivative_bounded = true;
  return d;
}

LocationDensity location_cauchy() {
  LocationDensity d;
  d.name = "cauchy";
  d.pdf = [](double u) { return 1.0 / (std::numbers::pi * (1.0 + u * u)); };
  d.dpdf = [](double u) {
    const double s = 1.0 + u * u;
    return -2.0 * u / (std::numbers::pi * s * s);
  };
  d.draw = [](RandomStream& rng) {
    return std::tan(std::numbers::pi * (open_uniform(rng) - 0.5));
  };
  d.derivative_bounded = true;
  return d;
}

LocationDensity location_gumbel() {
  LocationDensity d;
  d.name = "extreme-value";
  d.pdf = [](double u) { return std::exp(-u - std::exp(-u)); };
  d.dpdf = [](double u) {
    const double ex = std::exp(-u);
    const double f = std::exp(-u - ex);
    if (f == 0.0) return 0.0;  // both tails vanish; avoid 0 * inf
    return f * (ex - 1.0);
  };
  d.draw = [](RandomStream& rng) {
    return -std::log(-std::log(open_uniform(rng)));
  };
  d.derivative_bounded = true;
  return d;
}

LocationDensity location_density_by_name(const std::string& name) {
  if (name == "normal") return location_normal();
  if (name == "logistic") return location_logistic();
  if (name == "cauchy") return location_cauchy();
  if (name == "extreme-value" || name == "gumbel") return location_gumbel();
  throw validation_error(
      "unknown location density '" + name +
      "'; available: normal, logistic, cauchy, extreme-value");
}

// ---------------------------------------------------------------------------
// LocationFamily

LocationFamily::LocationFamily(LocationDensity shape)
    : shape_(std::move(shape)) {
  if (!shape_.pdf || !shape_.dpdf)
    throw validation_error(
        "LocationFamily needs a density shape with pdf and dpdf");
}

double LocationFamily::log_density(std::span<const double> x,
                                   std::span<const double> theta) const {
  const double f = shape_.pdf(x[0] - theta[0]);
  return f > 0.0 ? std::log(f) : -kInf;
}

void LocationFamily::sample(std::span<const double> theta, RandomStream& rng,
                            std::span<double> out) const {
  if (!shape_.draw) throw capability_error(name() + " has no sampler");
  out[0] = theta[0] + shape_.draw(rng);
}

Grid1D LocationFamily::x_quadrature(std::span<const double> theta) const {
  return Grid1D(theta[0] - 60.0, theta[0] + 60.0, 4001);
}

bool LocationFamily::closed_form_gradient(const RuleSpec& rule,
                                          std::span<const double> x,
                                          std::span<const double> theta,
                                          std::span<double> out) const {
  const double u = x[0] - theta[0];
  const double f = shape_.pdf(u);
  switch (rule.family) {
    case RuleFamily::Log:
      if (f <= 0.0) return false;
      out[0] = shape_.dpdf(u) / f;
      return true;
    case RuleFamily::Tsallis: {
      const double g = rule.gamma;
      // psi''(t) = g (g-1) t^(g-2); the gradient vanishes with the density
      // when psi'' is bounded near zero (g >= 2).
      if (f <= 0.0) {
        if (g < 2.0) return false;
        out[0] = 0.0;
        return true;
      }
      out[0] = g * (g - 1.0) * std::pow(f, g - 2.0) * shape_.dpdf(u);
      return true;
    }
    case RuleFamily::Bregman: {
      if (!rule.psi) return false;
      if (f <= 0.0) {
        if (!rule.psi->d2_bounded_near_zero) return false;
        out[0] = 0.0;
        return true;
      }
      out[0] = rule.psi->d2(f) * shape_.dpdf(u);
      return true;
    }
    default:
      return false;
  }
}

std::vector<double> LocationFamily::default_start(const Matrix& data) const {
  std::vector<double> col;
  col.reserve(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) col.push_back(data(i, 0));
  if (col.empty()) return {0.0};
  // Sample median; for even counts the midpoint of the central pair, so a
  // symmetric sample starts the search exactly at its symmetry point.
  const std::size_t mid = col.size() / 2;
  std::nth_element(col.begin(), col.begin() + mid, col.end());
  double median = col[mid];
  if (col.size() % 2 == 0) {
    const double below =
        *std::max_element(col.begin(), col.begin() + mid);
    median = below + 0.5 * (median - below);
  }
  return {median};
}

// ---------------------------------------------------------------------------
// NormalLocationFamily

NormalLocationFamily::NormalLocationFamily(double sigma)
    : LocationFamily(scaled_normal_shape(sigma)), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw validation_error("NormalLocationFamily: sigma must be positive");
}

std::vector<double> NormalLocationFamily::grad_log_density_x(
    std::span<const double> x, std::span<const double> theta) const {
  return {-(x[0] - theta[0]) / (sigma_ * sigma_)};
}

double NormalLocationFamily::laplacian_log_density_x(
    std::span<const double>, std::span<const double>) const {
  return -1.0 / (sigma_ * sigma_);
}

bool NormalLocationFamily::closed_form_gradient(const RuleSpec& rule,
                                                std::span<const double> x,
                                                std::span<const double> theta,
                                                std::span<double> out) const {
  if (rule.family == RuleFamily::Log) {
    // Exact ratio f'/f, valid even where the density underflows.
    out[0] = (theta[0] - x[0]) / (sigma_ * sigma_);
    return true;
  }
  return LocationFamily::closed_form_gradient(rule, x, theta, out);
}

// ---------------------------------------------------------------------------
// BernoulliFamily

Box BernoulliFamily::theta_domain() const {
  return Box{{1e-9}, {1.0 - 1e-9}};
}

double BernoulliFamily::log_density(std::span<const double> x,
                                    std::span<const double> theta) const {
  const double q = theta[0];
  if (x[0] == 1.0) return std::log(q);
  if (x[0] == 0.0) return std::log(1.0 - q);
  throw validation_error("bernoulli observations must be 0 or 1");
}

DiscreteDistribution BernoulliFamily::discrete_law(
    std::span<const double> theta) const {
  return DiscreteDistribution::binary(theta[0]);
}

void BernoulliFamily::sample(std::span<const double> theta, RandomStream& rng,
                             std::span<double> out) const {
  out[0] = rng.next_uniform() < theta[0] ? 1.0 : 0.0;
}

bool BernoulliFamily::closed_form_gradient(const RuleSpec& rule,
                                           std::span<const double> x,
                                           std::span<const double> theta,
                                           std::span<double> out) const {
  const double q = theta[0];
  if (rule.family == RuleFamily::Brier) {
    out[0] = -2.0 * (x[0] - q);
    return true;
  }
  if (rule.family == RuleFamily::Log) {
    out[0] = x[0] == 1.0 ? -1.0 / q : 1.0 / (1.0 - q);
    return true;
  }
  return false;
}

std::vector<double> BernoulliFamily::default_start(const Matrix& data) const {
  double mean = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) mean += data(i, 0);
  if (data.rows() > 0) mean /= static_cast<double>(data.rows());
  return {std::min(1.0 - 1e-3, std::max(1e-3, mean))};
}

// ---------------------------------------------------------------------------
// Registry and DensityModel bridge

std::shared_ptr<const Family> family_by_name(const std::string& name) {
  if (name == "normal-location")
    return std::make_shared<NormalLocationFamily>(1.0);
  if (name == "logistic-location")
    return std::make_shared<LocationFamily>(location_logistic());
  if (name == "cauchy-location")
    return std::make_shared<LocationFamily>(location_cauchy());
  if (name == "extreme-value-location" || name == "gumbel-location")
    return std::make_shared<LocationFamily>(location_gumbel());
  if (name == "bernoulli") return std::make_shared<BernoulliFamily>();
  throw validation_error(
      "unknown family '" + name +
      "'; known families: normal-location, logistic-location, "
      "cauchy-location, extreme-value-location, bernoulli");
}

DensityModel to_density_model(std::shared_ptr<const Family> family,
                              std::vector<double> theta) {
  if (!family) throw validation_error("to_density_model: null family");
  if (theta.size() != family->param_dim())
    throw validation_error("to_density_model: parameter dimension mismatch");
  DensityModel m;
  m.dimension = family->obs_dim();
  m.normalized = true;
  auto th = std::make_shared<const std::vector<double>>(std::move(theta));
  m.log_density = [family, th](std::span<const double> x) {
    return family->log_density(x, *th);
  };
  if (family->has_spatial_derivatives()) {
    m.grad_log_density = [family, th](std::span<const double> x) {
      return family->grad_log_density_x(x, *th);
    };
    m.laplacian_log_density = [family, th](std::span<const double> x) {
      return family->laplacian_log_density_x(x, *th);
    };
  }
  return m;
}

// ---------------------------------------------------------------------------
// ScoreModel

ScoreModel::ScoreModel(RuleSpec rule, std::shared_ptr<const Family> family)
    : rule_(std::move(rule)), family_(std::move(family)) {
  if (!family_) throw validation_error("ScoreModel: null family");
  if (family_->discrete() && rule_.family == RuleFamily::Hyvarinen)
    throw validation_error(
        "hyvarinen rule needs a continuous sample space; family " +
        family_->name() + " is discrete");
  if (!family_->discrete() && (rule_.family == RuleFamily::Brier ||
                               rule_.family == RuleFamily::FromLoss))
    throw validation_error(rule_.name() +
                           " rule scores finite supports; family " +
                           family_->name() + " is continuous");
}

double ScoreModel::score(std::span<const double> x,
                         std::span<const double> theta) const {
  if (x.size() != family_->obs_dim())
    throw validation_error("ScoreModel::score: observation dimension mismatch");
  if (theta.size() != family_->param_dim())
    throw validation_error("ScoreModel::score: parameter dimension mismatch");

  if (family_->discrete()) {
    const DiscreteDistribution law = family_->discrete_law(theta);
    const auto idx = static_cast<long long>(std::llround(x[0]));
    if (idx < 0 || static_cast<std::size_t>(idx) >= law.size() ||
        std::fabs(x[0] - static_cast<double>(idx)) > 1e-9)
      throw validation_error(
          "ScoreModel::score: observation is not a support index");
    return evaluate_score(rule_, static_cast<std::size_t>(idx), law);
  }

  switch (rule_.family) {
    case RuleFamily::Log:
      return -family_->log_density(x, theta);
    case RuleFamily::Hyvarinen: {
      const std::vector<double> grad = family_->grad_log_density_x(x, theta);
      const double lap = family_->laplacian_log_density_x(x, theta);
      return lap + 0.5 * kernels::dot(grad, grad);
    }
    case RuleFamily::Tsallis:
    case RuleFamily::Bregman: {
      if (family_->obs_dim() != 1)
        throw capability_error(rule_.name() +
                               " scoring of multivariate families is not "
                               "implemented");
      const PsiTriple psi = rule_.family == RuleFamily::Tsallis
                                ? psi_power(rule_.gamma)
                                : *rule_.psi;
      double dual;
      if (cached_dual_ && family_->location_invariant_integral()) {
        dual = *cached_dual_;
      } else {
        const Grid1D grid = family_->x_quadrature(theta);
        const std::vector<double> w = simpson_weights(grid);
        const std::vector<double> nodes = grid.nodes();
        dual = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          const double q = std::exp(family_->log_density(
              std::span<const double>(&nodes[i], 1), theta));
          dual += w[i] * psi_dual_term(psi, q);
        }
        if (family_->location_invariant_integral()) cached_dual_ = dual;
      }
      const double qx = std::exp(family_->log_density(x, theta));
      const double d1 = qx > 0.0 ? psi.d1(qx) : psi.d1(0.0);
      if (std::isinf(d1) && d1 < 0.0) return kInf;
      return -d1 - dual;
    }
    case RuleFamily::Brier:
    case RuleFamily::FromLoss:
      break;  // rejected in the constructor
  }
  throw validation_error("ScoreModel::score: unhandled rule family");
}

std::vector<double> ScoreModel::gradient(std::span<const double> x,
                                         std::span<const double> theta) const {
  std::vector<double> out(family_->param_dim());
  if (family_->closed_form_gradient(rule_, x, theta, out)) return out;

  if (!std::isfinite(score(x, theta))) {
    std::fill(out.begin(), out.end(), kInf);
    return out;
  }
  std::vector<double> th(theta.begin(), theta.end());
  for (std::size_t j = 0; j < th.size(); ++j) {
    const double h = fd_step(th[j]);
    const double save = th[j];
    th[j] = save + h;
    const double up = score(x, th);
    th[j] = save - h;
    const double down = score(x, th);
    th[j] = save;
    out[j] = (up - down) / (2.0 * h);
  }
  return out;
}

double ScoreModel::total_score(const Matrix& data,
                               std::span<const double> theta) const {
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    total += score(data.row(i), theta);
    if (std::isnan(total)) return total;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Minimum-score estimation

EstimationResult minimum_score_estimate(const ScoreModel& model,
                                        const Matrix& data,
                                        const EstimationOptions& options) {
  const std::size_t n = data.rows();
  const std::size_t p = model.family().param_dim();
  if (n == 0) throw validation_error("minimum_score_estimate: empty data");
  if (data.cols() != model.family().obs_dim())
    throw validation_error(
        "minimum_score_estimate: data has " + std::to_string(data.cols()) +
        " columns, family expects " +
        std::to_string(model.family().obs_dim()));

  MinimizeOptions mopt = options.minimize;
  if (mopt.bounds.empty()) mopt.bounds = model.family().theta_domain();

  std::vector<double> start = options.start.empty()
                                  ? model.family().default_start(data)
                                  : options.start;
  if (start.size() != p)
    throw validation_error("minimum_score_estimate: start has wrong dimension");
  mopt.bounds.clamp(start);

  const double inv_n = 1.0 / static_cast<double>(n);
  const MinimizeResult fit = minimize(
      [&](std::span<const double> th) {
        return model.total_score(data, th) * inv_n;
      },
      start, mopt);

  EstimationResult result;
  result.theta = fit.argmin;
  result.objective = fit.value * static_cast<double>(n);
  result.converged = fit.converged;
  result.iterations = fit.iterations;
  result.n = n;

  // The simplex identifies the minimizer only up to the rounding noise of
  // the objective, which on flat stretches can span ~1e-4 of parameter.
  // The estimating equation resolves further: at an exact root the
  // per-observation gradients cancel bitwise (e.g. the median start of a
  // symmetric sample).  Prefer such a candidate whenever its objective
  // value is tied within a few ulps.
  if (start != result.theta) {
    auto mean_grad_norm = [&](const std::vector<double>& th) {
      std::vector<double> sum(p, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> g = model.gradient(data.row(i), th);
        for (std::size_t j = 0; j < p; ++j) sum[j] += g[j];
      }
      double norm = 0.0;
      for (double v : sum) norm += v * v;
      return std::sqrt(norm) * inv_n;
    };
    const double f_start = model.total_score(data, start) * inv_n;
    const double slack =
        8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(fit.value));
    if (std::isfinite(f_start) && f_start <= fit.value + slack) {
      const double eq_start = mean_grad_norm(start);
      const double eq_fit = mean_grad_norm(result.theta);
      if (std::isfinite(eq_start) && eq_start < eq_fit) {
        result.theta = start;
        result.objective = f_start * static_cast<double>(n);
      }
    }
  }
  if (!options.compute_sandwich) return result;

  // Per-observation gradients at the estimate.
  Matrix grads(n, p);
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> g = model.gradient(data.row(i), result.theta);
    for (std::size_t j = 0; j < p; ++j) {
      grads(i, j) = g[j];
      if (!std::isfinite(g[j])) finite = false;
    }
  }
  if (!finite) {
    result.degeneracy =
        "score gradient is not finite at the estimate for at least one "
        "observation";
    return result;
  }

  Matrix j_hat(p, p);
  for (std::size_t i = 0; i < n; ++i)
    accumulate_outer(j_hat, grads.row(i), inv_n);
  symmetrize(j_hat);

  // K = d/dtheta of the mean gradient, central differences, symmetrized.
  Matrix k_hat(p, p);
  std::vector<double> th(result.theta);
  for (std::size_t j = 0; j < p; ++j) {
    const double h = fd_step(th[j]);
    const double save = th[j];
    std::vector<double> up(p, 0.0), down(p, 0.0);
    th[j] = save + h;
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> g = model.gradient(data.row(i), th);
      for (std::size_t r = 0; r < p; ++r) up[r] += g[r];
    }
    th[j] = save - h;
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> g = model.gradient(data.row(i), th);
      for (std::size_t r = 0; r < p; ++r) down[r] += g[r];
    }
    th[j] = save;
    for (std::size_t r = 0; r < p; ++r)
      k_hat(r, j) = (up[r] - down[r]) * inv_n / (2.0 * h);
  }
  symmetrize(k_hat);

  result.j_hat = j_hat;
  result.k_hat = k_hat;
  try {
    const Matrix j_inv = inverse_spd(j_hat);
    Matrix g = multiply(multiply(k_hat, j_inv), k_hat);
    symmetrize(g);
    result.godambe = g;
    Matrix sandwich = inverse_spd(g);
    for (double& v : sandwich.data()) v *= inv_n;
    result.sandwich_cov = std::move(sandwich);
  } catch (const scorelab::error& e) {
    result.degeneracy = e.what();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Unbiasedness check

bool UnbiasednessCheck::within(double k) const {
  for (std::size_t i = 0; i < mean.size(); ++i)
    if (std::fabs(mean[i]) > k * se[i]) return false;
  return true;
}

UnbiasednessCheck check_unbiased_estimating_equation(const ScoreModel& model,
                                                     std::span<const double> theta,
                                                     std::size_t n_draws,
                                                     SeedSpec seed) {
  if (n_draws < 2)
    throw validation_error(
        "check_unbiased_estimating_equation: need at least 2 draws");
  if (!model.family().has_sampler())
    throw capability_error(model.family().name() + " has no sampler");

  const std::size_t p = model.family().param_dim();
  RandomStream rng(seed);
  std::vector<double> x(model.family().obs_dim());
  std::vector<double> sum(p, 0.0), sum_sq(p, 0.0);
  for (std::size_t d = 0; d < n_draws; ++d) {
    model.family().sample(theta, rng, x);
    const std::vector<double> g = model.gradient(x, theta);
    for (std::size_t j = 0; j < p; ++j) {
      sum[j] += g[j];
      sum_sq[j] += g[j] * g[j];
    }
  }
  UnbiasednessCheck check;
  check.draws = n_draws;
  check.mean.resize(p);
  check.se.resize(p);
  const double n = static_cast<double>(n_draws);
  for (std::size_t j = 0; j < p; ++j) {
    check.mean[j] = sum[j] / n;
    const double var =
        std::max(0.0, (sum_sq[j] - n * check.mean[j] * check.mean[j]) /
                          (n - 1.0));
    check.se[j] = std::sqrt(var / n);
  }
  return check;
}

// ---------------------------------------------------------------------------
// Model-based expectations

namespace {

// Expectation of a vector functional of X under the family law at theta:
// exact summation on finite supports, Simpson quadrature otherwise.
std::vector<double> expect_under_theta(
    const Family& family, std::span<const double> theta, std::size_t out_dim,
    const std::function<void(std::span<const double> x, double weight,
                             std::span<double> acc)>& accumulate) {
  std::vector<double> acc(out_dim, 0.0);
  if (family.discrete()) {
    const DiscreteDistribution law = family.discrete_law(theta);
    for (std::size_t j = 0; j < law.size(); ++j) {
      if (law.probs[j] == 0.0) continue;
      const double x = static_cast<double>(j);
      accumulate(std::span<const double>(&x, 1), law.probs[j], acc);
    }
    return acc;
  }
  if (family.obs_dim() != 1)
    throw capability_error(
        "model-based expectations need a finite support or a scalar "
        "observation");
  const Grid1D grid = family.x_quadrature(theta);
  const std::vector<double> w = simpson_weights(grid);
  const std::vector<double> nodes = grid.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double p = std::exp(
        family.log_density(std::span<const double>(&nodes[i], 1), theta));
    if (p == 0.0) continue;
    accumulate(std::span<const double>(&nodes[i], 1), w[i] * p, acc);
  }
  return acc;
}

}  // namespace

Matrix expected_score_outer(const ScoreModel& model,
                            std::span<const double> theta) {
  const std::size_t p = model.family().param_dim();
  const std::vector<double> flat = expect_under_theta(
      model.family(), theta, p * p,
      [&](std::span<const double> x, double weight, std::span<double> acc) {
        const std::vector<double> s = model.gradient(x, theta);
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < p; ++j)
            acc[i * p + j] += weight * s[i] * s[j];
      });
  Matrix j(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t c = 0; c < p; ++c) j(i, c) = flat[i * p + c];
  symmetrize(j);
  return j;
}

Matrix expected_score_jacobian(const ScoreModel& model,
                               std::span<const double> theta) {
  const std::size_t p = model.family().param_dim();
  Matrix k(p, p);
  std::vector<double> th(theta.begin(), theta.end());
  for (std::size_t j = 0; j < p; ++j) {
    const double h = fd_step(th[j]);
    const double save = th[j];
    th[j] = save + h;
    // The sampling law stays fixed at theta; only the score argument moves.
    const std::vector<double> up = expect_under_theta(
        model.family(), theta, p,
        [&](std::span<const double> x, double weight, std::span<double> acc) {
          const std::vector<double> s = model.gradient(x, th);
          for (std::size_t r = 0; r < p; ++r) acc[r] += weight * s[r];
        });
    th[j] = save - h;
    const std::vector<double> down = expect_under_theta(
        model.family(), theta, p,
        [&](std::span<const double> x, double weight, std::span<double> acc) {
          const std::vector<double> s = model.gradient(x, th);
          for (std::size_t r = 0; r < p; ++r) acc[r] += weight * s[r];
        });
    th[j] = save;
    for (std::size_t r = 0; r < p; ++r)
      k(r, j) = (up[r] - down[r]) / (2.0 * h);
  }
  symmetrize(k);
  return k;
}

Matrix godambe_information(const ScoreModel& model,
                           std::span<const double> theta) {
  const Matrix j = expected_score_outer(model, theta);
  const Matrix k = expected_score_jacobian(model, theta);
  const Matrix j_inv = inverse_spd(j);
  Matrix g = multiply(multiply(k, j_inv), k);
  symmetrize(g);
  return g;
}

std::vector<double> influence_function(const ScoreModel& model,
                                       std::span<const double> x,
                                       std::span<const double> theta) {
  const std::vector<double> s = model.gradient(x, theta);
  const Matrix k = expected_score_jacobian(model, theta);
  std::vector<double> v = solve_spd(k, s);
  for (double& c : v) c = -c;
  return v;
}

// ---------------------------------------------------------------------------
// B-robustness

RobustnessReport brobustness_check(const PsiTriple& psi,
                                   const LocationDensity& shape,
                                   double grid_halfwidth, int growth_rounds,
                                   std::size_t points_per_round) {
  if (!(grid_halfwidth > 0.0) || growth_rounds < 2 || points_per_round < 3)
    throw validation_error(
        "brobustness_check: need positive halfwidth, >=2 rounds, >=3 points");
  if (!shape.pdf || !shape.dpdf)
    throw validation_error("brobustness_check: shape needs pdf and dpdf");

  RobustnessReport report;
  report.condition_density = shape.derivative_bounded;
  report.condition_psi = psi.d2_bounded_near_zero;

  double running_max = 0.0;
  double max_at = 0.0;
  bool hit_nonfinite = false;
  for (int r = 0; r < growth_rounds; ++r) {
    const double w = grid_halfwidth * std::pow(2.0, r);
    const double step = 2.0 * w / static_cast<double>(points_per_round - 1);
    for (std::size_t i = 0; i < points_per_round; ++i) {
      const double u = -w + step * static_cast<double>(i);
      const double f = shape.pdf(u);
      if (!(f > 0.0)) continue;  // outside (or below) representable support
      const double g = std::fabs(psi.d2(f) * shape.dpdf(u));
      if (std::isnan(g) || std::isinf(g)) {
        hit_nonfinite = true;
        continue;
      }
      if (g > running_max) {
        running_max = g;
        max_at = u;
      }
    }
    report.round_maxima.push_back(hit_nonfinite ? kInf : running_max);
  }

  report.sup_estimate = hit_nonfinite ? kInf : running_max;
  report.grid_max_location = max_at;
  const double last = report.round_maxima[report.round_maxima.size() - 1];
  const double prev = report.round_maxima[report.round_maxima.size() - 2];
  report.classified_bounded =
      std::isfinite(last) &&
      std::fabs(last - prev) <= 1e-6 * std::max(1.0, std::fabs(last));
  return report;
}

Matrix sandwich_from_if(const ScoreModel& model, std::span<const double> theta,
                        std::size_t n_draws, SeedSpec seed) {
  if (n_draws == 0)
    throw validation_error("sandwich_from_if: need at least one draw");
  if (!model.family().has_sampler())
    throw capability_error(model.family().name() + " has no sampler");

  const std::size_t p = model.family().param_dim();
  RandomStream rng(seed);
  std::vector<double> x(model.family().obs_dim());
  Matrix scores(n_draws, p);
  double max_abs = 0.0;
  for (std::size_t d = 0; d < n_draws; ++d) {
    model.family().sample(theta, rng, x);
    const std::vector<double> g = model.gradient(x, theta);
    for (std::size_t j = 0; j < p; ++j) {
      scores(d, j) = g[j];
      max_abs = std::max(max_abs, std::fabs(g[j]));
    }
  }
  Matrix acc(p, p);
  if (max_abs == 0.0) return acc;  // degenerate: identically zero score

  const Matrix k = expected_score_jacobian(model, theta);
  const Cholesky chol = Cholesky::factor(k);
  const double inv_n = 1.0 / static_cast<double>(n_draws);
  for (std::size_t d = 0; d < n_draws; ++d) {
    const std::vector<double> v = chol.solve(scores.row(d));
    accumulate_outer(acc, v, inv_n);
  }
  symmetrize(acc);
  return acc;
}

}  // namespace scorelab
