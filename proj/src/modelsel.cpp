#include "scorelab/modelsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/kernels.hpp"

namespace scorelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_spec(const BayesModelSpec& model) {
  if (!model.family)
    throw validation_error("model '" + model.id + "': family is missing");
  const std::size_t dim = model.family->param_dim();
  if (model.point_mass) {
    if (model.point_mass->size() != dim)
      throw validation_error("model '" + model.id +
                             "': point-mass parameter has wrong dimension");
    return;
  }
  if (!model.prior_log_density)
    throw validation_error("model '" + model.id +
                           "': prior log-density is missing");
  if (dim == 0 || dim > 2)
    throw capability_error(
        "model '" + model.id +
        "': quadrature marginals support 1- or 2-dimensional parameters");
  if (model.theta_quadrature.lower.size() != dim ||
      model.theta_quadrature.upper.size() != dim)
    throw validation_error("model '" + model.id +
                           "': theta_quadrature box must match the parameter "
                           "dimension");
  if (model.quad_points < 5)
    throw validation_error("model '" + model.id +
                           "': need at least 5 quadrature points per axis");
}

struct ThetaGrid {
  std::vector<std::vector<double>> nodes;  // each of length dim
  std::vector<double> weights;
};

// Tensor Simpson grid over the model's theta box, half-widths scaled by
// `widen` about the box center.
ThetaGrid build_grid(const Box& box, std::size_t quad_points, double widen) {
  const std::size_t dim = box.lower.size();
  std::vector<std::vector<double>> axis_nodes(dim);
  std::vector<std::vector<double>> axis_weights(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double center = 0.5 * (box.lower[d] + box.upper[d]);
    const double half = 0.5 * (box.upper[d] - box.lower[d]) * widen;
    if (!(half > 0.0))
      throw validation_error("theta_quadrature box has an empty axis");
    const Grid1D grid(center - half, center + half, quad_points);
    axis_nodes[d] = grid.nodes();
    axis_weights[d] = simpson_weights(grid);
  }
  ThetaGrid out;
  if (dim == 1) {
    out.nodes.reserve(quad_points);
    for (std::size_t i = 0; i < quad_points; ++i) {
      out.nodes.push_back({axis_nodes[0][i]});
      out.weights.push_back(axis_weights[0][i]);
    }
    return out;
  }
  out.nodes.reserve(quad_points * quad_points);
  for (std::size_t i = 0; i < quad_points; ++i)
    for (std::size_t j = 0; j < quad_points; ++j) {
      out.nodes.push_back({axis_nodes[0][i], axis_nodes[1][j]});
      out.weights.push_back(axis_weights[0][i] * axis_weights[1][j]);
    }
  return out;
}

struct PosteriorEval {
  ThetaGrid grid;
  std::vector<double> lik;  // log-likelihood of x0 at each node
  std::vector<double> pri;  // prior log-density at each node
  std::vector<double> w;    // quadrature weight * exp(shifted exponent)
  double lik_ref = 0.0;     // log-likelihood at the reference node
  double pri_ref = 0.0;     // prior log-density at the reference node
  double shift = 0.0;       // the subtracted max exponent
  double z = 0.0;           // sum of w (relative posterior normalizer)
};

// log-mass(a) - log-mass(b) for two evaluations of the same model.  The
// reference terms are differenced before anything is added so that a prior
// which is constant over both grids drops out exactly, whatever its level.
double log_mass_drift(const PosteriorEval& a, const PosteriorEval& b) {
  return (a.lik_ref - b.lik_ref) + (a.pri_ref - b.pri_ref) +
         (a.shift - b.shift) + (std::log(a.z) - std::log(b.z));
}

// Evaluate likelihood and prior on the grid and form posterior weights.
// The exponent is assembled from differences against the likelihood argmax
// node, so a prior that is constant over the grid contributes exactly zero
// to every exponent: adding a constant to it cannot change any output bit.
PosteriorEval eval_posterior(const BayesModelSpec& model,
                             std::span<const double> x0, double widen) {
  PosteriorEval ev;
  ev.grid = build_grid(model.theta_quadrature, model.quad_points, widen);
  const std::size_t count = ev.grid.nodes.size();
  ev.lik.resize(count);
  ev.pri.resize(count);
  std::size_t k = 0;
  bool any_finite = false;
  for (std::size_t i = 0; i < count; ++i) {
    const std::span<const double> th = ev.grid.nodes[i];
    const double l = model.family->log_density(x0, th);
    const double p = model.prior_log_density(th);
    if (std::isnan(l) || std::isnan(p) || p == kInf)
      throw domain_error("model '" + model.id +
                         "': non-finite likelihood or prior on the "
                         "quadrature grid");
    ev.lik[i] = l;
    ev.pri[i] = p;
    if (std::isfinite(l) && (!any_finite || l > ev.lik[k])) {
      k = i;
      any_finite = true;
    }
  }
  if (!any_finite)
    throw domain_error("model '" + model.id +
                       "': likelihood vanishes on the whole quadrature grid");

  std::vector<double> e(count);
  double m = -kInf;
  for (std::size_t i = 0; i < count; ++i) {
    e[i] = (ev.lik[i] - ev.lik[k]) + (ev.pri[i] - ev.pri[k]);
    if (std::isnan(e[i])) e[i] = -kInf;  // 0-density node against 0 prior
    if (e[i] > m) m = e[i];
  }
  ev.lik_ref = ev.lik[k];
  ev.pri_ref = ev.pri[k];
  ev.shift = m;
  ev.w.resize(count);
  double z = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    ev.w[i] = ev.grid.weights[i] * std::exp(e[i] - m);
    z += ev.w[i];
  }
  if (!(z > 0.0) || !std::isfinite(z))
    throw domain_error("model '" + model.id +
                       "': posterior mass on the quadrature grid is not a "
                       "positive finite number");
  ev.z = z;
  return ev;
}

void require_proper_posterior(const BayesModelSpec& model,
                              std::span<const double> x0,
                              const PosteriorEval& base) {
  const PosteriorEval wide = eval_posterior(model, x0, 2.0);
  const double drift = std::fabs(log_mass_drift(wide, base));
  if (drift > 1e-3)
    throw propriety_error(
        "model '" + model.id +
        "': posterior mass keeps growing when the quadrature domain is "
        "doubled (log-mass drift " +
        std::to_string(drift) + "); the posterior looks improper");
}

// Marginal density integral on the configured (possibly widened) domain,
// computed in log space to survive extreme likelihood scales.
double log_marginal(const BayesModelSpec& model, std::span<const double> x0,
                    double widen) {
  const ThetaGrid grid =
      build_grid(model.theta_quadrature, model.quad_points, widen);
  double m = -kInf;
  std::vector<double> s(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const std::span<const double> th = grid.nodes[i];
    const double v =
        model.family->log_density(x0, th) + model.prior_log_density(th);
    if (std::isnan(v) || v == kInf)
      throw domain_error("model '" + model.id +
                         "': non-finite integrand in the marginal density");
    s[i] = v;
    if (v > m) m = v;
  }
  if (m == -kInf) return -kInf;  // the marginal is zero at x0
  double total = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    total += grid.weights[i] * std::exp(s[i] - m);
  if (!(total >= 0.0) || !std::isfinite(total))
    throw domain_error("model '" + model.id +
                       "': marginal quadrature failed to produce a finite "
                       "value");
  return total > 0.0 ? m + std::log(total) : -kInf;
}

void require_x0(const BayesModelSpec& model, std::span<const double> x0) {
  if (x0.size() != model.family->obs_dim())
    throw validation_error("model '" + model.id +
                           "': observation dimension mismatch");
}

double hyvarinen_at_theta(const Family& family, std::span<const double> x0,
                          std::span<const double> theta) {
  const std::vector<double> g = family.grad_log_density_x(x0, theta);
  return family.laplacian_log_density_x(x0, theta) +
         0.5 * kernels::dot(g, g);
}

// ---------------------------------------------------------------------------
// Normal linear model helpers

struct NlmShape {
  std::size_t n = 0;
  std::size_t p = 0;
  double rss = 0.0;
};

NlmShape nlm_fit(const NormalLinearModel& model, std::span<const double> y) {
  NlmShape shape;
  shape.n = y.size();
  shape.p = model.x.cols();
  if (shape.n == 0)
    throw validation_error("normal linear model: empty observation vector");
  if (model.x.rows() != shape.n)
    throw validation_error("normal linear model: design has " +
                           std::to_string(model.x.rows()) +
                           " rows but y has " + std::to_string(shape.n));
  if (!(model.sigma2 > 0.0) || !std::isfinite(model.sigma2))
    throw validation_error("normal linear model: sigma2 must be positive");
  for (double v : y)
    if (!std::isfinite(v))
      throw validation_error("normal linear model: non-finite observation");

  if (shape.p == 0) {
    shape.rss = kernels::dot(y, y);
    return shape;
  }
  const std::size_t rank = gram_rank(model.x);
  if (rank < shape.p)
    throw validation_error(
        "normal linear model: design matrix is rank-deficient (rank " +
        std::to_string(rank) + " < p = " + std::to_string(shape.p) + ")");
  const Matrix xt = transpose(model.x);
  const Matrix xtx = multiply(xt, model.x);
  const std::vector<double> xty = multiply(xt, y);
  const std::vector<double> coef = solve_spd(xtx, xty);
  const std::vector<double> fit = multiply(model.x, coef);
  double rss = 0.0;
  for (std::size_t i = 0; i < shape.n; ++i) {
    const double r = y[i] - fit[i];
    rss += r * r;
  }
  shape.rss = rss;
  return shape;
}

}  // namespace

// ---------------------------------------------------------------------------
// Marginals and Bayes factors

MarginalDensityResult marginal_density(const BayesModelSpec& model,
                                       std::span<const double> x0) {
  validate_spec(model);
  require_x0(model, x0);
  MarginalDensityResult result;
  if (model.point_mass) {
    result.value = std::exp(model.family->log_density(x0, *model.point_mass));
    result.scale_arbitrary = false;
    return result;
  }
  const double base = log_marginal(model, x0, 1.0);
  const double once = log_marginal(model, x0, 2.0);
  const double twice = log_marginal(model, x0, 4.0);
  if (std::isfinite(once) || std::isfinite(twice)) {
    const double drift = std::fabs(twice - once);
    if (!(drift <= 1e-3))
      throw divergence_error(
          "model '" + model.id +
          "': marginal integral does not stabilize under domain doubling "
          "(log drift " +
          std::to_string(drift) + "); the integral looks divergent");
  }
  result.value = std::isfinite(base) ? std::exp(base) : 0.0;
  result.scale_arbitrary = !model.prior_proper;
  return result;
}

double log_bayes_factor(const BayesModelSpec& model_a,
                        const BayesModelSpec& model_b,
                        std::span<const double> x0) {
  const auto require_proper = [](const BayesModelSpec& m) {
    if (!m.point_mass && !m.prior_proper)
      throw propriety_error(
          "model '" + m.id +
          "': Bayes factors are refused under improper priors — the result "
          "would depend on the prior's arbitrary positive constant");
  };
  require_proper(model_a);
  require_proper(model_b);
  const double pa = marginal_density(model_a, x0).value;
  const double pb = marginal_density(model_b, x0).value;
  if (!(pa > 0.0) || !(pb > 0.0))
    throw domain_error(
        "log_bayes_factor: a marginal density vanished at the observation");
  return std::log(pa) - std::log(pb);
}

// ---------------------------------------------------------------------------
// Predictive scores

double hyvarinen_predictive_score(const BayesModelSpec& model,
                                  std::span<const double> x0) {
  validate_spec(model);
  require_x0(model, x0);
  const Family& family = *model.family;
  if (model.point_mass)
    return hyvarinen_at_theta(family, x0, *model.point_mass);

  const PosteriorEval post = eval_posterior(model, x0, 1.0);
  require_proper_posterior(model, x0, post);

  const std::size_t d = family.obs_dim();
  double e_score = 0.0;
  std::vector<double> e_grad(d, 0.0), e_grad_sq(d, 0.0);
  for (std::size_t i = 0; i < post.grid.nodes.size(); ++i) {
    if (post.w[i] == 0.0) continue;
    const std::span<const double> th = post.grid.nodes[i];
    const std::vector<double> g = family.grad_log_density_x(x0, th);
    const double lap = family.laplacian_log_density_x(x0, th);
    const double sh = lap + 0.5 * kernels::dot(g, g);
    e_score += post.w[i] * sh;
    for (std::size_t j = 0; j < d; ++j) {
      e_grad[j] += post.w[i] * g[j];
      e_grad_sq[j] += post.w[i] * g[j] * g[j];
    }
  }
  e_score /= post.z;
  double var_sum = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = e_grad[j] / post.z;
    var_sum += std::max(0.0, e_grad_sq[j] / post.z - mean * mean);
  }
  const double score = e_score + 0.5 * var_sum;
  if (std::isnan(score))
    throw domain_error("model '" + model.id +
                       "': predictive score evaluated to NaN");
  return score;
}

double expfam_hyvarinen_score(const ScalarField& a, const VectorField& t,
                              std::span<const double> mu, const Matrix& sigma,
                              std::span<const double> x0) {
  if (!a.value || !a.gradient || !a.laplacian)
    throw validation_error("expfam_hyvarinen_score: the base field a needs "
                           "value, gradient and laplacian");
  if (!t.value || !t.jacobian || !t.laplacians)
    throw validation_error("expfam_hyvarinen_score: the statistic t needs "
                           "value, jacobian and laplacians");
  const std::size_t m = t.components;
  if (mu.size() != m)
    throw validation_error(
        "expfam_hyvarinen_score: posterior mean has dimension " +
        std::to_string(mu.size()) + ", statistic has " + std::to_string(m) +
        " components");
  if (sigma.rows() != m || sigma.cols() != m)
    throw validation_error(
        "expfam_hyvarinen_score: posterior covariance must be " +
        std::to_string(m) + "x" + std::to_string(m));

  const std::size_t d = x0.size();
  const std::vector<double> grad_a = a.gradient(x0);
  const double lap_a = a.laplacian(x0);
  const std::vector<double> bd = t.laplacians(x0);
  const Matrix jac = t.jacobian(x0);
  if (grad_a.size() != d || jac.rows() != m || jac.cols() != d ||
      bd.size() != m)
    throw validation_error(
        "expfam_hyvarinen_score: field dimensions are inconsistent with x0");

  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = grad_a[i];
    for (std::size_t j = 0; j < m; ++j) acc += jac(j, i) * mu[j];
    v[i] = acc;
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k)
        trace += jac(j, i) * sigma(j, k) * jac(k, i);

  return 0.5 * (2.0 * lap_a + 2.0 * kernels::dot(bd, mu) +
                kernels::dot(v, v) + 2.0 * trace);
}

// ---------------------------------------------------------------------------
// Normal linear models

double nlm_improper_hyvarinen(const NormalLinearModel& model,
                              std::span<const double> y) {
  const NlmShape shape = nlm_fit(model, y);
  if (shape.n <= shape.p)
    throw domain_error(
        "nlm_improper_hyvarinen: the flat-prior score needs N > p (N = " +
        std::to_string(shape.n) + ", p = " + std::to_string(shape.p) + ")");
  const double nu = static_cast<double>(shape.n - shape.p);
  return (shape.rss - 2.0 * nu * model.sigma2) / (model.sigma2 * model.sigma2);
}

double nlm_proper_hyvarinen(const NormalLinearModel& model,
                            std::span<const double> y) {
  const NlmShape shape = nlm_fit(model, y);
  const std::size_t n = shape.n;
  const std::size_t p = shape.p;
  const double s2 = model.sigma2;

  std::vector<double> resid(y.begin(), y.end());
  Matrix phi = Matrix::identity(n);
  if (p > 0) {
    if (!model.prior_cov)
      throw validation_error(
          "nlm_proper_hyvarinen: a proper prior covariance is required");
    if (model.prior_cov->rows() != p || model.prior_cov->cols() != p)
      throw validation_error(
          "nlm_proper_hyvarinen: prior covariance must be p x p");
    std::vector<double> mean(p, 0.0);
    if (model.prior_mean) {
      if (model.prior_mean->size() != p)
        throw validation_error(
            "nlm_proper_hyvarinen: prior mean must have length p");
      mean = *model.prior_mean;
    }
    const std::vector<double> fit = multiply(model.x, mean);
    for (std::size_t i = 0; i < n; ++i) resid[i] -= fit[i];

    const Matrix xt = transpose(model.x);
    Matrix a = multiply(xt, model.x);
    const Matrix v_inv = inverse_spd(*model.prior_cov);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) a(i, j) += s2 * v_inv(i, j);
    const Matrix a_inv = inverse_spd(a);
    const Matrix shrink = multiply(multiply(model.x, a_inv), xt);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) phi(i, j) -= shrink(i, j);
  }
  for (double& v : phi.data()) v /= s2;

  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) tr += phi(i, i);
  const std::vector<double> pv = multiply(phi, resid);
  return -2.0 * tr + kernels::dot(pv, pv);
}

double aic_gap(const NormalLinearModel& model, std::span<const double> y) {
  const NlmShape shape = nlm_fit(model, y);
  if (shape.n <= shape.p)
    throw domain_error("aic_gap: needs N > p");
  const double nu = static_cast<double>(shape.n - shape.p);
  const double s2 = model.sigma2;
  const double score_scaled = (shape.rss - 2.0 * nu * s2) / s2;
  const double aic = shape.rss / s2 + 2.0 * static_cast<double>(shape.p);
  return score_scaled - aic;
}

double prequential_hyvarinen(const NormalLinearModel& model,
                             std::span<const double> y) {
  const std::size_t n = y.size();
  const std::size_t p = model.x.cols();
  if (n == 0)
    throw validation_error("prequential_hyvarinen: empty observation vector");
  if (model.x.rows() != n)
    throw validation_error("prequential_hyvarinen: design/observation length "
                           "mismatch");
  if (!(model.sigma2 > 0.0) || !std::isfinite(model.sigma2))
    throw validation_error("prequential_hyvarinen: sigma2 must be positive");
  const double s2 = model.sigma2;
  const double s4 = s2 * s2;

  if (p == 0) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      total += (y[i] * y[i] - 2.0 * s2) / s4;
    return total;
  }
  if (n < p)
    throw validation_error(
        "prequential_hyvarinen: fewer observations than parameters");

  // Burn-in: the first p rows must reach full rank, step by step so the
  // stalling row can be named.
  for (std::size_t j = 1; j <= p; ++j) {
    Matrix head(j, p);
    for (std::size_t r = 0; r < j; ++r)
      for (std::size_t c = 0; c < p; ++c) head(r, c) = model.x(r, c);
    if (gram_rank(head) < j)
      throw rank_error(j, "prequential_hyvarinen: design rank stalls at row " +
                              std::to_string(j) +
                              " during the burn-in (rows are processed in "
                              "data order)");
  }

  Matrix gram(p, p);
  std::vector<double> xty(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    const std::span<const double> row = model.x.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      xty[i] += row[i] * y[r];
      for (std::size_t j = 0; j < p; ++j) gram(i, j) += row[i] * row[j];
    }
  }

  double total = 0.0;
  for (std::size_t r = p; r < n; ++r) {
    const std::span<const double> row = model.x.row(r);
    const std::vector<double> coef = solve_spd(gram, xty);
    const std::vector<double> u = solve_spd(gram, row);
    const double k_sq = 1.0 + kernels::dot(row, u);
    const double e = y[r] - kernels::dot(row, coef);
    const double z_sq = e * e / k_sq;
    total += (z_sq - 2.0 * s2) / (k_sq * s4);
    for (std::size_t i = 0; i < p; ++i) {
      xty[i] += row[i] * y[r];
      for (std::size_t j = 0; j < p; ++j) gram(i, j) += row[i] * row[j];
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Model comparison

namespace {

ModelScore score_one_model(const RuleSpec& rule, const BayesModelSpec& model,
                           std::span<const double> x0) {
  ModelScore entry;
  entry.id = model.id;
  switch (rule.family) {
    case RuleFamily::Log: {
      if (!model.point_mass && !model.prior_proper)
        throw propriety_error(
            "model '" + model.id +
            "': the log score of a marginal under an improper prior is "
            "shifted by the prior's arbitrary constant; refusing");
      const MarginalDensityResult m = marginal_density(model, x0);
      entry.score = m.value > 0.0 ? -std::log(m.value) : kInf;
      return entry;
    }
    case RuleFamily::Hyvarinen: {
      entry.score = hyvarinen_predictive_score(model, x0);
      entry.scale_arbitrary = false;
      return entry;
    }
    case RuleFamily::Tsallis:
    case RuleFamily::Bregman: {
      if (!model.point_mass && !model.prior_proper)
        throw propriety_error(
            "model '" + model.id + "': " + rule.name() +
            " scoring of a marginal needs a proper prior (the score is not "
            "homogeneous in the density scale)");
      if (model.family->obs_dim() != 1)
        throw capability_error(
            "model '" + model.id + "': " + rule.name() +
            " marginal scoring is implemented for scalar observations");
      validate_spec(model);
      DensityModel marg;
      marg.dimension = 1;
      marg.normalized = true;
      marg.log_density = [&model](std::span<const double> x) {
        if (model.point_mass)
          return model.family->log_density(x, *model.point_mass);
        return log_marginal(model, x, 1.0);
      };
      // Run the divergence screen once at the observation.
      (void)marginal_density(model, x0);
      entry.score = evaluate_score(rule, x0, marg);
      return entry;
    }
    case RuleFamily::Brier:
    case RuleFamily::FromLoss:
      throw validation_error(rule.name() +
                             " comparison needs finite supports; marginal "
                             "model comparison here is continuous");
  }
  throw validation_error("compare_models: unhandled rule family");
}

}  // namespace

ModelComparisonReport compare_models(const RuleSpec& rule,
                                     const std::vector<BayesModelSpec>& models,
                                     std::span<const double> x0) {
  if (models.empty())
    throw validation_error("compare_models: no models supplied");
  ModelComparisonReport report;
  report.scores.reserve(models.size());
  for (const BayesModelSpec& model : models) {
    try {
      report.scores.push_back(score_one_model(rule, model, x0));
    } catch (const scorelab::error& e) {
      ModelScore entry;
      entry.id = model.id;
      entry.failed = true;
      entry.error = e.what();
      entry.score = kNaN;
      report.scores.push_back(std::move(entry));
    }
  }

  const std::size_t count = models.size();
  report.differences = Matrix(count, count, kNaN);
  for (std::size_t i = 0; i < count; ++i) {
    if (report.scores[i].failed) continue;
    report.differences(i, i) = 0.0;
    for (std::size_t j = i + 1; j < count; ++j) {
      if (report.scores[j].failed) continue;
      const double d = report.scores[i].score - report.scores[j].score;
      report.differences(i, j) = d;
      report.differences(j, i) = -d;
      if (d == 0.0) report.ties.emplace_back(i, j);
    }
  }

  for (std::size_t i = 0; i < count; ++i)
    if (!report.scores[i].failed) report.ranking.push_back(i);
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return report.scores[a].score < report.scores[b].score;
                   });
  return report;
}

double score_difference(const RuleSpec& rule, const BayesModelSpec& model_a,
                        const BayesModelSpec& model_b,
                        std::span<const double> x0) {
  const ModelScore a = score_one_model(rule, model_a, x0);
  const ModelScore b = score_one_model(rule, model_b, x0);
  return a.score - b.score;
}

}  // namespace scorelab
