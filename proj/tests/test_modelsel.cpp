#include "scorelab/modelsel.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "scorelab/errors.hpp"
#include "scorelab/estimation.hpp"
#include "scorelab/matrix.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/scores.hpp"

using namespace scorelab;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(kTwoPi * var) - d * d / (2.0 * var);
}

BayesModelSpec flat_model(const std::string& id, double level,
                          double sigma = 1.0) {
  BayesModelSpec spec;
  spec.id = id;
  spec.family = std::make_shared<NormalLocationFamily>(sigma);
  spec.prior_log_density = [level](std::span<const double>) { return level; };
  spec.prior_proper = false;
  spec.theta_quadrature.lower = {-20.0};
  spec.theta_quadrature.upper = {20.0};
  spec.quad_points = 401;
  return spec;
}

BayesModelSpec conjugate_model(const std::string& id, double prior_mean,
                               double prior_var, double sigma = 1.0) {
  BayesModelSpec spec;
  spec.id = id;
  spec.family = std::make_shared<NormalLocationFamily>(sigma);
  spec.prior_log_density = [prior_mean, prior_var](std::span<const double> t) {
    return normal_logpdf(t[0], prior_mean, prior_var);
  };
  spec.prior_proper = true;
  spec.theta_quadrature.lower = {-20.0};
  spec.theta_quadrature.upper = {20.0};
  spec.quad_points = 401;
  return spec;
}

// Derivative-matching score of a normal density at x.
double normal_hyvarinen(double x, double mean, double var) {
  const double d = x - mean;
  return -1.0 / var + d * d / (2.0 * var * var);
}

Matrix ones_design(std::size_t n) { return Matrix(n, 1, 1.0); }

}  // namespace

TEST_CASE("flat-prior marginal carries the prior's arbitrary scale") {
  const double x0[] = {0.4};
  const MarginalDensityResult base = marginal_density(flat_model("m", 0.0), x0);
  CHECK(base.scale_arbitrary);
  CHECK(base.value == doctest::Approx(1.0).epsilon(1e-8));
  const MarginalDensityResult lifted =
      marginal_density(flat_model("m", std::log(3.0)), x0);
  CHECK(lifted.value == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("conjugate marginal matches the closed-form normal") {
  const BayesModelSpec model = conjugate_model("m", 0.0, 1.0);
  for (double x : {0.0, 0.7, -1.9}) {
    const double x0[] = {x};
    const MarginalDensityResult got = marginal_density(model, x0);
    CHECK_FALSE(got.scale_arbitrary);
    CHECK(got.value ==
          doctest::Approx(std::exp(normal_logpdf(x, 0.0, 2.0))).epsilon(1e-6));
  }
}

TEST_CASE("point-mass prior collapses the marginal to the likelihood") {
  BayesModelSpec spec = flat_model("m", 0.0);
  spec.point_mass = std::vector<double>{0.3};
  const double x0[] = {1.1};
  const MarginalDensityResult got = marginal_density(spec, x0);
  CHECK_FALSE(got.scale_arbitrary);
  CHECK(got.value ==
        doctest::Approx(std::exp(normal_logpdf(1.1, 0.3, 1.0))).epsilon(1e-14));
}

TEST_CASE("a posterior that keeps growing with the domain is refused") {
  BayesModelSpec spec = flat_model("m", 0.0);
  spec.prior_log_density = [](std::span<const double> t) {
    return 0.6 * t[0] * t[0];  // outgrows the gaussian likelihood
  };
  const double x0[] = {0.0};
  CHECK_THROWS_AS((void)marginal_density(spec, x0), divergence_error);
}

TEST_CASE("bayes factors refuse improper priors and match closed forms") {
  const double x0[] = {0.9};
  const BayesModelSpec a = conjugate_model("a", 0.0, 1.0);
  const BayesModelSpec b = conjugate_model("b", 1.0, 0.25);
  CHECK_THROWS_AS((void)log_bayes_factor(flat_model("f", 0.0), b, x0),
                  propriety_error);

  BayesModelSpec a_twin = a;
  a_twin.id = "a2";
  CHECK(log_bayes_factor(a, a_twin, x0) == 0.0);

  const double expected =
      normal_logpdf(0.9, 0.0, 2.0) - normal_logpdf(0.9, 1.0, 1.25);
  CHECK(log_bayes_factor(a, b, x0) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("flat-prior predictive score of a normal model is zero") {
  const BayesModelSpec model = flat_model("m", 0.0);
  for (double x : {0.0, 0.4, -1.3}) {
    const double x0[] = {x};
    CHECK(std::fabs(hyvarinen_predictive_score(model, x0)) < 1e-6);
  }
}

TEST_CASE("predictive score ignores the level of a flat prior bit for bit") {
  const double x0[] = {0.4};
  const double base = hyvarinen_predictive_score(flat_model("m", 0.0), x0);
  for (double level : {7.5, -123.0, 0.03125}) {
    CHECK(hyvarinen_predictive_score(flat_model("m", level), x0) == base);
  }
}

TEST_CASE("point-mass predictive score is the plain score at that parameter") {
  BayesModelSpec spec = flat_model("m", 0.0, 1.5);
  spec.point_mass = std::vector<double>{0.3};
  const double x0[] = {1.1};
  const double direct = evaluate_score(
      RuleSpec::hyvarinen(), x0, to_density_model(spec.family, {0.3}));
  CHECK(hyvarinen_predictive_score(spec, x0) ==
        doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("posterior decomposition reproduces the prior-predictive score") {
  // For prior N(m0, tau2) and likelihood N(theta, sigma2) the prior
  // predictive is N(m0, sigma2 + tau2); the decomposition must score x0
  // exactly as that density does.
  struct Config {
    double m0, tau2, sigma, x0;
  };
  const Config configs[] = {
      {0.0, 1.0, 1.0, 0.0},  {0.0, 1.0, 1.0, 1.3},  {0.5, 2.0, 1.0, -0.7},
      {-1.0, 0.5, 2.0, 0.4}, {2.0, 4.0, 0.8, 2.5},  {0.0, 0.25, 1.2, -2.0},
  };
  for (const Config& c : configs) {
    const BayesModelSpec model = conjugate_model("m", c.m0, c.tau2, c.sigma);
    const double x0[] = {c.x0};
    const double direct =
        normal_hyvarinen(c.x0, c.m0, c.sigma * c.sigma + c.tau2);
    CHECK(hyvarinen_predictive_score(model, x0) ==
          doctest::Approx(direct).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("exponential-family shortcut agrees with quadrature and closed form") {
  // Normal location, sigma = 1: log-likelihood x*theta - x^2/2 + const.
  ScalarField a;
  a.value = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
  a.gradient = [](std::span<const double> x) {
    return std::vector<double>{-x[0]};
  };
  a.laplacian = [](std::span<const double>) { return -1.0; };
  VectorField t;
  t.components = 1;
  t.value = [](std::span<const double> x) { return std::vector<double>{x[0]}; };
  t.jacobian = [](std::span<const double>) { return Matrix(1, 1, {1.0}); };
  t.laplacians = [](std::span<const double>) {
    return std::vector<double>{0.0};
  };

  // Flat prior: posterior N(x0, 1); the score vanishes identically.
  for (double x : {0.0, 0.8, -2.4}) {
    const double x0[] = {x};
    const std::vector<double> mu{x};
    CHECK(expfam_hyvarinen_score(a, t, mu, Matrix(1, 1, {1.0}), x0) == 0.0);
  }

  // Conjugate prior N(0, tau2): posterior moments are available in closed
  // form, and the score must match both the quadrature decomposition and the
  // prior-predictive formula.
  const double tau2 = 0.49, x = 1.3;
  const double x0[] = {x};
  const double w = tau2 / (1.0 + tau2);
  const std::vector<double> mu{w * x};
  const Matrix sigma(1, 1, {w});
  const double shortcut = expfam_hyvarinen_score(a, t, mu, sigma, x0);
  CHECK(shortcut ==
        doctest::Approx(normal_hyvarinen(x, 0.0, 1.0 + tau2)).epsilon(1e-12));
  const BayesModelSpec model = conjugate_model("m", 0.0, tau2);
  CHECK(shortcut ==
        doctest::Approx(hyvarinen_predictive_score(model, x0)).epsilon(1e-6));
}

TEST_CASE("whole-vector linear-model score frozen values") {
  NormalLinearModel model;
  model.x = ones_design(3);
  model.sigma2 = 1.0;
  const std::vector<double> y{0.0, 1.0, 2.0};
  CHECK(nlm_improper_hyvarinen(model, y) == -2.0);

  const std::vector<double> flat_y{5.0, 5.0, 5.0};  // zero residual
  CHECK(nlm_improper_hyvarinen(model, flat_y) == -4.0);

  NormalLinearModel null_model;
  null_model.x = Matrix(2, 0);
  null_model.sigma2 = 1.0;
  const std::vector<double> y2{1.0, 1.0};
  CHECK(nlm_improper_hyvarinen(null_model, y2) == -2.0);
}

TEST_CASE("aic gap equals -2N for every model sharing N and sigma2") {
  RandomStream rng({91, 0});
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 2 + (rng.next_u64() % 7);
    std::vector<double> y(n);
    for (double& v : y) v = double(int(rng.next_u64() % 9)) - 4.0;

    NormalLinearModel with_mean;
    with_mean.x = ones_design(n);
    with_mean.sigma2 = 1.0;
    NormalLinearModel without_mean;
    without_mean.x = Matrix(n, 0);
    without_mean.sigma2 = 1.0;

    const double expected = -2.0 * double(n);
    CHECK(aic_gap(with_mean, y) == expected);
    CHECK(aic_gap(without_mean, y) == expected);
  }
}

TEST_CASE("proper-prior score approaches the flat-prior score as V grows") {
  NormalLinearModel model;
  model.x = ones_design(3);
  model.sigma2 = 1.0;
  model.prior_mean = std::vector<double>{0.0};
  const std::vector<double> y{0.0, 1.0, 2.0};
  const double limit = nlm_improper_hyvarinen(model, y);

  double previous = std::numeric_limits<double>::infinity();
  for (double v : {1e2, 1e4, 1e6}) {
    model.prior_cov = Matrix(1, 1, {v});
    const double gap = std::fabs(nlm_proper_hyvarinen(model, y) - limit);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("prequential score frozen values") {
  NormalLinearModel null_model;
  null_model.x = Matrix(2, 0);
  null_model.sigma2 = 1.0;
  const std::vector<double> y2{1.0, 1.0};
  CHECK(prequential_hyvarinen(null_model, y2) == -2.0);

  NormalLinearModel mean_model;
  mean_model.x = ones_design(3);
  mean_model.sigma2 = 1.0;
  const std::vector<double> y{0.0, 1.0, 2.0};
  // burn-in on the first row; then
  //   n=2: pred 0,   k^2 = 2,   Z^2 = 1/2
  //   n=3: pred 1/2, k^2 = 3/2, Z^2 = 3/2
  CHECK(prequential_hyvarinen(mean_model, y) ==
        doctest::Approx(-13.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("a rank-deficient burn-in names the stalling row") {
  NormalLinearModel model;
  model.x = Matrix(4, 2, {1.0, 2.0, 2.0, 4.0, 1.0, 0.0, 0.0, 1.0});
  model.sigma2 = 1.0;
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_WITH_AS((void)prequential_hyvarinen(model, y),
                       doctest::Contains("row 2"), rank_error);
}

TEST_CASE("model comparison under the log rule follows the bayes factor") {
  const double x0[] = {0.9};
  const BayesModelSpec a = conjugate_model("a", 0.0, 1.0);
  const BayesModelSpec b = conjugate_model("b", 1.0, 0.25);
  const ModelComparisonReport report = compare_models(RuleSpec::log_score(), {a, b}, x0);
  REQUIRE(report.scores.size() == 2);
  CHECK_FALSE(report.scores[0].failed);
  CHECK_FALSE(report.scores[1].failed);

  const double lbf = log_bayes_factor(a, b, x0);
  CHECK(report.differences(0, 1) == doctest::Approx(-lbf).epsilon(1e-10));
  CHECK(report.differences(0, 1) == -report.differences(1, 0));
  CHECK(report.ranking.front() == (lbf > 0.0 ? 0 : 1));

  CHECK(score_difference(RuleSpec::log_score(), a, b, x0) ==
        doctest::Approx(-lbf).epsilon(1e-10));
}

TEST_CASE("per-model failures are recorded without aborting the comparison") {
  const double x0[] = {0.2};
  const ModelComparisonReport report = compare_models(
      RuleSpec::log_score(), {conjugate_model("ok", 0.0, 1.0), flat_model("bad", 0.0)},
      x0);
  REQUIRE(report.scores.size() == 2);
  CHECK_FALSE(report.scores[0].failed);
  CHECK(report.scores[1].failed);
  CHECK_FALSE(report.scores[1].error.empty());
  CHECK(report.ranking == std::vector<std::size_t>{0});
  CHECK(std::isnan(report.differences(0, 1)));
  CHECK_THROWS_AS(
      (void)score_difference(RuleSpec::log_score(), flat_model("bad", 0.0),
                             conjugate_model("ok", 0.0, 1.0), x0),
      propriety_error);
}

TEST_CASE("duplicate models tie exactly") {
  const double x0[] = {0.2};
  BayesModelSpec twin = conjugate_model("twin", 0.0, 1.0);
  twin.id = "twin2";
  const ModelComparisonReport report = compare_models(
      RuleSpec::hyvarinen(), {conjugate_model("twin", 0.0, 1.0), twin}, x0);
  CHECK(report.differences(0, 1) == 0.0);
  REQUIRE(report.ties.size() == 1);
  CHECK(report.ties.front() == std::pair<std::size_t, std::size_t>{0, 1});
}

TEST_CASE("rankings and differences ignore additive prior shifts exactly") {
  const double x0[] = {0.6};
  auto build = [&](double shift_a, double shift_b) {
    std::vector<BayesModelSpec> models{flat_model("a", shift_a, 1.0),
                                       flat_model("b", shift_b, 1.4)};
    return compare_models(RuleSpec::hyvarinen(), models, x0);
  };
  const ModelComparisonReport base = build(0.0, 0.0);
  for (const auto& [sa, sb] : {std::pair{4.0, -2.0}, std::pair{-9.5, 9.5},
                               std::pair{0.125, 1e3}}) {
    const ModelComparisonReport shifted = build(sa, sb);
    CHECK(shifted.scores[0].score == base.scores[0].score);
    CHECK(shifted.scores[1].score == base.scores[1].score);
    CHECK(shifted.differences(0, 1) == base.differences(0, 1));
    CHECK(shifted.ranking == base.ranking);
  }
}

TEST_CASE("density-based rules score the quadrature marginal") {
  const double x0[] = {0.3};
  RuleSpec rule = RuleSpec::tsallis(2.0);
  rule.integration_grid = Grid1D(-40.0, 40.0, 4001);
  const BayesModelSpec a = conjugate_model("a", 0.0, 1.0);
  const BayesModelSpec b = conjugate_model("b", 0.5, 1.0);

  // marginal of each model is normal with variance 2; for gamma = 2 the
  // score is integral(m^2) - 2 m(x0)
  auto closed = [&](double mean) {
    const double var = 2.0;
    const double mass2 = 1.0 / (2.0 * std::sqrt(var) * std::sqrt(M_PI));
    return mass2 - 2.0 * std::exp(normal_logpdf(0.3, mean, var));
  };
  const double expected = closed(0.0) - closed(0.5);
  CHECK(score_difference(rule, a, b, x0) ==
        doctest::Approx(expected).epsilon(1e-4).scale(1.0));

  const ModelComparisonReport report = compare_models(rule, {a, b}, x0);
  CHECK(report.ranking.front() == (expected < 0.0 ? 0 : 1));
}
