#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scorelab/estimation.hpp"
#include "scorelab/matrix.hpp"
#include "scorelab/numerics.hpp"
#include "scorelab/scores.hpp"

namespace scorelab {

/// A Bayesian model: a sampling family plus a prior over its parameter.
/// The prior log-density may be improper (defined up to an additive
/// constant); quadrature over theta supports at most two dimensions.
/// A point_mass value replaces the prior with a degenerate distribution at
/// that parameter (no quadrature involved).
struct BayesModelSpec {
  std::string id;
  std::shared_ptr<const Family> family;
  std::function<double(std::span<const double>)> prior_log_density;
  bool prior_proper = false;
  std::optional<std::vector<double>> point_mass;
  /// Quadrature box over theta; required unless point_mass is set.
  Box theta_quadrature;
  std::size_t quad_points = 201;  // per axis
};

struct MarginalDensityResult {
  double value = 0.0;
  /// True under an improper prior: the number is defined only up to the
  /// prior's arbitrary positive constant, so it must not enter ratio-based
  /// quantities.
  bool scale_arbitrary = false;
};

/// Quadrature marginal density of the observation under the model.  The
/// integral is re-evaluated on a domain with doubled half-widths; failure to
/// stabilize raises divergence_error.
MarginalDensityResult marginal_density(const BayesModelSpec& model,
                                       std::span<const double> x0);

/// ln p_A(x0) - ln p_B(x0).  Refuses improper priors (propriety_error): with
/// an arbitrary constant in either prior the ratio is meaningless.
double log_bayes_factor(const BayesModelSpec& model_a,
                        const BayesModelSpec& model_b,
                        std::span<const double> x0);

/// Posterior-decomposed derivative-matching score of the model at x0:
///   E[S_H(x0, P_theta) | x0] + 1/2 sum_i var[ d ln p(x0|theta)/dx_i | x0 ].
/// Works under improper priors whenever the posterior itself is proper
/// (checked by domain doubling; propriety_error otherwise).  Adding any
/// constant to the prior log-density leaves the result bit-identical when
/// the prior is constant over the quadrature box.
double hyvarinen_predictive_score(const BayesModelSpec& model,
                                  std::span<const double> x0);

/// Scalar field with enough derivatives for derivative-matching scores.
struct ScalarField {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<double(std::span<const double>)> laplacian;
};

/// Vector field t: R^d -> R^m with Jacobian (m x d) and per-component
/// Laplacians.
struct VectorField {
  std::size_t components = 0;
  std::function<std::vector<double>(std::span<const double>)> value;
  std::function<Matrix(std::span<const double>)> jacobian;
  std::function<std::vector<double>(std::span<const double>)> laplacians;
};

/// Natural-exponential-family shortcut for the predictive score: with
/// log-likelihood a(x) + t(x)' theta and posterior moments (mu, Sigma) of
/// theta,
///   score = 1/2 [ 2 Lap a + 2 (Lap t)' mu + |grad a + J' mu|^2
///                 + 2 tr(J' Sigma J) ]
/// where J is the (m x d) Jacobian of t.
double expfam_hyvarinen_score(const ScalarField& a, const VectorField& t,
                              std::span<const double> mu, const Matrix& sigma,
                              std::span<const double> x0);

/// Normal linear model y ~ N(X theta, sigma2 I) with known sigma2 and an
/// optional proper normal prior theta ~ N(prior_mean, prior_cov).  p = 0
/// (empty design) means a known zero mean.
struct NormalLinearModel {
  Matrix x;
  double sigma2 = 1.0;
  std::optional<std::vector<double>> prior_mean;
  std::optional<Matrix> prior_cov;
};

/// Flat-prior-limit derivative-matching score of the whole data vector:
///   (RSS - 2 nu sigma2) / sigma2^2,  nu = N - p.
/// Note: this and the other whole-vector linear-model scores below carry
/// twice the normalization of evaluate_score's Hyvarinen value, keeping the
/// family internally affine-consistent (see aic_gap).
double nlm_improper_hyvarinen(const NormalLinearModel& model,
                              std::span<const double> y);

/// Proper-prior counterpart: -2 tr(Phi) + |Phi (y - X m)|^2 with
///   Phi = (1/sigma2) { I - X (X'X + sigma2 V^{-1})^{-1} X' },
/// the precision of the marginal law of y.  Approaches the flat-prior score
/// as V grows.
double nlm_proper_hyvarinen(const NormalLinearModel& model,
                            std::span<const double> y);

/// Affine-equivalence witness between the flat-prior score and AIC:
///   sigma2 * nlm_improper_hyvarinen - (RSS/sigma2 + 2p),
/// which equals -2N for every model sharing N and sigma2.
double aic_gap(const NormalLinearModel& model, std::span<const double> y);

/// One-step-ahead cumulative score: recursive least squares over the rows of
/// X in data order; after a p-row burn-in, each observation contributes
///   (Z_n^2 - 2 sigma2) / (k_n^2 sigma2^2)
/// with raw prediction error e_n, k_n^2 = 1 + x_n' (X_{n-1}'X_{n-1})^{-1} x_n
/// and Z_n = e_n / k_n.  A rank-deficient burn-in raises rank_error naming
/// the first row at which the rank stalls.
double prequential_hyvarinen(const NormalLinearModel& model,
                             std::span<const double> y);

struct ModelScore {
  std::string id;
  double score = 0.0;
  bool scale_arbitrary = false;
  bool failed = false;
  std::string error;
};

struct ModelComparisonReport {
  std::vector<ModelScore> scores;
  /// score_difference(i, j) = score_i - score_j; antisymmetric exactly;
  /// NaN where either model failed.
  Matrix differences;
  /// Indices of successful models, ascending score (lower = better).
  std::vector<std::size_t> ranking;
  /// Pairs of successful models whose difference is exactly zero.
  std::vector<std::pair<std::size_t, std::size_t>> ties;
};

/// Score every model at x0 under the rule (Log: negative log marginal,
/// needs proper priors; Hyvarinen: posterior-decomposed predictive score,
/// proper posterior suffices; Tsallis/Bregman: score of the quadrature
/// marginal, needs proper priors and rule.integration_grid).  Per-model
/// failures are recorded in the report instead of aborting the run.
ModelComparisonReport compare_models(const RuleSpec& rule,
                                     const std::vector<BayesModelSpec>& models,
                                     std::span<const double> x0);

/// Score difference S(x0, model_a) - S(x0, model_b) under the same
/// conventions as compare_models, raising the per-model error instead of
/// recording it.
double score_difference(const RuleSpec& rule, const BayesModelSpec& model_a,
                        const BayesModelSpec& model_b,
                        std::span<const double> x0);

}  // namespace scorelab
