#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scorelab/matrix.hpp"
#include "scorelab/numerics.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/scores.hpp"

namespace scorelab {

/// Parametric family of sampling distributions.  Observations are rows of a
/// data matrix (length obs_dim); parameters are vectors of length param_dim.
/// Everything beyond log_density is optional capability, queried before use.
class Family {
 public:
  virtual ~Family() = default;

  virtual std::string name() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::size_t obs_dim() const { return 1; }
  virtual bool discrete() const { return false; }
  virtual Box theta_domain() const { return {}; }

  virtual double log_density(std::span<const double> x,
                             std::span<const double> theta) const = 0;

  // Derivatives in the observation (needed by derivative-based rules).
  virtual bool has_spatial_derivatives() const { return false; }
  virtual std::vector<double> grad_log_density_x(
      std::span<const double> x, std::span<const double> theta) const;
  virtual double laplacian_log_density_x(std::span<const double> x,
                                         std::span<const double> theta) const;

  virtual bool has_sampler() const { return false; }
  virtual void sample(std::span<const double> theta, RandomStream& rng,
                      std::span<double> out) const;

  /// Grid for expectations over a scalar observation at the given parameter.
  virtual Grid1D x_quadrature(std::span<const double> theta) const;

  /// Finite-support families expose their law directly.
  virtual DiscreteDistribution discrete_law(std::span<const double> theta) const;

  /// True when the integral term of Bregman-type scores does not depend on
  /// theta (location families), enabling a one-time quadrature.
  virtual bool location_invariant_integral() const { return false; }

  /// Hook for registered closed-form score gradients.  Returns false when no
  /// closed form exists for this (rule, family) pair.
  virtual bool closed_form_gradient(const RuleSpec& rule,
                                    std::span<const double> x,
                                    std::span<const double> theta,
                                    std::span<double> out) const;

  /// Starting point for numeric fits.
  virtual std::vector<double> default_start(const Matrix& data) const;
};

/// 1-D location density descriptor: the shape f, its derivative, a sampler
/// for the standardized offset, and the symbolic boundedness of f' that the
/// robustness conditions consult.
struct LocationDensity {
  std::string name;
  std::function<double(double)> pdf;
  std::function<double(double)> dpdf;
  std::function<double(RandomStream&)> draw;
  bool derivative_bounded = true;
};

LocationDensity location_normal();
LocationDensity location_logistic();
LocationDensity location_cauchy();
LocationDensity location_gumbel();

/// Registry: normal | logistic | cauchy | extreme-value (alias gumbel).
LocationDensity location_density_by_name(const std::string& name);

/// theta = (location); density f(x - theta) for a fixed shape f.
class LocationFamily : public Family {
 public:
  explicit LocationFamily(LocationDensity shape);

  std::string name() const override { return shape_.name + "-location"; }
  std::size_t param_dim() const override { return 1; }
  double log_density(std::span<const double> x,
                     std::span<const double> theta) const override;
  bool has_sampler() const override { return static_cast<bool>(shape_.draw); }
  void sample(std::span<const double> theta, RandomStream& rng,
              std::span<double> out) const override;
  Grid1D x_quadrature(std::span<const double> theta) const override;
  bool location_invariant_integral() const override { return true; }
  bool closed_form_gradient(const RuleSpec& rule, std::span<const double> x,
                            std::span<const double> theta,
                            std::span<double> out) const override;
  std::vector<double> default_start(const Matrix& data) const override;

  const LocationDensity& shape() const { return shape_; }

 protected:
  LocationDensity shape_;
};

/// Normal location model with known sigma; adds analytic observation-side
/// derivatives and the classic log-score gradient.
class NormalLocationFamily : public LocationFamily {
 public:
  explicit NormalLocationFamily(double sigma = 1.0);

  std::string name() const override { return "normal-location"; }
  bool has_spatial_derivatives() const override { return true; }
  std::vector<double> grad_log_density_x(
      std::span<const double> x, std::span<const double> theta) const override;
  double laplacian_log_density_x(std::span<const double> x,
                                 std::span<const double> theta) const override;
  bool closed_form_gradient(const RuleSpec& rule, std::span<const double> x,
                            std::span<const double> theta,
                            std::span<double> out) const override;
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// Bernoulli family on {0,1}; theta = (q) with q in (0,1).
class BernoulliFamily : public Family {
 public:
  std::string name() const override { return "bernoulli"; }
  std::size_t param_dim() const override { return 1; }
  bool discrete() const override { return true; }
  Box theta_domain() const override;
  double log_density(std::span<const double> x,
                     std::span<const double> theta) const override;
  DiscreteDistribution discrete_law(std::span<const double> theta) const override;
  bool has_sampler() const override { return true; }
  void sample(std::span<const double> theta, RandomStream& rng,
              std::span<double> out) const override;
  bool closed_form_gradient(const RuleSpec& rule, std::span<const double> x,
                            std::span<const double> theta,
                            std::span<double> out) const override;
  std::vector<double> default_start(const Matrix& data) const override;
};

/// Family registry for the CLI: normal-location | logistic-location |
/// cauchy-location | extreme-value-location | bernoulli.
std::shared_ptr<const Family> family_by_name(const std::string& name);

/// View a family at a fixed parameter as a DensityModel (analytic
/// observation-side derivatives are forwarded when the family has them).
DensityModel to_density_model(std::shared_ptr<const Family> family,
                              std::vector<double> theta);

/// Binds a scoring rule to a family, yielding the per-observation loss
/// S(x, theta) and its parameter gradient.  Caches the theta-free integral
/// term for location families.  Not safe for concurrent use; construct one
/// per worker thread.
class ScoreModel {
 public:
  ScoreModel(RuleSpec rule, std::shared_ptr<const Family> family);

  const RuleSpec& rule() const { return rule_; }
  const Family& family() const { return *family_; }

  double score(std::span<const double> x, std::span<const double> theta) const;
  std::vector<double> gradient(std::span<const double> x,
                               std::span<const double> theta) const;

  double total_score(const Matrix& data, std::span<const double> theta) const;

 private:
  RuleSpec rule_;
  std::shared_ptr<const Family> family_;
  mutable std::optional<double> cached_dual_;
};

struct EstimationOptions {
  std::vector<double> start;  // empty: family default
  MinimizeOptions minimize;
  bool compute_sandwich = true;
};

struct EstimationResult {
  std::vector<double> theta;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t n = 0;
  /// Empirical curvature/variability of the score equation at the estimate;
  /// absent (with `degeneracy` explaining why) when a factorization failed.
  std::optional<Matrix> j_hat;
  std::optional<Matrix> k_hat;
  std::optional<Matrix> godambe;
  std::optional<Matrix> sandwich_cov;
  std::string degeneracy;
};

/// Minimize the summed score over the family's parameter domain and attach
/// the usual sandwich quantities: J = mean outer product of per-observation
/// gradients, K = mean gradient Jacobian (symmetrized), G = K J^{-1} K,
/// sandwich covariance = (n G)^{-1}.
EstimationResult minimum_score_estimate(const ScoreModel& model,
                                        const Matrix& data,
                                        const EstimationOptions& options = {});

struct UnbiasednessCheck {
  std::vector<double> mean;
  std::vector<double> se;
  std::size_t draws = 0;
  /// |mean| <= k * se in every component.
  bool within(double k) const;
};

/// Monte Carlo check that the score equation is unbiased at theta: draws
/// from the family at theta and averages the score gradient.
UnbiasednessCheck check_unbiased_estimating_equation(const ScoreModel& model,
                                                     std::span<const double> theta,
                                                     std::size_t n_draws,
                                                     SeedSpec seed);

/// Model-based J(theta) = E[s s^T] via quadrature (or exact summation for
/// finite supports).
Matrix expected_score_outer(const ScoreModel& model,
                            std::span<const double> theta);

/// Model-based K(theta) = E[d s / d theta], symmetrized.
Matrix expected_score_jacobian(const ScoreModel& model,
                               std::span<const double> theta);

/// Godambe information K J^{-1} K from the model-based expectations.
Matrix godambe_information(const ScoreModel& model,
                           std::span<const double> theta);

/// Influence of one observation on the estimator: -K(theta)^{-1} s(x, theta).
std::vector<double> influence_function(const ScoreModel& model,
                                       std::span<const double> x,
                                       std::span<const double> theta);

struct RobustnessReport {
  bool classified_bounded = false;
  /// Running max of |psi''(f(u)) f'(u)| over all rounds; +infinity when a
  /// non-finite value was hit.
  double sup_estimate = 0.0;
  /// u at which the running max was attained.
  double grid_max_location = 0.0;
  std::vector<double> round_maxima;
  /// Symbolic sufficient conditions: bounded shape derivative and bounded
  /// psi'' near zero.
  bool condition_density = false;
  bool condition_psi = false;
};

/// Grid classification of sup_u |psi''(f(u)) f'(u)| under doubling windows
/// [-W, W]: bounded when the running max stabilizes (relative change below
/// 1e-6 across the final two rounds).  Bounded gradient <=> bounded
/// influence for location fits.  Keep the rounds few enough that the widest
/// window stays inside the representable support of f: once f underflows the
/// grid stops seeing growth, which would launder an unbounded gradient into
/// a "stable" max.
RobustnessReport brobustness_check(const PsiTriple& psi,
                                   const LocationDensity& shape,
                                   double grid_halfwidth = 8.0,
                                   int growth_rounds = 4,
                                   std::size_t points_per_round = 4001);

/// Monte Carlo average of IF IF^T over draws from the family at theta;
/// converges to the inverse Godambe information.
Matrix sandwich_from_if(const ScoreModel& model, std::span<const double> theta,
                        std::size_t n_draws, SeedSpec seed);

}  // namespace scorelab
