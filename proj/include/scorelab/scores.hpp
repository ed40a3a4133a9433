#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scorelab/numerics.hpp"

namespace scorelab {

/// Finitely supported distribution with named outcomes.  Probabilities must
/// be non-negative and sum to one within 1e-12; labels must be unique.
struct DiscreteDistribution {
  std::vector<std::string> labels;
  std::vector<double> probs;

  DiscreteDistribution(std::vector<std::string> labels,
                       std::vector<double> probs);

  /// Two-point distribution on {"0","1"} with P(X=1) = q.
  static DiscreteDistribution binary(double q);

  std::size_t size() const { return probs.size(); }
  std::size_t index_of(const std::string& label) const;
};

/// Density on R^d, possibly unnormalized (only log-density is required).
/// Analytic derivatives are optional; evaluators fall back to central
/// differences of log_density when they are absent.
struct DensityModel {
  std::function<double(std::span<const double>)> log_density;
  std::function<std::vector<double>(std::span<const double>)>
      grad_log_density;  // optional
  std::function<double(std::span<const double>)>
      laplacian_log_density;  // optional
  std::size_t dimension = 1;
  bool normalized = true;
};

/// 1-D normal with analytic gradient and Laplacian of the log-density.
DensityModel normal_density(double mean, double variance);

/// Convex generator ψ with first and second derivatives.  The flag records
/// whether ψ'' stays bounded on (0, M] for finite M — the property the
/// robustness checks need symbolically.
struct PsiTriple {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  bool d2_bounded_near_zero = false;
};

PsiTriple psi_tlogt();
PsiTriple psi_power(double gamma);  // requires gamma > 1
PsiTriple psi_brier();

/// Registry lookup: "tlogt", "power:<gamma>", "brier".
PsiTriple psi_by_name(const std::string& name);

enum class RuleFamily { Log, Brier, Tsallis, Bregman, Hyvarinen, FromLoss };

/// A scoring rule plus the configuration it needs.  Construct through the
/// factories, which validate side conditions (Tsallis gamma > 1, rectangular
/// loss tables, ...).
struct RuleSpec {
  RuleFamily family = RuleFamily::Log;
  double gamma = 0.0;
  std::optional<PsiTriple> psi;
  /// Quadrature grid for the integral term of continuous Tsallis/Bregman
  /// scores; unused by other families.
  std::optional<Grid1D> integration_grid;
  /// FromLoss: loss(x, a), rows = outcomes, columns = actions.
  std::vector<std::vector<double>> loss_table;

  static RuleSpec log_score();
  static RuleSpec brier();
  static RuleSpec tsallis(double gamma);
  static RuleSpec bregman(PsiTriple psi);
  static RuleSpec hyvarinen();
  static RuleSpec from_loss(std::vector<std::vector<double>> loss_table);

  std::string name() const;
};

/// Registry lookup for the CLI: log | brier | tsallis | bregman | hyvarinen |
/// zero-one.  Throws validation_error listing the registry on a miss.
RuleSpec rule_by_name(const std::string& name,
                      std::optional<double> gamma = std::nullopt,
                      const std::optional<std::string>& psi = std::nullopt,
                      std::size_t support_size = 0);

/// Bayes act under loss table L for belief q: argmin_a E_q L(X, a), lowest
/// index on ties.
std::size_t bayes_act(const std::vector<std::vector<double>>& loss_table,
                      const DiscreteDistribution& q);

/// Score of outcome x (index into the support) under forecast Q.  Log-type
/// scores at zero probability return +infinity rather than throwing: infinite
/// scores are values and propagate through sums.
double evaluate_score(const RuleSpec& rule, std::size_t x,
                      const DiscreteDistribution& q);

/// Score of a continuous observation under a density model.  Hyvarinen reads
/// only derivatives of the log-density, so it is invariant to the density's
/// normalization; Tsallis/Bregman need rule.integration_grid and dimension 1.
double evaluate_score(const RuleSpec& rule, std::span<const double> x,
                      const DensityModel& q);

double expected_score(const RuleSpec& rule, const DiscreteDistribution& p,
                      const DiscreteDistribution& q);
double expected_score(const RuleSpec& rule, const DensityModel& p,
                      const DensityModel& q, const Grid1D& grid);

double entropy(const RuleSpec& rule, const DiscreteDistribution& p);
double entropy(const RuleSpec& rule, const DensityModel& p, const Grid1D& grid);

double divergence(const RuleSpec& rule, const DiscreteDistribution& p,
                  const DiscreteDistribution& q);
double divergence(const RuleSpec& rule, const DensityModel& p,
                  const DensityModel& q, const Grid1D& grid);

/// Joint law of a pair (X, U) on finite supports; probs is |X| x |U|,
/// validated like DiscreteDistribution.
struct JointDistribution {
  std::vector<std::string> x_labels;
  std::vector<std::string> u_labels;
  std::vector<double> probs;  // row-major, rows indexed by X

  JointDistribution(std::vector<std::string> x_labels,
                    std::vector<std::string> u_labels,
                    std::vector<double> probs);

  double p(std::size_t x, std::size_t u) const {
    return probs[x * u_labels.size() + u];
  }
  DiscreteDistribution marginal_x() const;
  std::vector<double> marginal_u() const;
  DiscreteDistribution conditional_x_given_u(std::size_t u) const;
};

/// Entropy drop of X from observing U: H(P_X) − E_U H(P_{X|U}).
/// Conditioning events with zero probability are skipped.
double dependence(const RuleSpec& rule, const JointDistribution& joint);

/// Possibly right-censored lifetime: event=false means censored at time.
struct SurvivalObservation {
  double time = 0.0;
  bool event = true;
};

using HazardFn = std::function<double(double)>;

/// ψ-based survival score: integral over [0, time] of λψ'(λ) − ψ(λ) at the
/// forecast hazard, minus ψ'(λ(time)) when the event was observed.
/// quad_points controls the Simpson grid on [0, time].
double survival_score(const SurvivalObservation& obs, const HazardFn& hazard,
                      const PsiTriple& psi, std::size_t quad_points = 201);

/// One additive term of a composite score: a rule applied to the coordinates
/// in `coords` under its own forecast.  Discrete components take exactly one
/// coordinate whose value is the outcome index.
struct CompositeComponent {
  RuleSpec rule;
  std::vector<std::size_t> coords;
  std::variant<DiscreteDistribution, DensityModel> forecast;
};

double composite_score(std::span<const double> x,
                       const std::vector<CompositeComponent>& components);

/// Sum of base-rule scores of each site's value under its full conditional
/// given the rest of the configuration.
double pseudo_score(
    std::span<const int> config,
    const std::function<DiscreteDistribution(std::size_t, std::span<const int>)>&
        full_conditional,
    const RuleSpec& base);

struct ProprietyReport {
  bool pass = false;
  /// Worst finite S(P,Q) − S(P,P) over the lattice (negative = violation).
  double worst_margin = 0.0;
  std::vector<double> worst_p;
  std::vector<double> worst_q;
  /// Smallest margin over pairs with Q != P; zero for proper-but-not-strict
  /// rules, strictly positive on the lattice for strictly proper ones.
  double min_offdiagonal_gap = 0.0;
  std::size_t pairs_checked = 0;
};

/// Brute-force propriety sweep over the probability simplex lattice with the
/// given step (e.g. 0.01).  Margins below -1e-9 fail the report.
ProprietyReport check_propriety(const RuleSpec& rule, std::size_t support_size,
                                double grid_step);

}  // namespace scorelab
