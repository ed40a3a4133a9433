#include "scorelab/scores.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"
#include "scorelab/errors.hpp"
#include "scorelab/numerics.hpp"

using namespace scorelab;

namespace {

DiscreteDistribution binary(double q) { return DiscreteDistribution::binary(q); }

DensityModel quartic_model(double level) {
  DensityModel m;
  m.log_density = [level](std::span<const double> x) {
    return -0.25 * x[0] * x[0] * x[0] * x[0] + level;
  };
  m.grad_log_density = [](std::span<const double> x) {
    return std::vector<double>{-x[0] * x[0] * x[0]};
  };
  m.laplacian_log_density = [](std::span<const double> x) {
    return -3.0 * x[0] * x[0];
  };
  m.normalized = false;
  return m;
}

}  // namespace

TEST_CASE("brier score frozen values") {
  CHECK(evaluate_score(RuleSpec::brier(), 1, binary(0.7)) ==
        doctest::Approx(0.09).epsilon(1e-12));
  CHECK(evaluate_score(RuleSpec::brier(), 0, binary(0.2)) ==
        doctest::Approx(0.04).epsilon(1e-12));
  // certain forecast, correct outcome: zero penalty
  CHECK(evaluate_score(RuleSpec::brier(), 1, binary(1.0)) ==
        doctest::Approx(0.0));
}

TEST_CASE("brier entropy and divergence frozen values") {
  CHECK(entropy(RuleSpec::brier(), binary(0.3)) ==
        doctest::Approx(0.21).epsilon(1e-12));
  CHECK(divergence(RuleSpec::brier(), binary(0.8), binary(0.5)) ==
        doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("log score expected value and divergence frozen values") {
  const auto p = binary(0.5);
  const auto q = binary(0.75);
  CHECK(expected_score(RuleSpec::log_score(), p, q) ==
        doctest::Approx(0.8370).epsilon(1e-4));
  CHECK(divergence(RuleSpec::log_score(), p, q) ==
        doctest::Approx(0.14384).epsilon(1e-4));
  // zero-probability outcome scores +infinity, and it propagates
  const DiscreteDistribution degenerate({"0", "1"}, {1.0, 0.0});
  CHECK(std::isinf(evaluate_score(RuleSpec::log_score(), 1, degenerate)));
}

TEST_CASE("tsallis score on the fair coin") {
  const auto fair = binary(0.5);
  CHECK(evaluate_score(RuleSpec::tsallis(2.0), 0, fair) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(evaluate_score(RuleSpec::tsallis(2.0), 1, fair) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(entropy(RuleSpec::tsallis(2.0), fair) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS((void)RuleSpec::tsallis(1.0), validation_error);
}

TEST_CASE("bregman with t log t matches the log score") {
  const RuleSpec breg = RuleSpec::bregman(psi_tlogt());
  const RuleSpec log_rule = RuleSpec::log_score();
  for (double q : {0.1, 0.35, 0.5, 0.8, 0.99}) {
    const auto d = binary(q);
    for (std::size_t x : {std::size_t{0}, std::size_t{1}}) {
      CHECK(evaluate_score(breg, x, d) ==
            doctest::Approx(evaluate_score(log_rule, x, d)).epsilon(1e-9));
    }
  }
}

TEST_CASE("bregman with a power generator matches tsallis") {
  for (double gamma : {1.5, 2.0, 3.0}) {
    const RuleSpec breg = RuleSpec::bregman(psi_power(gamma));
    const RuleSpec ts = RuleSpec::tsallis(gamma);
    const DiscreteDistribution d({"a", "b", "c"}, {0.2, 0.5, 0.3});
    for (std::size_t x = 0; x < 3; ++x) {
      CHECK(evaluate_score(breg, x, d) ==
            doctest::Approx(evaluate_score(ts, x, d)).epsilon(1e-9));
    }
  }
}

TEST_CASE("psi registry round-trips and validates") {
  CHECK(psi_by_name("tlogt").name == "tlogt");
  CHECK(psi_by_name("power:2.5").name == "power:2.500000");
  CHECK(psi_by_name("brier").d2(0.3) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)psi_by_name("cubic"), validation_error);
  CHECK_THROWS_AS((void)psi_by_name("power:1"), validation_error);
}

TEST_CASE("hyvarinen score of a normal at its mean") {
  const DensityModel n01 = normal_density(0.0, 1.0);
  const std::vector<double> x{0.0};
  CHECK(evaluate_score(RuleSpec::hyvarinen(), x, n01) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  // at mean +/- sigma the gradient term adds 1/2
  const std::vector<double> x1{1.0};
  CHECK(evaluate_score(RuleSpec::hyvarinen(), x1, n01) ==
        doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("hyvarinen score ignores the normalization level bit-for-bit") {
  const DensityModel base = quartic_model(0.0);
  const DensityModel lifted = quartic_model(7.25);
  for (double v : {-1.7, -0.4, 0.0, 0.9, 2.3}) {
    const std::vector<double> x{v};
    const double a = evaluate_score(RuleSpec::hyvarinen(), x, base);
    const double b = evaluate_score(RuleSpec::hyvarinen(), x, lifted);
    CHECK(a == b);
  }
}

TEST_CASE("finite-difference fallback tracks analytic derivatives") {
  const DensityModel analytic = normal_density(0.3, 1.4);
  DensityModel fd;
  fd.log_density = analytic.log_density;
  fd.dimension = 1;
  for (double v : {-1.0, 0.0, 0.7, 2.1}) {
    const std::vector<double> x{v};
    CHECK(evaluate_score(RuleSpec::hyvarinen(), x, fd) ==
          doctest::Approx(evaluate_score(RuleSpec::hyvarinen(), x, analytic))
              .epsilon(1e-4));
  }
}

TEST_CASE("continuous divergences of shifted normals") {
  const DensityModel p = normal_density(0.0, 1.0);
  const DensityModel q = normal_density(0.5, 1.0);
  const Grid1D grid(-12.0, 12.0, 2001);
  // relative entropy (mu difference)^2 / 2
  CHECK(divergence(RuleSpec::log_score(), p, q, grid) ==
        doctest::Approx(0.125).epsilon(1e-6));
  // the derivative-matching divergence of equal-variance normals coincides
  CHECK(divergence(RuleSpec::hyvarinen(), p, q, grid) ==
        doctest::Approx(0.125).epsilon(1e-6));
  CHECK(divergence(RuleSpec::log_score(), p, p, grid) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero-one loss score and bayes act") {
  const RuleSpec rule = rule_by_name("zero-one", {}, {}, 2);
  CHECK(evaluate_score(rule, 1, binary(0.7)) == doctest::Approx(0.0));
  CHECK(evaluate_score(rule, 0, binary(0.7)) == doctest::Approx(1.0));
  // ties resolve to the lowest action index
  CHECK(bayes_act(rule.loss_table, binary(0.5)) == 0);
  CHECK(evaluate_score(rule, 0, binary(0.5)) == doctest::Approx(0.0));
}

TEST_CASE("rule registry lists its contents on a miss") {
  CHECK_THROWS_WITH_AS((void)rule_by_name("crps"),
                       doctest::Contains("known rules"), validation_error);
  CHECK(rule_by_name("tsallis", 2.0).gamma == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)rule_by_name("bregman", {}, std::string("nope")),
                  validation_error);
}

TEST_CASE("discrete distribution validation") {
  CHECK_THROWS_AS(DiscreteDistribution({"a", "b"}, {0.7, 0.7}),
                  validation_error);
  CHECK_THROWS_AS(DiscreteDistribution({"a", "b"}, {-0.1, 1.1}),
                  validation_error);
  CHECK_THROWS_AS(DiscreteDistribution({"a", "a"}, {0.5, 0.5}),
                  validation_error);
  const DiscreteDistribution d({"x", "y"}, {0.25, 0.75});
  CHECK(d.index_of("y") == 1);
  CHECK_THROWS_AS((void)d.index_of("z"), validation_error);
}

TEST_CASE("survival score with unit hazard and a square generator") {
  const PsiTriple psi = psi_power(2.0);
  const HazardFn unit = [](double) { return 1.0; };
  CHECK(survival_score({1.0, true}, unit, psi) ==
        doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(survival_score({1.0, false}, unit, psi) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(survival_score({0.0, false}, unit, psi) ==
        doctest::Approx(0.0).epsilon(1e-12));
  const HazardFn negative = [](double) { return -0.5; };
  CHECK_THROWS_AS((void)survival_score({1.0, true}, negative, psi),
                  domain_error);
}

TEST_CASE("composite score of an independent pair is the joint log score") {
  const auto p1 = binary(0.3);
  const auto p2 = binary(0.6);
  std::vector<CompositeComponent> parts;
  parts.push_back({RuleSpec::log_score(), {0}, p1});
  parts.push_back({RuleSpec::log_score(), {1}, p2});
  const std::vector<double> x{1.0, 0.0};  // outcome (1, 0)
  const double joint = -std::log(0.3 * 0.4);
  CHECK(composite_score(x, parts) == doctest::Approx(joint).epsilon(1e-12));
}

TEST_CASE("pseudo score over fair full conditionals") {
  const auto fair = [](std::size_t, std::span<const int>) {
    return DiscreteDistribution::binary(0.5);
  };
  const std::vector<int> config{0, 1, 1, 0};
  CHECK(pseudo_score(config, fair, RuleSpec::log_score()) ==
        doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(pseudo_score(config, fair, RuleSpec::brier()) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dependence measures of coupled and independent pairs") {
  const JointDistribution coupled({"0", "1"}, {"0", "1"},
                                  {0.5, 0.0, 0.0, 0.5});
  CHECK(dependence(RuleSpec::log_score(), coupled) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(dependence(RuleSpec::brier(), coupled) ==
        doctest::Approx(0.25).epsilon(1e-12));
  const JointDistribution indep({"0", "1"}, {"0", "1"},
                                {0.25, 0.25, 0.25, 0.25});
  CHECK(dependence(RuleSpec::log_score(), indep) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dependence(RuleSpec::brier(), indep) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("propriety sweep passes for strictly proper rules") {
  const ProprietyReport log_report =
      check_propriety(RuleSpec::log_score(), 2, 0.05);
  CHECK(log_report.pass);
  CHECK(log_report.min_offdiagonal_gap > 0.0);

  const ProprietyReport brier_report =
      check_propriety(RuleSpec::brier(), 3, 0.1);
  CHECK(brier_report.pass);
  CHECK(brier_report.min_offdiagonal_gap > 0.0);
}

TEST_CASE("propriety sweep flags the zero-one rule as proper but not strict") {
  const RuleSpec rule = rule_by_name("zero-one", {}, {}, 2);
  const ProprietyReport report = check_propriety(rule, 2, 0.05);
  CHECK(report.pass);
  CHECK(report.min_offdiagonal_gap == doctest::Approx(0.0));
}

TEST_CASE("continuous evaluation rejects rules that need a finite support") {
  const DensityModel n01 = normal_density(0.0, 1.0);
  const std::vector<double> x{0.0};
  CHECK_THROWS_AS((void)evaluate_score(RuleSpec::brier(), x, n01),
                  validation_error);
  RuleSpec ts = RuleSpec::tsallis(2.0);
  // Tsallis needs an integration grid in the continuous case
  CHECK_THROWS_AS((void)evaluate_score(ts, x, n01), validation_error);
  ts.integration_grid = Grid1D(-10.0, 10.0, 801);
  // S(x, q) = integral of q^2 - 2 q(x) = 1/(2 sqrt(pi)) - 2 phi(0)
  const double expected =
      1.0 / (2.0 * std::sqrt(M_PI)) - 2.0 / std::sqrt(2.0 * M_PI);
  CHECK(evaluate_score(ts, x, n01) == doctest::Approx(expected).epsilon(1e-8));
}
