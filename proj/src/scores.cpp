#include "scorelab/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/kernels.hpp"

namespace scorelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_prob(double p, const char* context) {
  if (!std::isfinite(p) || p < 0.0)
    throw validation_error(std::string(context) +
                           ": probabilities must be finite and non-negative");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<std::string> labels_in,
                                           std::vector<double> probs_in)
    : labels(std::move(labels_in)), probs(std::move(probs_in)) {
  if (labels.size() != probs.size())
    throw validation_error("DiscreteDistribution: label/probability count mismatch");
  if (probs.empty())
    throw validation_error("DiscreteDistribution: empty support");
  double total = 0.0;
  for (double p : probs) {
    require_finite_prob(p, "DiscreteDistribution");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw validation_error(
        "DiscreteDistribution: probabilities sum to " + std::to_string(total) +
        ", expected 1 within 1e-12");
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size())
    throw validation_error("DiscreteDistribution: duplicate outcome labels");
}

DiscreteDistribution DiscreteDistribution::binary(double q) {
  return DiscreteDistribution({"0", "1"}, {1.0 - q, q});
}

std::size_t DiscreteDistribution::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  throw validation_error("DiscreteDistribution: unknown outcome label '" +
                         label + "'");
}

DensityModel normal_density(double mean, double variance) {
  if (!(variance > 0.0))
    throw validation_error("normal_density: variance must be positive");
  DensityModel m;
  const double c = -0.5 * std::log(2.0 * std::numbers::pi * variance);
  m.log_density = [mean, variance, c](std::span<const double> x) {
    const double u = x[0] - mean;
    return c - 0.5 * u * u / variance;
  };
  m.grad_log_density = [mean, variance](std::span<const double> x) {
    return std::vector<double>{-(x[0] - mean) / variance};
  };
  m.laplacian_log_density = [variance](std::span<const double>) {
    return -1.0 / variance;
  };
  m.dimension = 1;
  m.normalized = true;
  return m;
}

PsiTriple psi_tlogt() {
  PsiTriple psi;
  psi.name = "tlogt";
  psi.value = [](double t) { return t > 0.0 ? t * std::log(t) : 0.0; };
  psi.d1 = [](double t) { return std::log(t) + 1.0; };
  psi.d2 = [](double t) { return 1.0 / t; };
  psi.d2_bounded_near_zero = false;
  return psi;
}

PsiTriple psi_power(double gamma) {
  if (!(gamma > 1.0))
    throw validation_error("psi_power: gamma must exceed 1");
  PsiTriple psi;
  psi.name = "power:" + std::to_string(gamma);
  psi.value = [gamma](double t) { return std::pow(t, gamma); };
  psi.d1 = [gamma](double t) { return gamma * std::pow(t, gamma - 1.0); };
  psi.d2 = [gamma](double t) {
    return gamma * (gamma - 1.0) * std::pow(t, gamma - 2.0);
  };
  psi.d2_bounded_near_zero = gamma >= 2.0;
  return psi;
}

PsiTriple psi_brier() {
  PsiTriple psi;
  psi.name = "brier";
  psi.value = [](double t) { return (2.0 * t * t - 1.0) / 4.0; };
  psi.d1 = [](double t) { return t; };
  psi.d2 = [](double) { return 1.0; };
  psi.d2_bounded_near_zero = true;
  return psi;
}

PsiTriple psi_by_name(const std::string& name) {
  if (name == "tlogt") return psi_tlogt();
  if (name == "brier") return psi_brier();
  if (name.rfind("power:", 0) == 0) {
    try {
      return psi_power(std::stod(name.substr(6)));
    } catch (const std::logic_error&) {
      throw validation_error("psi registry: cannot parse gamma in '" + name +
                             "'");
    }
  }
  throw validation_error("psi registry: unknown generator '" + name +
                         "'; known: tlogt, power:<gamma>, brier");
}

RuleSpec RuleSpec::log_score() { return RuleSpec{RuleFamily::Log}; }

RuleSpec RuleSpec::brier() { return RuleSpec{RuleFamily::Brier}; }

RuleSpec RuleSpec::tsallis(double gamma) {
  if (!(gamma > 1.0))
    throw validation_error("RuleSpec::tsallis: gamma must exceed 1");
  RuleSpec r{RuleFamily::Tsallis};
  r.gamma = gamma;
  return r;
}

RuleSpec RuleSpec::bregman(PsiTriple psi) {
  RuleSpec r{RuleFamily::Bregman};
  r.psi = std::move(psi);
  return r;
}

RuleSpec RuleSpec::hyvarinen() { return RuleSpec{RuleFamily::Hyvarinen}; }

RuleSpec RuleSpec::from_loss(std::vector<std::vector<double>> loss_table) {
  if (loss_table.empty() || loss_table.front().empty())
    throw validation_error("RuleSpec::from_loss: empty loss table");
  const std::size_t actions = loss_table.front().size();
  for (const auto& row : loss_table)
    if (row.size() != actions)
      throw validation_error("RuleSpec::from_loss: ragged loss table");
  RuleSpec r{RuleFamily::FromLoss};
  r.loss_table = std::move(loss_table);
  return r;
}

std::string RuleSpec::name() const {
  switch (family) {
    case RuleFamily::Log:
      return "log";
    case RuleFamily::Brier:
      return "brier";
    case RuleFamily::Tsallis:
      return "tsallis(" + std::to_string(gamma) + ")";
    case RuleFamily::Bregman:
      return "bregman(" + (psi ? psi->name : "?") + ")";
    case RuleFamily::Hyvarinen:
      return "hyvarinen";
    case RuleFamily::FromLoss:
      return "from-loss";
  }
  return "?";
}

RuleSpec rule_by_name(const std::string& name, std::optional<double> gamma,
                      const std::optional<std::string>& psi,
                      std::size_t support_size) {
  if (name == "log") return RuleSpec::log_score();
  if (name == "brier") return RuleSpec::brier();
  if (name == "hyvarinen") return RuleSpec::hyvarinen();
  if (name == "tsallis") {
    if (!gamma)
      throw validation_error("rule 'tsallis' needs a gamma parameter (> 1)");
    return RuleSpec::tsallis(*gamma);
  }
  if (name == "bregman") {
    if (!psi)
      throw validation_error(
          "rule 'bregman' needs a psi generator (tlogt, power:<gamma>, brier)");
    return RuleSpec::bregman(psi_by_name(*psi));
  }
  if (name == "zero-one") {
    if (support_size < 2)
      throw validation_error("rule 'zero-one' needs a support size >= 2");
    std::vector<std::vector<double>> table(
        support_size, std::vector<double>(support_size, 1.0));
    for (std::size_t i = 0; i < support_size; ++i) table[i][i] = 0.0;
    return RuleSpec::from_loss(std::move(table));
  }
  throw validation_error(
      "unknown rule '" + name +
      "'; known rules: log, brier, tsallis, bregman, hyvarinen, zero-one");
}

std::size_t bayes_act(const std::vector<std::vector<double>>& loss_table,
                      const DiscreteDistribution& q) {
  if (loss_table.size() != q.size())
    throw validation_error("bayes_act: loss table rows must match support size");
  const std::size_t actions = loss_table.front().size();
  std::size_t best = 0;
  double best_risk = kInf;
  for (std::size_t a = 0; a < actions; ++a) {
    double risk = 0.0;
    for (std::size_t x = 0; x < q.size(); ++x)
      risk += q.probs[x] * loss_table[x][a];
    if (risk < best_risk) {  // strict: ties keep the lowest action index
      best_risk = risk;
      best = a;
    }
  }
  return best;
}

namespace {

// Shared by discrete Bregman scoring and its continuous integrand: the
// concave part ψ(q) - q ψ'(q), with the q -> 0 limit taken explicitly so a
// zero probability cannot produce 0 * inf.
double bregman_dual_term(const PsiTriple& psi, double q) {
  if (q == 0.0) return psi.value(0.0);
  return psi.value(q) - q * psi.d1(q);
}

double discrete_score(const RuleSpec& rule, std::size_t x,
                      const DiscreteDistribution& q) {
  switch (rule.family) {
    case RuleFamily::Log: {
      const double qx = q.probs[x];
      return qx > 0.0 ? -std::log(qx) : kInf;
    }
    case RuleFamily::Brier: {
      double sq = 0.0;
      for (double p : q.probs) sq += p * p;
      return 0.5 * (1.0 - 2.0 * q.probs[x] + sq);
    }
    case RuleFamily::Tsallis: {
      const double g = rule.gamma;
      double sg = 0.0;
      for (double p : q.probs) sg += std::pow(p, g);
      return (g - 1.0) * sg - g * std::pow(q.probs[x], g - 1.0);
    }
    case RuleFamily::Bregman: {
      const PsiTriple& psi = *rule.psi;
      double dual = 0.0;
      for (double p : q.probs) dual += bregman_dual_term(psi, p);
      const double qx = q.probs[x];
      const double d1 = qx > 0.0 ? psi.d1(qx) : psi.d1(0.0);
      if (std::isinf(d1) && d1 < 0.0) return kInf;
      return -d1 - dual;
    }
    case RuleFamily::FromLoss: {
      if (rule.loss_table.size() != q.size())
        throw validation_error(
            "from-loss rule: loss table rows must match support size");
      return rule.loss_table[x][bayes_act(rule.loss_table, q)];
    }
    case RuleFamily::Hyvarinen:
      throw validation_error(
          "hyvarinen rule needs a continuous sample space; got a discrete "
          "distribution");
  }
  throw validation_error("evaluate_score: unhandled rule family");
}

double density_at(const DensityModel& q, std::span<const double> x) {
  return std::exp(q.log_density(x));
}

}  // namespace

double evaluate_score(const RuleSpec& rule, std::size_t x,
                      const DiscreteDistribution& q) {
  if (x >= q.size())
    throw validation_error("evaluate_score: outcome index out of range");
  return discrete_score(rule, x, q);
}

double evaluate_score(const RuleSpec& rule, std::span<const double> x,
                      const DensityModel& q) {
  if (x.size() != q.dimension)
    throw validation_error("evaluate_score: observation dimension mismatch");
  switch (rule.family) {
    case RuleFamily::Log:
      return -q.log_density(x);
    case RuleFamily::Hyvarinen: {
      std::vector<double> grad =
          q.grad_log_density ? q.grad_log_density(x)
                             : finite_diff_gradient(q.log_density, x);
      const double lap = q.laplacian_log_density
                             ? q.laplacian_log_density(x)
                             : finite_diff_laplacian(q.log_density, x);
      return lap + 0.5 * kernels::dot(grad, grad);
    }
    case RuleFamily::Tsallis: {
      if (q.dimension != 1)
        throw validation_error(
            "continuous tsallis scoring is implemented for dimension 1");
      if (!rule.integration_grid)
        throw validation_error(
            "continuous tsallis scoring needs rule.integration_grid");
      const double g = rule.gamma;
      const double mass = integrate(
          [&](double y) {
            const double v = y;
            return std::pow(density_at(q, std::span<const double>(&v, 1)), g);
          },
          *rule.integration_grid);
      return (g - 1.0) * mass - g * std::pow(density_at(q, x), g - 1.0);
    }
    case RuleFamily::Bregman: {
      if (q.dimension != 1)
        throw validation_error(
            "continuous bregman scoring is implemented for dimension 1");
      if (!rule.integration_grid)
        throw validation_error(
            "continuous bregman scoring needs rule.integration_grid");
      const PsiTriple& psi = *rule.psi;
      const double dual = integrate(
          [&](double y) {
            const double v = y;
            return bregman_dual_term(
                psi, density_at(q, std::span<const double>(&v, 1)));
          },
          *rule.integration_grid);
      const double qx = density_at(q, x);
      const double d1 = qx > 0.0 ? psi.d1(qx) : psi.d1(0.0);
      if (std::isinf(d1) && d1 < 0.0) return kInf;
      return -d1 - dual;
    }
    case RuleFamily::Brier:
      throw validation_error(
          "brier rule scores finite supports; use tsallis(2) for densities");
    case RuleFamily::FromLoss:
      throw validation_error("from-loss rules score finite supports");
  }
  throw validation_error("evaluate_score: unhandled rule family");
}

double expected_score(const RuleSpec& rule, const DiscreteDistribution& p,
                      const DiscreteDistribution& q) {
  if (p.size() != q.size())
    throw validation_error("expected_score: support sizes differ");
  double total = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p.probs[x] == 0.0) continue;  // outcomes outside P's support don't count
    const double s = discrete_score(rule, x, q);
    if (std::isnan(s))
      throw domain_error("expected_score: score is NaN at outcome " +
                         std::to_string(x));
    if (std::isinf(s)) return s;
    total += p.probs[x] * s;
  }
  return total;
}

double expected_score(const RuleSpec& rule, const DensityModel& p,
                      const DensityModel& q, const Grid1D& grid) {
  if (p.dimension != 1 || q.dimension != 1)
    throw validation_error(
        "continuous expected_score is implemented for dimension 1");
  const std::vector<double> nodes = grid.nodes();
  const std::vector<double> weights = simpson_weights(grid);
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double y = nodes[i];
    const double py = density_at(p, std::span<const double>(&y, 1));
    if (py == 0.0) continue;
    const double s =
        evaluate_score(rule, std::span<const double>(&y, 1), q);
    if (std::isnan(s))
      throw domain_error("expected_score: score is NaN at node " +
                         std::to_string(i));
    if (std::isinf(s)) return s;
    total += weights[i] * py * s;
  }
  return total;
}

double entropy(const RuleSpec& rule, const DiscreteDistribution& p) {
  return expected_score(rule, p, p);
}

double entropy(const RuleSpec& rule, const DensityModel& p,
               const Grid1D& grid) {
  return expected_score(rule, p, p, grid);
}

double divergence(const RuleSpec& rule, const DiscreteDistribution& p,
                  const DiscreteDistribution& q) {
  return expected_score(rule, p, q) - entropy(rule, p);
}

double divergence(const RuleSpec& rule, const DensityModel& p,
                  const DensityModel& q, const Grid1D& grid) {
  return expected_score(rule, p, q, grid) - entropy(rule, p, grid);
}

JointDistribution::JointDistribution(std::vector<std::string> x_labels_in,
                                     std::vector<std::string> u_labels_in,
                                     std::vector<double> probs_in)
    : x_labels(std::move(x_labels_in)),
      u_labels(std::move(u_labels_in)),
      probs(std::move(probs_in)) {
  if (x_labels.empty() || u_labels.empty())
    throw validation_error("JointDistribution: empty support");
  if (probs.size() != x_labels.size() * u_labels.size())
    throw validation_error("JointDistribution: probability table shape mismatch");
  double total = 0.0;
  for (double p : probs) {
    require_finite_prob(p, "JointDistribution");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw validation_error("JointDistribution: probabilities must sum to 1");
}

DiscreteDistribution JointDistribution::marginal_x() const {
  std::vector<double> m(x_labels.size(), 0.0);
  for (std::size_t x = 0; x < x_labels.size(); ++x)
    for (std::size_t u = 0; u < u_labels.size(); ++u) m[x] += p(x, u);
  return DiscreteDistribution(x_labels, std::move(m));
}

std::vector<double> JointDistribution::marginal_u() const {
  std::vector<double> m(u_labels.size(), 0.0);
  for (std::size_t x = 0; x < x_labels.size(); ++x)
    for (std::size_t u = 0; u < u_labels.size(); ++u) m[u] += p(x, u);
  return m;
}

DiscreteDistribution JointDistribution::conditional_x_given_u(
    std::size_t u) const {
  const std::vector<double> mu = marginal_u();
  if (u >= mu.size() || mu[u] == 0.0)
    throw domain_error("JointDistribution: conditioning on a null event");
  std::vector<double> c(x_labels.size());
  double total = 0.0;
  for (std::size_t x = 0; x < x_labels.size(); ++x) {
    c[x] = p(x, u) / mu[u];
    total += c[x];
  }
  for (double& v : c) v /= total;  // remove the residual rounding
  return DiscreteDistribution(x_labels, std::move(c));
}

double dependence(const RuleSpec& rule, const JointDistribution& joint) {
  const double hx = entropy(rule, joint.marginal_x());
  const std::vector<double> mu = joint.marginal_u();
  double conditional = 0.0;
  for (std::size_t u = 0; u < mu.size(); ++u) {
    if (mu[u] == 0.0) continue;
    conditional += mu[u] * entropy(rule, joint.conditional_x_given_u(u));
  }
  return hx - conditional;
}

double survival_score(const SurvivalObservation& obs, const HazardFn& hazard,
                      const PsiTriple& psi, std::size_t quad_points) {
  if (!(obs.time >= 0.0) || !std::isfinite(obs.time))
    throw validation_error("survival_score: observation time must be finite and >= 0");
  auto hazard_at = [&](double u) {
    const double lam = hazard(u);
    if (!(lam >= 0.0) || !std::isfinite(lam))
      throw domain_error("survival_score: hazard is negative or non-finite at u = " +
                         std::to_string(u));
    return lam;
  };
  double cumulative = 0.0;
  if (obs.time > 0.0) {
    cumulative = integrate(
        [&](double u) {
          const double lam = hazard_at(u);
          return lam * psi.d1(lam) - psi.value(lam);
        },
        Grid1D(0.0, obs.time, std::max<std::size_t>(quad_points, 2)));
  }
  if (!obs.event) return cumulative;
  return cumulative - psi.d1(hazard_at(obs.time));
}

double composite_score(std::span<const double> x,
                       const std::vector<CompositeComponent>& components) {
  if (components.empty())
    throw validation_error("composite_score: no components");
  double total = 0.0;
  for (const CompositeComponent& c : components) {
    for (std::size_t idx : c.coords)
      if (idx >= x.size())
        throw validation_error("composite_score: coordinate index out of range");
    double s = 0.0;
    if (std::holds_alternative<DiscreteDistribution>(c.forecast)) {
      if (c.coords.size() != 1)
        throw validation_error(
            "composite_score: discrete components take exactly one coordinate");
      const double raw = x[c.coords[0]];
      const auto idx = static_cast<long long>(std::llround(raw));
      if (std::fabs(raw - static_cast<double>(idx)) > 1e-9 || idx < 0)
        throw validation_error(
            "composite_score: discrete component coordinate is not an outcome index");
      s = evaluate_score(c.rule, static_cast<std::size_t>(idx),
                         std::get<DiscreteDistribution>(c.forecast));
    } else {
      const DensityModel& q = std::get<DensityModel>(c.forecast);
      std::vector<double> sub(c.coords.size());
      for (std::size_t i = 0; i < c.coords.size(); ++i) sub[i] = x[c.coords[i]];
      s = evaluate_score(c.rule, sub, q);
    }
    if (std::isnan(s)) throw domain_error("composite_score: component score is NaN");
    if (std::isinf(s)) return s;
    total += s;
  }
  return total;
}

double pseudo_score(
    std::span<const int> config,
    const std::function<DiscreteDistribution(std::size_t, std::span<const int>)>&
        full_conditional,
    const RuleSpec& base) {
  if (config.empty()) throw validation_error("pseudo_score: empty configuration");
  double total = 0.0;
  for (std::size_t v = 0; v < config.size(); ++v) {
    const DiscreteDistribution cond = full_conditional(v, config);
    if (config[v] < 0 || static_cast<std::size_t>(config[v]) >= cond.size())
      throw validation_error("pseudo_score: site value outside conditional support");
    const double s =
        evaluate_score(base, static_cast<std::size_t>(config[v]), cond);
    if (std::isinf(s)) return s;
    total += s;
  }
  return total;
}

namespace {

// All lattice points with the given support size whose coordinates are
// multiples of 1/units and sum to one, flattened into one buffer.
void enumerate_simplex(std::size_t k, std::size_t units,
                       std::vector<double>& point, std::vector<double>& out) {
  if (k == 1) {
    double rest = 1.0;
    for (double v : point) rest -= v;
    point.push_back(std::max(rest, 0.0));
    out.insert(out.end(), point.begin(), point.end());
    point.pop_back();
    return;
  }
  double used = 0.0;
  for (double v : point) used += v;
  const auto remaining =
      static_cast<std::size_t>(std::llround((1.0 - used) * static_cast<double>(units)));
  for (std::size_t c = 0; c <= remaining; ++c) {
    point.push_back(static_cast<double>(c) / static_cast<double>(units));
    enumerate_simplex(k - 1, units, point, out);
    point.pop_back();
  }
}

}  // namespace

ProprietyReport check_propriety(const RuleSpec& rule, std::size_t support_size,
                                double grid_step) {
  if (rule.family == RuleFamily::Hyvarinen)
    throw validation_error(
        "check_propriety sweeps finite supports; hyvarinen is continuous-only");
  if (support_size < 2 || support_size > 4)
    throw validation_error("check_propriety: support size must be 2..4");
  if (!(grid_step > 0.0) || grid_step > 0.5)
    throw validation_error("check_propriety: grid step must lie in (0, 0.5]");
  const auto units = static_cast<std::size_t>(std::llround(1.0 / grid_step));
  if (std::fabs(static_cast<double>(units) * grid_step - 1.0) > 1e-9)
    throw validation_error("check_propriety: grid step must divide 1");

  const std::size_t k = support_size;
  std::vector<double> flat;
  {
    std::vector<double> point;
    enumerate_simplex(k, units, point, flat);
  }
  const std::size_t count = flat.size() / k;
  std::vector<std::string> labels(k);
  for (std::size_t i = 0; i < k; ++i) labels[i] = std::to_string(i);

  // Score vector of every lattice point viewed as the forecast Q, plus the
  // self-expected score H(P); margins are then dot products linear in P.
  std::vector<double> scores(flat.size());
  std::vector<char> has_inf(count, 0);
  std::vector<double> self(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::span<const double> probs(flat.data() + i * k, k);
    const DiscreteDistribution q(labels,
                                 std::vector<double>(probs.begin(), probs.end()));
    double h = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      const double s = discrete_score(rule, x, q);
      scores[i * k + x] = s;
      if (std::isinf(s)) has_inf[i] = 1;
      if (probs[x] > 0.0) h += probs[x] * s;  // inf scores sit on null outcomes
    }
    self[i] = h;
  }

  ProprietyReport report;
  report.pairs_checked = count * count;
  double worst = kInf;
  std::size_t worst_p = 0, worst_q = 0;
  double min_gap = kInf;
  bool nan_seen = false;

  for (std::size_t iq = 0; iq < count; ++iq) {
    const double* sq = scores.data() + iq * k;
    for (std::size_t ip = 0; ip < count; ++ip) {
      const double* p = flat.data() + ip * k;
      double cross;
      if (!has_inf[iq]) {
        double acc = 0.0;
        for (std::size_t x = 0; x < k; ++x) acc += p[x] * sq[x];
        cross = acc;
      } else {
        double acc = 0.0;
        bool inf = false;
        for (std::size_t x = 0; x < k; ++x) {
          if (p[x] == 0.0) continue;
          if (std::isinf(sq[x])) {
            inf = true;
            break;
          }
          acc += p[x] * sq[x];
        }
        cross = inf ? kInf : acc;
      }
      const double margin = cross - self[ip];
      if (std::isnan(margin)) {
        nan_seen = true;
        continue;
      }
      if (std::isfinite(margin) && margin < worst) {
        worst = margin;
        worst_p = ip;
        worst_q = iq;
      }
      if (ip != iq && margin < min_gap) min_gap = margin;
    }
  }

  report.worst_margin = worst;
  report.min_offdiagonal_gap = min_gap;
  report.worst_p.assign(flat.begin() + worst_p * k, flat.begin() + (worst_p + 1) * k);
  report.worst_q.assign(flat.begin() + worst_q * k, flat.begin() + (worst_q + 1) * k);
  report.pass = !nan_seen && worst >= -1e-9;
  return report;
}

}  // namespace scorelab
