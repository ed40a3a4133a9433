// scorelab command-line front end.
//
// CSV in, JSON report out.  Every command echoes its configuration, runs one
// library operation, and prints a single structured report on stdout (and to
// --out when given).  Exit status: 0 success, 2 invalid input or
// configuration, 3 numeric failure mid-computation (a partial report with an
// "error" object is still emitted).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scorelab/csv.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/estimation.hpp"
#include "scorelab/gmrf.hpp"
#include "scorelab/matrix.hpp"
#include "scorelab/modelsel.hpp"
#include "scorelab/numerics.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/scores.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Non-finite doubles are serialized as strings so the report stays valid
// JSON while still saying exactly what the number was.
ordered_json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json jvec(std::span<const double> v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

ordered_json jmat(const scorelab::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(jvec(m.row(i)));
  return rows;
}

// Maps the library error hierarchy onto (report label, exit status).
// Bad requests and configurations are 2; failures of the numbers are 3.
struct ErrorClass {
  const char* label;
  int status;
};

ErrorClass classify(const scorelab::error& e) {
  if (dynamic_cast<const scorelab::csv_error*>(&e)) return {"csv", 2};
  if (dynamic_cast<const scorelab::validation_error*>(&e))
    return {"validation", 2};
  if (dynamic_cast<const scorelab::propriety_error*>(&e))
    return {"propriety", 2};
  if (dynamic_cast<const scorelab::capability_error*>(&e))
    return {"capability", 2};
  if (dynamic_cast<const scorelab::divergence_error*>(&e))
    return {"divergence", 3};
  if (dynamic_cast<const scorelab::not_spd_error*>(&e))
    return {"not-positive-definite", 3};
  if (dynamic_cast<const scorelab::singular_error*>(&e)) return {"singular", 3};
  if (dynamic_cast<const scorelab::rank_error*>(&e)) return {"rank", 3};
  if (dynamic_cast<const scorelab::domain_error*>(&e)) return {"domain", 3};
  return {"error", 3};
}

// Everything the subcommands can ask for; each subcommand registers only the
// flags it understands.
struct Options {
  std::string rule = "log";
  double gamma = 2.0;
  bool gamma_given = false;
  std::string psi;
  std::string family = "normal-location";
  std::string data;
  std::string models;
  std::string out;
  double sigma2 = 1.0;
  double alpha = 1.0;
  double beta = 0.0;
  std::size_t sites = 2;
  std::size_t nu = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t replicates = 1;
  std::size_t jobs = 0;
  double grid_lo = 0.0;
  double grid_hi = 0.0;
  std::size_t grid_points = 0;
  bool grid_given = false;
  std::size_t support = 2;
  double step = 0.01;
  bool restricted = false;
  bool refit = false;
};

scorelab::RuleSpec make_rule(const Options& opt) {
  std::optional<double> gamma;
  if (opt.gamma_given) gamma = opt.gamma;
  std::optional<std::string> psi;
  if (!opt.psi.empty()) psi = opt.psi;
  scorelab::RuleSpec rule =
      scorelab::rule_by_name(opt.rule, gamma, psi, opt.support);
  if (opt.grid_given)
    rule.integration_grid =
        scorelab::Grid1D(opt.grid_lo, opt.grid_hi, opt.grid_points);
  return rule;
}

std::uint64_t resolve_seed(const Options& opt) {
  if (opt.seed_given) return opt.seed;
  if (const char* env = std::getenv("SCORELAB_SEED")) {
    std::string text(env);
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw scorelab::validation_error("SCORELAB_SEED is not an unsigned integer: '" +
                                     text + "'");
  }
  throw scorelab::validation_error(
      "a seed is required: pass --seed or set SCORELAB_SEED");
}

// ---------------------------------------------------------------------------
// score: two-column CSV (outcome in {0,1}, forecast probability of 1).

ordered_json run_score(const Options& opt) {
  const scorelab::CsvTable table = scorelab::read_csv(opt.data);
  if (table.values.cols() != 2)
    throw scorelab::validation_error(
        "score expects a two-column CSV (outcome, probability); '" + opt.data +
        "' has " + std::to_string(table.values.cols()) + " columns");
  const scorelab::RuleSpec rule = make_rule(opt);
  ordered_json per_row = ordered_json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < table.values.rows(); ++i) {
    const double outcome = table.values(i, 0);
    const double prob = table.values(i, 1);
    if (outcome != 0.0 && outcome != 1.0)
      throw scorelab::validation_error(
          "row " + std::to_string(i + 2) +
          ": outcome must be 0 or 1, got " + std::to_string(outcome));
    const auto forecast = scorelab::DiscreteDistribution::binary(prob);
    const double s = scorelab::evaluate_score(
        rule, static_cast<std::size_t>(outcome), forecast);
    total += s;
    per_row.push_back(jnum(s));
  }
  ordered_json results;
  results["rule"] = rule.name();
  results["n"] = table.values.rows();
  results["total_score"] = jnum(total);
  results["mean_score"] =
      jnum(table.values.rows() ? total / double(table.values.rows()) : 0.0);
  results["scores"] = per_row;
  return results;
}

// ---------------------------------------------------------------------------
// estimate: minimum-score fit of a named family.

ordered_json run_estimate(const Options& opt) {
  const scorelab::CsvTable table = scorelab::read_csv(opt.data);
  auto family = scorelab::family_by_name(opt.family);
  if (table.values.cols() != family->obs_dim())
    throw scorelab::validation_error(
        "family '" + family->name() + "' expects " +
        std::to_string(family->obs_dim()) + " column(s); '" + opt.data +
        "' has " + std::to_string(table.values.cols()));
  const scorelab::ScoreModel model(make_rule(opt), family);
  const scorelab::EstimationResult fit =
      scorelab::minimum_score_estimate(model, table.values);

  ordered_json results;
  results["family"] = family->name();
  results["rule"] = model.rule().name();
  results["n"] = fit.n;
  results["theta_hat"] = jvec(fit.theta);
  results["objective"] = jnum(fit.objective);
  results["converged"] = fit.converged;
  results["iterations"] = fit.iterations;
  if (fit.sandwich_cov) {
    results["sandwich_covariance"] = jmat(*fit.sandwich_cov);
    std::vector<double> se(fit.theta.size());
    for (std::size_t i = 0; i < se.size(); ++i)
      se[i] = std::sqrt(std::max(0.0, (*fit.sandwich_cov)(i, i)));
    results["std_error"] = jvec(se);
  }
  if (fit.j_hat) results["j_hat"] = jmat(*fit.j_hat);
  if (fit.k_hat) results["k_hat"] = jmat(*fit.k_hat);
  if (fit.godambe) results["godambe"] = jmat(*fit.godambe);
  if (!fit.degeneracy.empty()) results["degeneracy"] = fit.degeneracy;
  return results;
}

// ---------------------------------------------------------------------------
// gmrf-fit: closed-form derivative-matching fit of the chain model.

ordered_json run_gmrf_fit(const Options& opt) {
  const scorelab::CsvTable table = scorelab::read_csv(opt.data);
  const scorelab::Matrix& y = table.values;
  const scorelab::ChainStatistics stats = scorelab::chain_statistics(y);
  const scorelab::GmrfEstimate est =
      scorelab::hyvarinen_closed_form(y, opt.refit);

  ordered_json results;
  results["nu"] = stats.nu;
  results["n_sites"] = stats.n_sites;
  results["statistics"] = {{"c_yz", jnum(stats.c_yz)},
                           {"c_zz", jnum(stats.c_zz)},
                           {"c_yy", jnum(stats.c_yy)},
                           {"c_yy_dot_z", jnum(stats.c_yy_dot_z)}};
  results["lambda_hat"] = jnum(est.lambda_hat);
  results["alpha_hat"] = jnum(est.alpha_hat);
  results["beta_hat"] = jnum(est.beta_hat);
  results["in_omega"] = est.in_omega;
  results["refitted"] = est.refitted;
  const scorelab::TridiagonalModel fitted{est.alpha_hat, est.beta_hat,
                                          stats.n_sites};
  results["objective"] = jnum(scorelab::hyvarinen_objective(fitted, y));
  if (est.in_omega) {
    results["pseudo_loglik"] = jnum(scorelab::pseudo_loglik(fitted, y));
    results["exact_neg_loglik"] = jnum(scorelab::exact_neg_loglik(fitted, y));
    results["logdet_precision"] = jnum(scorelab::tridiag_logdet(fitted));
  } else {
    results["note"] =
        "estimate lies outside omega (alpha <= 2|beta|): the fitted "
        "precision matrix is not positive definite; rerun with "
        "--refit-to-omega for a boundary fit";
  }
  return results;
}

// ---------------------------------------------------------------------------
// wishart-fit: scatter-matrix closed forms from raw vectors.

ordered_json run_wishart_fit(const Options& opt) {
  const scorelab::CsvTable table = scorelab::read_csv(opt.data);
  const scorelab::WishartData data = scorelab::wishart_from_vectors(table.values);
  const scorelab::WishartEstimate est =
      scorelab::wishart_hyvarinen_estimate(data, opt.restricted);

  ordered_json results;
  results["nu"] = data.nu;
  results["n_sites"] = table.values.cols();
  results["scatter"] = jmat(data.s);
  results["restricted"] = est.restricted;
  if (est.restricted) {
    results["alpha_hat"] = jnum(est.alpha_hat);
    results["beta_hat"] = jnum(est.beta_hat);
    results["in_omega"] = est.in_omega;
  } else {
    results["phi_hat"] = jmat(est.phi);
  }
  return results;
}

// ---------------------------------------------------------------------------
// compare: Bayesian model comparison from a model-set JSON file.

scorelab::Box parse_box(const ordered_json& j, const std::string& id) {
  if (!j.contains("lower") || !j.contains("upper"))
    throw scorelab::validation_error("model '" + id +
                                     "': theta_box needs lower and upper arrays");
  scorelab::Box box;
  box.lower = j.at("lower").get<std::vector<double>>();
  box.upper = j.at("upper").get<std::vector<double>>();
  return box;
}

std::shared_ptr<const scorelab::Family> parse_family(const ordered_json& m,
                                                     const std::string& id) {
  if (!m.contains("family"))
    throw scorelab::validation_error("model '" + id + "': family is missing");
  const std::string name = m.at("family").get<std::string>();
  if (name == "normal-location" && m.contains("sigma"))
    return std::make_shared<scorelab::NormalLocationFamily>(
        m.at("sigma").get<double>());
  if (name == "gmrf-chain") {
    if (!m.contains("sites"))
      throw scorelab::validation_error("model '" + id +
                                       "': gmrf-chain needs a sites count");
    return std::make_shared<scorelab::GmrfChainFamily>(
        m.at("sites").get<std::size_t>());
  }
  return scorelab::family_by_name(name);
}

scorelab::BayesModelSpec parse_model(const ordered_json& m, std::size_t index) {
  scorelab::BayesModelSpec spec;
  spec.id = m.contains("id") ? m.at("id").get<std::string>()
                             : "model-" + std::to_string(index + 1);
  spec.family = parse_family(m, spec.id);

  if (!m.contains("prior"))
    throw scorelab::validation_error("model '" + spec.id +
                                     "': prior is missing");
  const ordered_json& prior = m.at("prior");
  const std::string type = prior.value("type", std::string());
  const double shift = prior.value("shift", 0.0);

  if (type == "point") {
    spec.point_mass = prior.at("theta").get<std::vector<double>>();
  } else if (type == "flat") {
    spec.prior_log_density = [shift](std::span<const double>) { return shift; };
    spec.prior_proper = false;
  } else if (type == "normal") {
    const auto mean = prior.at("mean").get<std::vector<double>>();
    const auto cov_rows = prior.at("cov").get<std::vector<std::vector<double>>>();
    const std::size_t d = mean.size();
    scorelab::Matrix cov(d, d);
    if (cov_rows.size() != d)
      throw scorelab::validation_error("model '" + spec.id +
                                       "': prior cov must be " +
                                       std::to_string(d) + "x" +
                                       std::to_string(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (cov_rows[i].size() != d)
        throw scorelab::validation_error("model '" + spec.id +
                                         "': prior cov rows are ragged");
      for (std::size_t j = 0; j < d; ++j) cov(i, j) = cov_rows[i][j];
    }
    const scorelab::Cholesky chol = scorelab::Cholesky::factor(cov);
    const double log_norm =
        -0.5 * (double(d) * std::log(2.0 * M_PI) + chol.log_det());
    spec.prior_log_density = [mean, chol, log_norm, shift,
                              d](std::span<const double> theta) {
      std::vector<double> r(d);
      for (std::size_t i = 0; i < d; ++i) r[i] = theta[i] - mean[i];
      const std::vector<double> w = chol.solve(r);
      double quad = 0.0;
      for (std::size_t i = 0; i < d; ++i) quad += r[i] * w[i];
      return log_norm - 0.5 * quad + shift;
    };
    spec.prior_proper = true;
  } else {
    throw scorelab::validation_error(
        "model '" + spec.id +
        "': prior type must be one of {flat, normal, point}, got '" + type +
        "'");
  }

  if (!spec.point_mass) {
    if (!m.contains("theta_box"))
      throw scorelab::validation_error("model '" + spec.id +
                                       "': theta_box is missing");
    spec.theta_quadrature = parse_box(m.at("theta_box"), spec.id);
  }
  if (m.contains("quad_points"))
    spec.quad_points = m.at("quad_points").get<std::size_t>();
  return spec;
}

std::vector<scorelab::BayesModelSpec> load_model_set(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw scorelab::validation_error("cannot open model file '" + path + "'");
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw scorelab::validation_error("model file '" + path +
                                     "' is not valid JSON: " + e.what());
  }
  try {
    if (!doc.contains("models") || !doc.at("models").is_array() ||
        doc.at("models").empty())
      throw scorelab::validation_error(
          "model file '" + path + "' must contain a non-empty models array");
    std::vector<scorelab::BayesModelSpec> specs;
    std::size_t index = 0;
    for (const auto& entry : doc.at("models"))
      specs.push_back(parse_model(entry, index++));
    return specs;
  } catch (const nlohmann::json::exception& e) {
    throw scorelab::validation_error("model file '" + path +
                                     "': " + e.what());
  }
}

ordered_json run_compare(const Options& opt) {
  const scorelab::CsvTable table = scorelab::read_csv(opt.data);
  if (table.values.rows() != 1)
    throw scorelab::validation_error(
        "compare scores one observation vector: '" + opt.data + "' has " +
        std::to_string(table.values.rows()) + " data rows, expected 1");
  const std::vector<scorelab::BayesModelSpec> models =
      load_model_set(opt.models);
  const scorelab::RuleSpec rule = make_rule(opt);
  const scorelab::ModelComparisonReport report =
      scorelab::compare_models(rule, models, table.values.row(0));

  ordered_json results;
  results["rule"] = rule.name();
  ordered_json scores = ordered_json::array();
  for (const auto& s : report.scores) {
    ordered_json entry;
    entry["id"] = s.id;
    if (s.failed) {
      entry["failed"] = true;
      entry["error"] = s.error;
    } else {
      entry["score"] = jnum(s.score);
      entry["scale_arbitrary"] = s.scale_arbitrary;
    }
    scores.push_back(entry);
  }
  results["scores"] = scores;
  results["differences"] = jmat(report.differences);
  ordered_json ranking = ordered_json::array();
  for (std::size_t idx : report.ranking) ranking.push_back(models[idx].id);
  results["ranking"] = ranking;
  ordered_json ties = ordered_json::array();
  for (const auto& [i, j] : report.ties)
    ties.push_back(ordered_json::array({models[i].id, models[j].id}));
  results["ties"] = ties;
  return results;
}

// ---------------------------------------------------------------------------
// preq: prequential one-step-ahead score of a normal linear model.
// The last CSV column is the response; any preceding columns form the design.

ordered_json run_preq(const Options& opt) {
  const scorelab::CsvTable table = scorelab::read_csv(opt.data);
  const scorelab::Matrix& all = table.values;
  if (all.cols() < 1)
    throw scorelab::validation_error("'" + opt.data + "' has no columns");
  const std::size_t n = all.rows();
  const std::size_t p = all.cols() - 1;
  std::vector<double> y(n);
  scorelab::Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = all(i, j);
    y[i] = all(i, p);
  }
  scorelab::NormalLinearModel model;
  model.x = x;
  model.sigma2 = opt.sigma2;

  ordered_json results;
  results["n"] = n;
  results["p"] = p;
  results["sigma2"] = jnum(opt.sigma2);
  results["prequential_score"] = jnum(scorelab::prequential_hyvarinen(model, y));
  if (n > p) {
    results["improper_score"] = jnum(scorelab::nlm_improper_hyvarinen(model, y));
    results["aic_gap"] = jnum(scorelab::aic_gap(model, y));
  }
  return results;
}

// ---------------------------------------------------------------------------
// simulate: seeded replicate study of the chain model; each replicate draws
// nu vectors, refits by the closed form, and is stored by replicate index so
// aggregation never depends on thread scheduling.

struct ChainReplicate {
  double lambda = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool in_omega = false;
};

ordered_json run_simulate(const Options& opt) {
  if (opt.sites < 2)
    throw scorelab::validation_error("simulate needs --sites >= 2");
  if (opt.replicates < 1)
    throw scorelab::validation_error("simulate needs --replicates >= 1");
  const scorelab::TridiagonalModel truth{opt.alpha, opt.beta, opt.sites};
  if (!truth.in_omega())
    throw scorelab::validation_error(
        "simulation model must satisfy alpha > 2|beta|");
  const std::uint64_t seed = resolve_seed(opt);

  const std::size_t r = opt.replicates;
  std::vector<ChainReplicate> reps(r);
  std::vector<std::exception_ptr> failures(r);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= r) return;
      try {
        const scorelab::Matrix y =
            scorelab::simulate_chain(truth, opt.nu, {seed, i});
        const scorelab::GmrfEstimate est = scorelab::hyvarinen_closed_form(y);
        reps[i] = {est.lambda_hat, est.alpha_hat, est.beta_hat, est.in_omega};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  std::size_t jobs = opt.jobs;
  if (jobs == 0) jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  jobs = std::min(jobs, r);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  ordered_json table = ordered_json::array();
  double sum_l = 0.0, sum_a = 0.0, sum_b = 0.0;
  double sq_l = 0.0, sq_a = 0.0, sq_b = 0.0;
  std::size_t omega_count = 0;
  for (std::size_t i = 0; i < r; ++i) {
    const ChainReplicate& rep = reps[i];
    table.push_back({{"replicate", i},
                     {"lambda_hat", jnum(rep.lambda)},
                     {"alpha_hat", jnum(rep.alpha)},
                     {"beta_hat", jnum(rep.beta)},
                     {"in_omega", rep.in_omega}});
    sum_l += rep.lambda;
    sum_a += rep.alpha;
    sum_b += rep.beta;
    sq_l += rep.lambda * rep.lambda;
    sq_a += rep.alpha * rep.alpha;
    sq_b += rep.beta * rep.beta;
    omega_count += rep.in_omega ? 1 : 0;
  }
  const double dn = double(r);
  auto sd = [dn](double sum, double sq) {
    if (dn < 2) return 0.0;
    const double var = (sq - sum * sum / dn) / (dn - 1);
    return std::sqrt(std::max(0.0, var));
  };
  ordered_json results;
  results["truth"] = {{"alpha", jnum(opt.alpha)},
                      {"beta", jnum(opt.beta)},
                      {"n_sites", opt.sites},
                      {"nu", opt.nu}};
  results["replicates"] = r;
  results["seed"] = seed;
  results["mean"] = {{"lambda_hat", jnum(sum_l / dn)},
                     {"alpha_hat", jnum(sum_a / dn)},
                     {"beta_hat", jnum(sum_b / dn)}};
  results["sd"] = {{"lambda_hat", jnum(sd(sum_l, sq_l))},
                   {"alpha_hat", jnum(sd(sum_a, sq_a))},
                   {"beta_hat", jnum(sd(sum_b, sq_b))}};
  results["in_omega_count"] = omega_count;
  results["estimates"] = table;
  return results;
}

// ---------------------------------------------------------------------------
// check-propriety: brute-force simplex sweep.

ordered_json run_check_propriety(const Options& opt) {
  const scorelab::RuleSpec rule = make_rule(opt);
  const scorelab::ProprietyReport report =
      scorelab::check_propriety(rule, opt.support, opt.step);
  ordered_json results;
  results["rule"] = rule.name();
  results["support_size"] = opt.support;
  results["grid_step"] = jnum(opt.step);
  results["pass"] = report.pass;
  results["worst_margin"] = jnum(report.worst_margin);
  results["min_offdiagonal_gap"] = jnum(report.min_offdiagonal_gap);
  results["pairs_checked"] = report.pairs_checked;
  results["worst_p"] = jvec(report.worst_p);
  results["worst_q"] = jvec(report.worst_q);
  return results;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scorelab: proper scoring rules, minimum-score estimation, "
               "and model comparison"};
  app.require_subcommand(1);
  Options opt;

  auto add_rule_flags = [&](CLI::App* cmd) {
    cmd->add_option("--rule", opt.rule,
                    "scoring rule: log | brier | tsallis | bregman | "
                    "hyvarinen | zero-one");
    cmd->add_option("--gamma", opt.gamma, "order parameter for tsallis")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { opt.gamma_given = true; });
    cmd->add_option("--psi", opt.psi,
                    "generator for bregman: tlogt | power:<gamma> | brier");
  };
  auto add_grid_flags = [&](CLI::App* cmd) {
    cmd->add_option("--grid-lo", opt.grid_lo, "quadrature lower endpoint")
        ->each([&](const std::string&) { opt.grid_given = true; });
    cmd->add_option("--grid-hi", opt.grid_hi, "quadrature upper endpoint");
    cmd->add_option("--grid-points", opt.grid_points, "quadrature node count");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out, "also write the report to this path");
  };

  CLI::App* score = app.add_subcommand(
      "score", "score binary forecasts from a (outcome, probability) CSV");
  add_rule_flags(score);
  score->add_option("--data", opt.data, "forecast CSV")->required();
  add_out(score);

  CLI::App* estimate = app.add_subcommand(
      "estimate", "minimum-score parameter estimate with sandwich covariance");
  add_rule_flags(estimate);
  estimate->add_option("--family", opt.family,
                       "normal-location | logistic-location | cauchy-location "
                       "| extreme-value-location | bernoulli");
  estimate->add_option("--data", opt.data, "observation CSV")->required();
  add_out(estimate);

  CLI::App* gmrf = app.add_subcommand(
      "gmrf-fit", "closed-form derivative-matching fit of the chain model");
  gmrf->add_option("--data", opt.data, "chain CSV (rows are vectors)")
      ->required();
  gmrf->add_flag("--refit-to-omega", opt.refit,
                 "project an out-of-omega estimate back to the boundary");
  add_out(gmrf);

  CLI::App* wishart = app.add_subcommand(
      "wishart-fit", "scatter-matrix closed forms from repeated vectors");
  wishart->add_option("--data", opt.data, "vector CSV (rows are draws)")
      ->required();
  wishart->add_flag("--restricted", opt.restricted,
                    "restrict the precision to the tridiagonal chain form");
  add_out(wishart);

  CLI::App* compare = app.add_subcommand(
      "compare", "score a set of Bayesian models on one observation");
  add_rule_flags(compare);
  add_grid_flags(compare);
  compare->add_option("--models", opt.models, "model-set JSON file")
      ->required();
  compare->add_option("--data", opt.data, "single-row observation CSV")
      ->required();
  add_out(compare);

  CLI::App* preq = app.add_subcommand(
      "preq", "prequential one-step-ahead score of a normal linear model");
  preq->add_option("--data", opt.data,
                   "CSV whose last column is the response")
      ->required();
  preq->add_option("--sigma2", opt.sigma2, "known noise variance")
      ->check(CLI::PositiveNumber);
  add_out(preq);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "seeded replicate study of the chain model estimator");
  simulate->add_option("--alpha", opt.alpha, "true diagonal value");
  simulate->add_option("--beta", opt.beta, "true off-diagonal value");
  simulate->add_option("--sites", opt.sites, "chain length N");
  simulate->add_option("--nu", opt.nu, "vectors per replicate");
  simulate->add_option("--replicates", opt.replicates, "replicate count");
  simulate->add_option("--seed", opt.seed, "master seed (or SCORELAB_SEED)")
      ->each([&](const std::string&) { opt.seed_given = true; });
  simulate->add_option("--jobs", opt.jobs,
                       "worker threads (0 = hardware concurrency)");
  add_out(simulate);

  CLI::App* propriety = app.add_subcommand(
      "check-propriety", "brute-force propriety sweep on the simplex");
  add_rule_flags(propriety);
  propriety->add_option("--support", opt.support, "outcome count")
      ->check(CLI::Range(std::size_t{2}, std::size_t{6}));
  propriety->add_option("--step", opt.step, "simplex lattice step")
      ->check(CLI::PositiveNumber);
  add_out(propriety);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();

  ordered_json report;
  report["tool"] = "scorelab";
  report["version"] = kVersion;
  report["command"] = command;

  ordered_json config;
  for (const CLI::Option* o : active->get_options()) {
    // --jobs is an execution detail: results are aggregated by replicate
    // index, so the report must not depend on worker count.
    if (o->get_name() == "--help" || o->get_name() == "--jobs" ||
        o->get_name() == "--out" || o->count() == 0)
      continue;
    const auto& raw = o->results();
    if (raw.size() == 1)
      config[o->get_name()] = raw.front();
    else if (!raw.empty())
      config[o->get_name()] = raw;
  }
  report["config"] = config;

  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  try {
    ordered_json results;
    if (command == "score") results = run_score(opt);
    else if (command == "estimate") results = run_estimate(opt);
    else if (command == "gmrf-fit") results = run_gmrf_fit(opt);
    else if (command == "wishart-fit") results = run_wishart_fit(opt);
    else if (command == "compare") results = run_compare(opt);
    else if (command == "preq") results = run_preq(opt);
    else if (command == "simulate") results = run_simulate(opt);
    else results = run_check_propriety(opt);
    report["results"] = results;
  } catch (const scorelab::error& e) {
    const ErrorClass c = classify(e);
    report["error"] = {{"type", c.label}, {"message", e.what()}};
    status = c.status;
  } catch (const std::exception& e) {
    report["error"] = {{"type", "internal"}, {"message", e.what()}};
    status = 3;
  }
  const auto t1 = std::chrono::steady_clock::now();
  report["wall_clock_ms"] =
      std::chrono::duration<double, std::milli>(t1 - t0).count();

  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!opt.out.empty()) {
    std::ofstream out(opt.out);
    if (!out) {
      std::cerr << "cannot write report to '" << opt.out << "'\n";
      return 2;
    }
    out << text;
  }
  return status;
}
