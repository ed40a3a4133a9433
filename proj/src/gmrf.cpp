#include "scorelab/gmrf.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/kernels.hpp"

namespace scorelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_chain_shape(const TridiagonalModel& model, const Matrix& y,
                         const char* context) {
  if (y.rows() == 0 || y.cols() == 0)
    throw validation_error(std::string(context) + ": empty chain data");
  if (y.cols() != model.n_sites)
    throw validation_error(std::string(context) + ": data has " +
                           std::to_string(y.cols()) + " sites, model has " +
                           std::to_string(model.n_sites));
}

void require_in_omega(const TridiagonalModel& model, const char* context) {
  if (!model.in_omega())
    throw domain_error(std::string(context) +
                       ": model outside Omega (needs alpha > 2|beta|; "
                       "alpha=" +
                       std::to_string(model.alpha) +
                       ", beta=" + std::to_string(model.beta) + ")");
}

}  // namespace

bool TridiagonalModel::in_omega() const {
  return alpha > 2.0 * std::fabs(beta);
}

Matrix tridiagonal_precision(const TridiagonalModel& model) {
  const std::size_t n = model.n_sites;
  Matrix phi(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    phi(i, i) = model.alpha;
    if (i + 1 < n) {
      phi(i, i + 1) = model.beta;
      phi(i + 1, i) = model.beta;
    }
  }
  return phi;
}

std::vector<double> neighbor_sums(std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    if (i > 0) v += y[i - 1];
    if (i + 1 < n) v += y[i + 1];
    z[i] = v;
  }
  return z;
}

ChainStatistics chain_statistics(const Matrix& y) {
  if (y.rows() == 0 || y.cols() == 0)
    throw validation_error("chain_statistics: empty chain data");
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j)
      if (!std::isfinite(y(i, j)))
        throw validation_error("chain_statistics: non-finite value at vector " +
                               std::to_string(i + 1) + ", site " +
                               std::to_string(j + 1));

  ChainStatistics stats;
  stats.nu = y.rows();
  stats.n_sites = y.cols();
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const std::span<const double> row = y.row(i);
    const std::vector<double> z = neighbor_sums(row);
    stats.c_yz += kernels::dot(row, z);
    stats.c_zz += kernels::dot(z, z);
    stats.c_yy += kernels::dot(row, row);
  }
  stats.degenerate = stats.c_zz == 0.0;
  stats.c_yy_dot_z = stats.degenerate
                         ? stats.c_yy
                         : stats.c_yy - stats.c_yz * stats.c_yz / stats.c_zz;
  return stats;
}

double tridiag_logdet(const TridiagonalModel& model) {
  require_in_omega(model, "tridiag_logdet");
  const double n = static_cast<double>(model.n_sites);
  if (model.beta == 0.0) return n * std::log(model.alpha);

  // det depends on beta only through beta^2; work with b = |beta|.  The
  // characteristic root rho solves rho + 1/rho = alpha/b and exceeds 1 in
  // Omega, so the alternating-product form telescopes stably in logs.
  const double b = std::fabs(model.beta);
  const double r = model.alpha / b;
  const double rho = 0.5 * (r + std::sqrt(r * r - 4.0));
  const double rho_m2 = 1.0 / (rho * rho);
  return n * (std::log(b) + std::log(rho)) +
         std::log1p(-std::pow(rho_m2, n + 1.0)) - std::log1p(-rho_m2);
}

double hyvarinen_objective(const TridiagonalModel& model, const Matrix& y) {
  require_chain_shape(model, y, "hyvarinen_objective");
  const double nu_n = static_cast<double>(y.rows() * y.cols());
  double quad = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const std::span<const double> row = y.row(i);
    const std::vector<double> z = neighbor_sums(row);
    quad += kernels::axpby_sum_sq(model.alpha, row, model.beta, z);
  }
  return -nu_n * model.alpha + 0.5 * quad;
}

GmrfEstimate hyvarinen_closed_form(const Matrix& y, bool refit_to_omega) {
  const ChainStatistics stats = chain_statistics(y);
  if (stats.degenerate || !(stats.c_yy_dot_z > 0.0))
    throw domain_error(
        "hyvarinen_closed_form: degenerate chain statistics (c_zz=" +
        std::to_string(stats.c_zz) +
        ", c_yy.z=" + std::to_string(stats.c_yy_dot_z) + ")");

  const double nu_n = static_cast<double>(stats.nu * stats.n_sites);
  GmrfEstimate est;
  est.lambda_hat = stats.c_yz / stats.c_zz;
  est.alpha_hat = nu_n / stats.c_yy_dot_z;
  est.beta_hat = -est.alpha_hat * est.lambda_hat;
  est.in_omega = est.alpha_hat > 2.0 * std::fabs(est.beta_hat);

  if (!est.in_omega && refit_to_omega) {
    // Minimize the objective along the face |beta| = alpha/2 - eps on the
    // side the unconstrained solution favors.  With a_i = y_i + s z_i / 2
    // the face objective is quadratic in alpha with minimizer
    //   alpha = (nu N + s eps sum a_i z_i) / sum a_i^2,
    // and the sums reduce to the chain statistics.
    constexpr double eps = 1e-6;
    const double s = est.beta_hat > 0.0 ? 1.0 : -1.0;
    const double sum_a_sq =
        stats.c_yy + s * stats.c_yz + 0.25 * stats.c_zz;
    const double sum_az = stats.c_yz + s * 0.5 * stats.c_zz;
    if (!(sum_a_sq > 0.0))
      throw domain_error(
          "hyvarinen_closed_form: boundary refit is degenerate (data lie on "
          "the constraint face)");
    const double alpha = (nu_n + s * eps * sum_az) / sum_a_sq;
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw domain_error(
          "hyvarinen_closed_form: boundary refit produced a non-positive "
          "alpha");
    est.alpha_hat = alpha;
    est.beta_hat = s * (0.5 * alpha - eps);
    est.lambda_hat = -est.beta_hat / est.alpha_hat;
    est.in_omega = true;
    est.refitted = true;
  }
  return est;
}

double pseudo_loglik(const TridiagonalModel& model, const Matrix& y) {
  require_chain_shape(model, y, "pseudo_loglik");
  if (!(model.alpha > 0.0))
    throw domain_error("pseudo_loglik: alpha must be positive, got " +
                       std::to_string(model.alpha));
  const double lambda = -model.beta / model.alpha;
  double rss = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const std::span<const double> row = y.row(i);
    const std::vector<double> z = neighbor_sums(row);
    rss += kernels::axpby_sum_sq(1.0, row, -lambda, z);
  }
  const double nu_n = static_cast<double>(y.rows() * y.cols());
  return 0.5 * nu_n * std::log(model.alpha) - 0.5 * model.alpha * rss;
}

double exact_neg_loglik(const TridiagonalModel& model, const Matrix& y) {
  require_chain_shape(model, y, "exact_neg_loglik");
  const double logdet = tridiag_logdet(model);  // validates Omega
  const ChainStatistics stats = chain_statistics(y);
  return -0.5 * static_cast<double>(y.rows()) * logdet +
         0.5 * (model.alpha * stats.c_yy + model.beta * stats.c_yz);
}

WishartData wishart_from_vectors(const Matrix& y) {
  if (y.rows() == 0 || y.cols() == 0)
    throw validation_error("wishart_from_vectors: empty data");
  const std::size_t n = y.cols();
  WishartData data;
  data.s = Matrix(n, n);
  data.nu = y.rows();
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        data.s(i, j) += y(r, i) * y(r, j);
  return data;
}

WishartEstimate wishart_hyvarinen_estimate(const WishartData& data,
                                           bool restrict_tridiagonal) {
  const std::size_t n = data.s.rows();
  if (n == 0 || data.s.cols() != n)
    throw validation_error(
        "wishart_hyvarinen_estimate: scatter matrix must be square and "
        "non-empty");
  require_symmetric(data.s, "wishart_hyvarinen_estimate");
  if (data.nu < n)
    throw domain_error(
        "wishart_hyvarinen_estimate: the scatter density needs nu >= N (nu=" +
        std::to_string(data.nu) + ", N=" + std::to_string(n) + ")");
  const double m = static_cast<double>(data.nu) - static_cast<double>(n) - 1.0;
  if (!(m > 0.0))
    throw domain_error(
        "wishart_hyvarinen_estimate: needs nu >= N + 2 so the multiplier "
        "nu - N - 1 is positive (nu=" +
        std::to_string(data.nu) + ", N=" + std::to_string(n) + ")");

  const Matrix s_inv = inverse_spd(data.s);
  WishartEstimate est;
  est.restricted = restrict_tridiagonal;
  if (!restrict_tridiagonal) {
    est.phi = s_inv;
    for (double& v : est.phi.data()) v *= m;
    return est;
  }
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diag += s_inv(i, i);
    if (i + 1 < n) off += s_inv(i, i + 1);
  }
  est.alpha_hat = m * diag / static_cast<double>(n);
  est.beta_hat = n >= 2 ? m * off / static_cast<double>(n - 1) : 0.0;
  est.in_omega = est.alpha_hat > 2.0 * std::fabs(est.beta_hat);
  return est;
}

Matrix simulate_chain(const TridiagonalModel& model, std::size_t nu,
                      SeedSpec seed) {
  require_in_omega(model, "simulate_chain");
  if (nu == 0) throw validation_error("simulate_chain: nu must be positive");
  const std::size_t n = model.n_sites;
  const Cholesky chol = Cholesky::factor(tridiagonal_precision(model));
  const Matrix& l = chol.lower();

  RandomStream rng(seed);
  Matrix out(nu, n);
  std::vector<double> z(n);
  for (std::size_t r = 0; r < nu; ++r) {
    for (double& v : z) v = rng.next_normal();
    // Solve L^T y = z so that cov(y) = (L L^T)^{-1} = Phi^{-1}.
    const std::span<double> y = out.row(r);
    for (std::size_t ii = n; ii-- > 0;) {
      double acc = z[ii];
      for (std::size_t k = ii + 1; k < n; ++k) acc -= l(k, ii) * y[k];
      y[ii] = acc / l(ii, ii);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// GmrfChainFamily

GmrfChainFamily::GmrfChainFamily(std::size_t n_sites) : n_sites_(n_sites) {
  if (n_sites == 0)
    throw validation_error("GmrfChainFamily: need at least one site");
}

double GmrfChainFamily::log_density(std::span<const double> x,
                                    std::span<const double> theta) const {
  const TridiagonalModel model{theta[0], theta[1], n_sites_};
  if (!model.in_omega()) return -kInf;
  const std::vector<double> z = neighbor_sums(x);
  const double quad =
      model.alpha * kernels::dot(x, x) + model.beta * kernels::dot(x, z);
  const double n = static_cast<double>(n_sites_);
  return 0.5 * tridiag_logdet(model) - 0.5 * quad -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<double> GmrfChainFamily::grad_log_density_x(
    std::span<const double> x, std::span<const double> theta) const {
  const std::vector<double> z = neighbor_sums(x);
  std::vector<double> grad(n_sites_);
  for (std::size_t i = 0; i < n_sites_; ++i)
    grad[i] = -(theta[0] * x[i] + theta[1] * z[i]);
  return grad;
}

double GmrfChainFamily::laplacian_log_density_x(
    std::span<const double>, std::span<const double> theta) const {
  return -static_cast<double>(n_sites_) * theta[0];
}

void GmrfChainFamily::sample(std::span<const double> theta, RandomStream& rng,
                             std::span<double> out) const {
  const TridiagonalModel model{theta[0], theta[1], n_sites_};
  require_in_omega(model, "GmrfChainFamily::sample");
  const Cholesky chol = Cholesky::factor(tridiagonal_precision(model));
  const Matrix& l = chol.lower();
  std::vector<double> z(n_sites_);
  for (double& v : z) v = rng.next_normal();
  for (std::size_t ii = n_sites_; ii-- > 0;) {
    double acc = z[ii];
    for (std::size_t k = ii + 1; k < n_sites_; ++k) acc -= l(k, ii) * out[k];
    out[ii] = acc / l(ii, ii);
  }
}

bool GmrfChainFamily::closed_form_gradient(const RuleSpec& rule,
                                           std::span<const double> x,
                                           std::span<const double> theta,
                                           std::span<double> out) const {
  if (rule.family != RuleFamily::Hyvarinen) return false;
  const std::vector<double> z = neighbor_sums(x);
  double d_alpha = -static_cast<double>(n_sites_);
  double d_beta = 0.0;
  for (std::size_t i = 0; i < n_sites_; ++i) {
    const double r = theta[0] * x[i] + theta[1] * z[i];
    d_alpha += r * x[i];
    d_beta += r * z[i];
  }
  out[0] = d_alpha;
  out[1] = d_beta;
  return true;
}

std::vector<double> GmrfChainFamily::default_start(const Matrix&) const {
  return {1.0, 0.0};
}

}  // namespace scorelab
