#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scorelab/estimation.hpp"
#include "scorelab/matrix.hpp"
#include "scorelab/rng.hpp"

namespace scorelab {

/// Stationary Gaussian chain with tridiagonal precision: alpha on the
/// diagonal, beta on the two off-diagonals, N sites.  The precision is
/// positive definite exactly on Omega = { alpha > 2|beta| }.
struct TridiagonalModel {
  double alpha = 1.0;
  double beta = 0.0;
  std::size_t n_sites = 1;

  bool in_omega() const;
};

/// Dense N x N precision matrix of the model (test/oracle helper).
Matrix tridiagonal_precision(const TridiagonalModel& model);

/// Neighbor sums z_i = y_{i-1} + y_{i+1} with zero boundary values.
std::vector<double> neighbor_sums(std::span<const double> y);

/// Sufficient statistics of chain data (rows of y are independent vectors).
/// c_yy_dot_z = c_yy - c_yz^2 / c_zz; when c_zz = 0 the ratio is dropped and
/// the degenerate flag is set (the autoregression coefficient is undefined).
struct ChainStatistics {
  double c_yz = 0.0;
  double c_zz = 0.0;
  double c_yy = 0.0;
  double c_yy_dot_z = 0.0;
  bool degenerate = false;
  std::size_t nu = 0;       // number of vectors
  std::size_t n_sites = 0;  // N
};

ChainStatistics chain_statistics(const Matrix& y);

/// Log-determinant of the tridiagonal precision via the characteristic-root
/// recursion (beta = 0 reduces to N ln alpha).  Requires the model in Omega.
double tridiag_logdet(const TridiagonalModel& model);

/// Derivative-matching objective for the chain:
///   -nu N alpha + 1/2 sum_vectors sum_i (alpha y_i + beta z_i)^2.
/// Defined for every (alpha, beta); Omega only matters at the estimate.
double hyvarinen_objective(const TridiagonalModel& model, const Matrix& y);

struct GmrfEstimate {
  double lambda_hat = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  bool in_omega = false;
  /// True when the unconstrained minimum fell outside Omega and the
  /// boundary refit was requested and applied.
  bool refitted = false;
};

/// Closed-form unconstrained minimizer of hyvarinen_objective:
///   lambda = c_yz / c_zz,  alpha = nu N / c_yy.z,  beta = -alpha lambda.
/// The result can fall outside Omega and is returned as-is with
/// in_omega=false; with refit_to_omega the objective is re-minimized on the
/// boundary |beta| = alpha/2 - eps (eps = 1e-6).
GmrfEstimate hyvarinen_closed_form(const Matrix& y, bool refit_to_omega = false);

/// Log pseudo-likelihood of the chain (site-wise full conditionals
/// N(lambda z_i, 1/alpha), lambda = -beta/alpha), up to an additive constant:
///   1/2 nu N ln alpha - 1/2 alpha sum (y_i - lambda z_i)^2.
/// Its maximizer coincides with hyvarinen_closed_form.
double pseudo_loglik(const TridiagonalModel& model, const Matrix& y);

/// Exact negative log-likelihood up to a constant:
///   -(nu/2) tridiag_logdet + 1/2 (alpha c_yy + beta c_yz).
/// Requires the model in Omega.
double exact_neg_loglik(const TridiagonalModel& model, const Matrix& y);

/// Scatter data for the repeated-vector extension: S = sum of outer products
/// of nu observed vectors.
struct WishartData {
  Matrix s;
  std::size_t nu = 0;
};

WishartData wishart_from_vectors(const Matrix& y);

struct WishartEstimate {
  bool restricted = false;
  Matrix phi;  // unrestricted closed form; empty in restricted mode
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  bool in_omega = false;
};

/// Closed-form derivative-matching estimate from the scatter matrix:
/// unrestricted Phi = (nu - N - 1) S^{-1}; restricted-to-tridiagonal
/// alpha = ((nu-N-1)/N) sum_i s^{ii}, beta = ((nu-N-1)/(N-1)) sum_i s^{i,i+1}
/// where s^{ij} are entries of S^{-1}.
WishartEstimate wishart_hyvarinen_estimate(const WishartData& data,
                                           bool restrict_tridiagonal);

/// nu independent draws from N(0, Phi^{-1}) via Cholesky of Phi and a
/// triangular solve; rows of the result are the draws.
Matrix simulate_chain(const TridiagonalModel& model, std::size_t nu,
                      SeedSpec seed);

/// The chain as an estimation Family with theta = (alpha, beta); analytic
/// observation-side derivatives make the derivative-matching rule's
/// ScoreModel objective coincide with hyvarinen_objective.
class GmrfChainFamily : public Family {
 public:
  explicit GmrfChainFamily(std::size_t n_sites);

  std::string name() const override { return "gmrf-chain"; }
  std::size_t param_dim() const override { return 2; }
  std::size_t obs_dim() const override { return n_sites_; }
  double log_density(std::span<const double> x,
                     std::span<const double> theta) const override;
  bool has_spatial_derivatives() const override { return true; }
  std::vector<double> grad_log_density_x(
      std::span<const double> x, std::span<const double> theta) const override;
  double laplacian_log_density_x(std::span<const double> x,
                                 std::span<const double> theta) const override;
  bool has_sampler() const override { return true; }
  void sample(std::span<const double> theta, RandomStream& rng,
              std::span<double> out) const override;
  bool closed_form_gradient(const RuleSpec& rule, std::span<const double> x,
                            std::span<const double> theta,
                            std::span<double> out) const override;
  std::vector<double> default_start(const Matrix& data) const override;

 private:
  std::size_t n_sites_;
};

}  // namespace scorelab
