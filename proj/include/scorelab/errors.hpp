#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scorelab {

/// Base class for every failure the library raises on purpose.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-facing input: unknown rule names, malformed configuration,
/// schema violations.  The CLI maps these to exit status 2.
class validation_error : public error {
 public:
  using error::error;
};

/// Numeric-domain violations discovered mid-computation: non-finite
/// integrands, parameters outside their admissible region, negative
/// hazards.  The CLI maps these to exit status 3.
class domain_error : public error {
 public:
  using error::error;
};

/// A matrix handed to a Cholesky-backed routine was not positive definite.
/// Carries the index of the offending pivot.
class not_spd_error : public domain_error {
 public:
  not_spd_error(std::size_t pivot, const std::string& what)
      : domain_error(what), pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Singular (or numerically singular) matrix where an inverse/solve was needed.
class singular_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// A requested operation needs a capability the model does not provide
/// (no sampler registered, density does not exist for the given order, ...).
class capability_error : public error {
 public:
  using error::error;
};

/// Properness was required but not available: Bayes factors under improper
/// priors, predictive scores under improper posteriors.
class propriety_error : public error {
 public:
  using error::error;
};

/// An integral failed to stabilize under domain growth, i.e. it diverges.
class divergence_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// CSV ingestion failure.  Rows and columns are 1-based and count the header
/// as row 1, matching what an editor shows.
class csv_error : public validation_error {
 public:
  csv_error(std::size_t row, std::size_t col, const std::string& what)
      : validation_error(what), row_(row), col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// A design matrix lost (or never reached) full column rank.  Carries the
/// 1-based row index at which the rank stalled.
class rank_error : public domain_error {
 public:
  rank_error(std::size_t row, const std::string& what)
      : domain_error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace scorelab
