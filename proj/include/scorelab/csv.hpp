#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scorelab/matrix.hpp"
#include "scorelab/scores.hpp"

namespace scorelab {

/// Numeric table read from CSV.  A header row is mandatory; every data cell
/// must parse as a finite number.  Violations raise csv_error carrying
/// 1-based row/column positions (the header is row 1).
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

CsvTable parse_csv(std::istream& in, const std::string& name);
CsvTable read_csv(const std::string& path);

/// Distribution file: exactly two columns, labels and probabilities, with a
/// header row.  The probabilities must form a valid distribution.
DiscreteDistribution parse_distribution_csv(std::istream& in,
                                            const std::string& name);
DiscreteDistribution read_distribution_csv(const std::string& path);

}  // namespace scorelab
