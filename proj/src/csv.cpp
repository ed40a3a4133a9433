#include "scorelab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& name, const std::string& token,
                  std::size_t row, std::size_t col) {
  if (token.empty())
    throw csv_error(row, col,
                    name + ": missing value at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw csv_error(row, col,
                    name + ": cannot parse '" + token + "' as a number at row " +
                        std::to_string(row) + ", column " +
                        std::to_string(col));
  if (!std::isfinite(value))
    throw csv_error(row, col,
                    name + ": non-finite value at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
  return value;
}

// Reads all rows as string cells, enforcing the header and a rectangular
// shape.  Blank lines are skipped but still advance the row counter.
struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_numbers;  // 1-based file positions
};

RawCsv read_raw(std::istream& in, const std::string& name) {
  RawCsv raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (raw.header.empty()) {
      raw.header = std::move(cells);
      continue;
    }
    if (cells.size() != raw.header.size())
      throw csv_error(line_no, cells.size(),
                      name + ": row " + std::to_string(line_no) + " has " +
                          std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(raw.header.size()));
    raw.rows.push_back(std::move(cells));
    raw.row_numbers.push_back(line_no);
  }
  if (raw.header.empty())
    throw csv_error(1, 1, name + ": empty file (a header row is required)");
  return raw;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& name) {
  RawCsv raw = read_raw(in, name);
  CsvTable table;
  table.header = raw.header;
  table.values = Matrix(raw.rows.size(), raw.header.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i)
    for (std::size_t j = 0; j < raw.header.size(); ++j)
      table.values(i, j) =
          parse_cell(name, raw.rows[i][j], raw.row_numbers[i], j + 1);
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open CSV file '" + path + "'");
  return parse_csv(in, path);
}

DiscreteDistribution parse_distribution_csv(std::istream& in,
                                            const std::string& name) {
  RawCsv raw = read_raw(in, name);
  if (raw.header.size() != 2)
    throw csv_error(1, raw.header.size(),
                    name + ": a distribution file needs exactly two columns "
                           "(label, probability)");
  if (raw.rows.empty())
    throw csv_error(1, 1, name + ": distribution file has no outcomes");
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    if (raw.rows[i][0].empty())
      throw csv_error(raw.row_numbers[i], 1,
                      name + ": missing label at row " +
                          std::to_string(raw.row_numbers[i]));
    labels.push_back(raw.rows[i][0]);
    probs.push_back(parse_cell(name, raw.rows[i][1], raw.row_numbers[i], 2));
  }
  return DiscreteDistribution(std::move(labels), std::move(probs));
}

DiscreteDistribution read_distribution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open CSV file '" + path + "'");
  return parse_distribution_csv(in, path);
}

}  // namespace scorelab
