#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace tracelab::cli {

using Cell = std::variant<std::int64_t, double, std::string>;

// Column-named table written as comma-separated UTF-8. Doubles use %.12g, switching to %.9e for
// magnitudes below 1e-3 or from 1e15 up, so files are byte-stable across runs.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header);

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;

  void write(std::ostream& os) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double x);

}  // namespace tracelab::cli
