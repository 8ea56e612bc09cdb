#include "csv_table.hpp"

#include "tracelab/common.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace tracelab::cli {

std::string format_number(double x) {
  if (!std::isfinite(x)) throw NumericalError("csv: non-finite value in a numeric column");
  if (x == 0.0) return "0";
  const double a = std::abs(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, (a < 1e-3 || a >= 1e15) ? "%.9e" : "%.12g", x);
  return buf;
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw Error("csv: row width does not match the header");
  rows_.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw Error("csv: no column named " + name);
}

std::vector<double> Table::numeric_column(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& row : rows_) {
    if (const auto* d = std::get_if<double>(&row[c])) out.push_back(*d);
    else if (const auto* i = std::get_if<std::int64_t>(&row[c])) out.push_back(static_cast<double>(*i));
    else throw Error("csv: column " + name + " is not numeric");
  }
  return out;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void Table::write(std::ostream& os) const {
  for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << quote(header_[i]);
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) os << format_number(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) os << v;
            else os << quote(v);
          },
          row[i]);
    }
    os << '\n';
  }
}

std::string Table::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace tracelab::cli
