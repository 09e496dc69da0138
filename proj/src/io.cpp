#include "blockcov/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace blockcov {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

double parse_field(const std::string& field, Index line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  while (end != begin + field.size() && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || end != begin + field.size())
    throw CsvError("line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
  if (!std::isfinite(value))
    throw CsvError("line " + std::to_string(line_no) + ": non-finite value '" + field + "'");
  return value;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
      const std::size_t lo = field.find_first_not_of(" \t");
      if (lo == std::string::npos)
        throw CsvError("line " + std::to_string(line_no) + ": empty field");
      field = field.substr(lo, field.find_last_not_of(" \t") - lo + 1);
      row.push_back(parse_field(field, line_no));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(rows.front().size()) + " fields, got " +
                     std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError("empty input");
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[i][j];
  return a;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& a) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot open '" + path + "' for writing");
  write_matrix_csv(out, a);
  if (!out) throw CsvError("write to '" + path + "' failed");
}

}  // namespace blockcov
