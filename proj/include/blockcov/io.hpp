#pragma once

#include <iosfwd>
#include <string>

#include "blockcov/matrix.hpp"

namespace blockcov {

// Shortest text form of x that still round-trips exactly (17 significant digits).
std::string format_double(double x);

// Plain CSV, one matrix row per line, no header.  Entries must be finite.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(std::ostream& out, const Matrix& a);
void write_matrix_csv(const std::string& path, const Matrix& a);

}  // namespace blockcov
