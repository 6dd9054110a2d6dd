#pragma once

#include "rsmooth/manifolds.hpp"

#include <iosfwd>
#include <string>

namespace rsmooth {

// Plain-text matrix format. A square matrix is written as a first line "n"
// followed by n lines of n space-separated decimals. Non-square matrices
// (factors) use a first line "rows cols". Values are written with 17
// significant digits so that they round-trip exactly.

Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& M);

Matrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Matrix& M);

/// Reads a square matrix and rejects it unless symmetric to 1e-12 (relative
/// to its largest entry). Throws ParseError.
Matrix read_symmetric_matrix_file(const std::string& path);

}  // namespace rsmooth
