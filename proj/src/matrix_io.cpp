#include "rsmooth/matrix_io.hpp"

#include "rsmooth/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace rsmooth {

Matrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("matrix file: missing header line");
  std::istringstream hs(header);
  long rows = 0;
  long cols = 0;
  if (!(hs >> rows)) throw ParseError("matrix file: header must start with the row count");
  if (!(hs >> cols)) cols = rows;
  std::string extra;
  if (hs >> extra) throw ParseError("matrix file: unexpected token in header '" + extra + "'");
  if (rows < 1 || cols < 1) throw ParseError("matrix file: dimensions must be positive");

  Matrix M(rows, cols);
  std::string line;
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("matrix file: expected " + std::to_string(rows) + " rows, got " +
                       std::to_string(i));
    }
    std::istringstream ls(line);
    for (long j = 0; j < cols; ++j) {
      std::string token;
      if (!(ls >> token)) {
        throw ParseError("matrix file: row " + std::to_string(i + 1) + " has too few values");
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw ParseError("matrix file: bad value '" + token + "' in row " + std::to_string(i + 1));
      }
      M(i, j) = v;
    }
    std::string rest;
    if (ls >> rest) {
      throw ParseError("matrix file: row " + std::to_string(i + 1) + " has too many values");
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw ParseError("matrix file: trailing data after the last row");
    }
  }
  return M;
}

void write_matrix(std::ostream& out, const Matrix& M) {
  if (M.rows() == M.cols()) {
    out << M.rows() << '\n';
  } else {
    out << M.rows() << ' ' << M.cols() << '\n';
  }
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ' ';
      out << M(i, j);
    }
    out << '\n';
  }
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_matrix(in);
}

void write_matrix_file(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  write_matrix(out, M);
  if (!out) throw ParseError("write failed for '" + path + "'");
}

Matrix read_symmetric_matrix_file(const std::string& path) {
  Matrix M = read_matrix_file(path);
  if (M.rows() != M.cols()) throw ParseError("'" + path + "' is not square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParseError("'" + path + "' is not symmetric");
  }
  return M;
}

}  // namespace rsmooth
