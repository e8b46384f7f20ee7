#pragma once

// Matrix Market exchange format (.mtx): reader for coordinate/array storage
// with real, integer or pattern fields and general or symmetric symmetry;
// writer for dense array storage with 17 significant digits (lossless for
// doubles). Inputs are densified.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rdr/errors.hpp"
#include "rdr/linalg.hpp"

namespace rdr {

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace detail

inline DenseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || detail::lower(object) != "matrix" || symmetry.empty())
    throw ParseError("bad Matrix Market header: " + line);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);

  if (format != "coordinate" && format != "array")
    throw ParseError("unknown storage format '" + format + "'");
  if (field == "complex" || field == "hermitian")
    throw UnsupportedField("complex Matrix Market fields are not supported");
  if (field != "real" && field != "integer" && field != "double" && field != "pattern")
    throw UnsupportedField("unsupported field '" + field + "'");
  if (field == "pattern" && format == "array")
    throw ParseError("pattern field requires coordinate format");
  if (symmetry != "general" && symmetry != "symmetric")
    throw UnsupportedField("unsupported symmetry '" + symmetry + "'");
  const bool sym = symmetry == "symmetric";
  const bool pattern = field == "pattern";

  if (!detail::next_data_line(in, line)) throw ParseError("missing size line");
  std::istringstream size_line(line);
  long long m = 0, n = 0, nnz = 0;
  size_line >> m >> n;
  if (format == "coordinate") size_line >> nnz;
  if (!size_line || m < 1 || n < 1 || nnz < 0) throw ParseError("malformed size line: " + line);
  if (sym && m != n) throw ParseError("symmetric matrix must be square");

  RowMatrix a = RowMatrix::Zero(m, n);
  auto read_value = [](std::istringstream& s, const std::string& l) {
    double v;
    if (!(s >> v)) throw ParseError("malformed entry: " + l);
    return v;
  };
  auto expect_end = [](std::istringstream& s, const std::string& l) {
    std::string extra;
    if (s >> extra) throw ParseError("trailing tokens in entry: " + l);
  };

  if (format == "coordinate") {
    for (long long k = 0; k < nnz; ++k) {
      if (!detail::next_data_line(in, line))
        throw ParseError("expected " + std::to_string(nnz) + " entries, got " + std::to_string(k));
      std::istringstream s(line);
      long long i = 0, j = 0;
      if (!(s >> i >> j)) throw ParseError("malformed entry: " + line);
      if (i < 1 || i > m || j < 1 || j > n) throw ParseError("index out of range: " + line);
      const double v = pattern ? 1.0 : read_value(s, line);
      expect_end(s, line);
      a(i - 1, j - 1) += v;
      if (sym && i != j) a(j - 1, i - 1) += v;
    }
  } else {
    // Column-major; symmetric storage lists the lower triangle only.
    for (long long j = 0; j < n; ++j) {
      for (long long i = sym ? j : 0; i < m; ++i) {
        if (!detail::next_data_line(in, line)) throw ParseError("too few array entries");
        std::istringstream s(line);
        const double v = read_value(s, line);
        expect_end(s, line);
        a(i, j) = v;
        if (sym) a(j, i) = v;
      }
    }
  }
  if (detail::next_data_line(in, line)) throw ParseError("more entries than declared");
  return DenseMatrix(std::move(a));
}

inline DenseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_matrix_market(in);
}

inline void write_matrix_market(std::ostream& out, const DenseMatrix& a,
                                const std::string& comment = {}) {
  out << "%%MatrixMarket matrix array real general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string l;
    while (std::getline(lines, l)) out << "% " << l << '\n';
  }
  out << a.rows() << ' ' << a.cols() << '\n';
  out << std::setprecision(17);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out << a(i, j) << '\n';
}

inline void write_matrix_market(const std::string& path, const DenseMatrix& a,
                                const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_matrix_market(out, a, comment);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace rdr
