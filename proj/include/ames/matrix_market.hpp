#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ames/sparse_matrix.hpp"

namespace ames {

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace detail

/// Reads a `coordinate real|integer general|symmetric` Matrix Market stream.
/// Symmetric files are expanded to full storage; duplicates are summed.
inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw FormatError("empty input", 1);
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw FormatError("missing %%MatrixMarket banner", lineno);
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix" || format != "coordinate") {
    throw FormatError("only 'matrix coordinate' files are supported", lineno);
  }
  if (field == "pattern") throw FormatError("pattern matrices carry no values", lineno);
  if (field != "real" && field != "integer" && field != "double") {
    throw FormatError("unsupported field '" + field + "'", lineno);
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw FormatError("unsupported symmetry '" + symmetry + "'", lineno);
  }
  const bool symmetric = symmetry == "symmetric";

  // Skip comments and blank lines up to the size line.
  Index rows = 0, cols = 0, entries = 0;
  for (;;) {
    if (!std::getline(in, line)) throw FormatError("missing size line", lineno + 1);
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream sizes(line);
    long long r = -1, c = -1, e = -1;
    if (!(sizes >> r >> c >> e) || r < 0 || c < 0 || e < 0) {
      throw FormatError("malformed size line", lineno);
    }
    rows = static_cast<Index>(r);
    cols = static_cast<Index>(c);
    entries = static_cast<Index>(e);
    break;
  }
  if (symmetric && rows != cols) throw FormatError("symmetric matrix must be square", lineno);

  std::vector<Triplet> triplets;
  triplets.reserve(symmetric ? 2 * entries : entries);
  Index read = 0;
  while (read < entries && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j)) throw FormatError("malformed entry", lineno);
    if (!(entry >> v)) throw FormatError("entry without value", lineno);
    if (i < 1 || j < 1 || static_cast<Index>(i) > rows || static_cast<Index>(j) > cols) {
      throw FormatError("index out of range", lineno);
    }
    const Index r = static_cast<Index>(i - 1), c = static_cast<Index>(j - 1);
    triplets.push_back({r, c, v});
    if (symmetric && r != c) triplets.push_back({c, r, v});
    ++read;
  }
  if (read != entries) {
    throw FormatError("expected " + std::to_string(entries) + " entries, found " +
                          std::to_string(read),
                      lineno);
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

inline SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_matrix_market(in);
}

/// Writes general coordinate format, 1-based, full precision.
inline void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& t : a.triplets()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

inline void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_matrix_market(out, a);
}

}  // namespace ames
