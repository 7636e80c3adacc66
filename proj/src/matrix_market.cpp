#include "airgraph/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace airgraph {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& msg) {
  throw std::runtime_error("matrix market: " + path.string() + ": " + msg);
}

}  // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open for reading");

  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix")
    fail(path, "malformed header: " + line);
  if (lower(format) != "coordinate" || lower(field) != "real" ||
      lower(symmetry) != "general")
    fail(path, "unsupported format (need coordinate real general): " + line);

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  index_t nrows = 0, ncols = 0, nnz = 0;
  {
    std::istringstream sizes(line);
    if (!(sizes >> nrows >> ncols >> nnz) || nrows < 0 || ncols < 0 || nnz < 0)
      fail(path, "malformed size line: " + line);
  }
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (index_t k = 0; k < nnz; ++k) {
    index_t i, j;
    double v;
    if (!(in >> i >> j >> v)) fail(path, "truncated entry list");
    if (i < 1 || i > nrows || j < 1 || j > ncols)
      fail(path, "index out of bounds at entry " + std::to_string(k + 1));
    entries.push_back({i - 1, j - 1, v});
  }
  return SparseMatrix::from_triplets(nrows, ncols, std::move(entries));
}

void write_matrix_market(const SparseMatrix& a,
                         const std::filesystem::path& path) {
  std::FILE* out = std::fopen(path.string().c_str(), "w");
  if (!out) fail(path, "cannot open for writing");
  std::fprintf(out, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(out, "%lld %lld %lld\n", static_cast<long long>(a.nrows()),
               static_cast<long long>(a.ncols()),
               static_cast<long long>(a.nnz()));
  for (index_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::fprintf(out, "%lld %lld %.17g\n", static_cast<long long>(i + 1),
                   static_cast<long long>(cols[k] + 1), vals[k]);
    }
  }
  if (std::fclose(out) != 0) fail(path, "write failed on close");
}

}  // namespace airgraph
