#pragma once

#include <filesystem>

#include "airgraph/sparse.hpp"

namespace airgraph {

/// Reads a Matrix Market file (coordinate, real, general; 1-based indices).
/// Duplicate entries are summed. Throws std::runtime_error on a malformed
/// header or out-of-bounds indices.
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes coordinate/real/general format with 17 significant digits so a
/// round trip reproduces values exactly.
void write_matrix_market(const SparseMatrix& a,
                         const std::filesystem::path& path);

}  // namespace airgraph
