#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "airgraph/air.hpp"
#include "airgraph/partition_model.hpp"
#include "airgraph/solve.hpp"

namespace airgraph {

/// Per-level sizes, CF counts, dominance extrema and the complexity
/// metrics, as consumed by the CLI and external tooling.
nlohmann::json hierarchy_report(const Hierarchy& h);

/// Iteration counts, residual history, FLOP counters and (separately keyed,
/// since they are not deterministic) the timing-derived numbers.
nlohmann::json solve_report(const SolveStats& stats);

nlohmann::json partition_report(const PartitionState& state);

/// Largest post-cleanup dominance ratio across the hierarchy.
double max_theta(const Hierarchy& h);

/// Stable machine-readable row for runs.csv; see csv_header() for the
/// column order.
std::string csv_header();
std::string csv_row(const Hierarchy& h, const SolveStats& stats, double alpha,
                    const std::string& cf_name, std::uint64_t seed);

/// Appends a row, writing the header first when the file does not exist.
void append_csv(const std::filesystem::path& path, const std::string& row);

}  // namespace airgraph
