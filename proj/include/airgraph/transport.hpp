#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "airgraph/sparse.hpp"

namespace airgraph {

/// Conforming triangulation of the [0,3] x [0,3] box. Triangles are
/// counter-clockwise; boundary edges carry unit outward normals and close
/// the domain.
struct TriMesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<index_t, 3>> triangles;
  struct BoundaryEdge {
    index_t a = 0;
    index_t b = 0;
    std::array<double, 2> normal{0.0, 0.0};
  };
  std::vector<BoundaryEdge> boundary_edges;

  index_t nx = 0;
  std::uint64_t seed = 0;
  double jitter_requested = 0.0;
  double jitter_applied = 0.0;  // reduced if jitter inverted an element
};

/// Structured right-triangle grid with cell-parity alternating diagonals,
/// interior nodes displaced per-axis by up to jitter*h and boundary nodes
/// slid along their boundary segment (corners fixed). Deterministic per
/// seed. jitter must lie in [0, 0.3]; if a displacement inverts an element
/// the jitter is halved and the mesh regenerated.
TriMesh generate_mesh(index_t nx, std::uint64_t seed, double jitter);

double triangle_area(const TriMesh& mesh, index_t t);

/// The four-angle streaming operator: one SUPG-stabilised advection block
/// per direction (+-1/sqrt(2), +-1/sqrt(2)), stacked block-diagonally, with
/// a unit source over elements whose centroid falls in the central
/// 0.2 x 0.2 box and weak vacuum (zero inflow) boundaries.
struct StreamingProblem {
  SparseMatrix a;
  std::vector<double> b;
  std::array<std::array<double, 2>, 4> angles{};
  std::optional<TriMesh> mesh;
  std::vector<std::array<double, 2>> coords;  // per block-local node

  index_t n_nodes = 0;  // per angle block
  index_t n_triangles = 0;
  index_t nddofs = 0;  // 3 * triangles * angles, the DG-equivalent count

  index_t nx = 0;
  std::uint64_t seed = 0;
  double jitter_requested = 0.0;
  double jitter_applied = 0.0;
};

StreamingProblem assemble_streaming(const TriMesh& mesh);

/// One angle block of the operator and right-hand side.
SparseMatrix extract_angle_block(const StreamingProblem& p, index_t angle);
std::vector<double> extract_angle_rhs(const StreamingProblem& p, index_t angle);

/// Problem directory layout: A.mtx, b.txt, coords.txt, meta.json. The
/// round trip is lossless at 17 significant digits.
void export_problem(const StreamingProblem& p,
                    const std::filesystem::path& dir);
StreamingProblem import_problem(const std::filesystem::path& dir);

}  // namespace airgraph
