#include "airgraph/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "airgraph/matrix_market.hpp"
#include "airgraph/rng.hpp"

namespace airgraph {

namespace {

constexpr double kBoxSide = 3.0;
constexpr double kSourceLo = 1.4;
constexpr double kSourceHi = 1.6;
constexpr double kMaxJitter = 0.3;

double signed_area(const std::array<double, 2>& p0,
                   const std::array<double, 2>& p1,
                   const std::array<double, 2>& p2) {
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

TriMesh try_mesh(index_t nx, std::uint64_t seed, double jitter) {
  TriMesh mesh;
  mesh.nx = nx;
  mesh.seed = seed;
  const double h = kBoxSide / static_cast<double>(nx);
  const index_t stride = nx + 1;
  const std::uint64_t mesh_seed = rng::mix(seed, rng::kStreamMesh);

  mesh.nodes.resize(stride * stride);
  for (index_t iy = 0; iy <= nx; ++iy) {
    for (index_t ix = 0; ix <= nx; ++ix) {
      const index_t id = iy * stride + ix;
      double x = h * static_cast<double>(ix);
      double y = h * static_cast<double>(iy);
      const double u0 = 2.0 * rng::uniform01(mesh_seed, 2 * id) - 1.0;
      const double u1 = 2.0 * rng::uniform01(mesh_seed, 2 * id + 1) - 1.0;
      const bool x_edge = ix == 0 || ix == nx;
      const bool y_edge = iy == 0 || iy == nx;
      if (!x_edge && !y_edge) {
        x += jitter * h * u0;
        y += jitter * h * u1;
      } else if (x_edge && !y_edge) {
        y += jitter * h * u1;  // slide along the vertical boundary
      } else if (y_edge && !x_edge) {
        x += jitter * h * u0;  // slide along the horizontal boundary
      }
      mesh.nodes[id] = {x, y};
    }
  }

  // Cell-parity alternating diagonals: keeps the grid reflection-symmetric
  // for odd nx and avoids the directional bias of a one-diagonal split.
  mesh.triangles.reserve(2 * static_cast<std::size_t>(nx) * nx);
  for (index_t iy = 0; iy < nx; ++iy) {
    for (index_t ix = 0; ix < nx; ++ix) {
      const index_t n00 = iy * stride + ix;
      const index_t n10 = n00 + 1;
      const index_t n01 = n00 + stride;
      const index_t n11 = n01 + 1;
      if ((ix + iy) % 2 == 0) {
        mesh.triangles.push_back({n00, n10, n11});
        mesh.triangles.push_back({n00, n11, n01});
      } else {
        mesh.triangles.push_back({n00, n10, n01});
        mesh.triangles.push_back({n10, n11, n01});
      }
    }
  }
  return mesh;
}

void find_boundary(TriMesh& mesh) {
  std::map<std::pair<index_t, index_t>, std::pair<index_t, index_t>> edges;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const index_t a = tri[e];
      const index_t b = tri[(e + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edges.find({key.first, key.second});
      if (it == edges.end())
        edges[{key.first, key.second}] = {a, b};
      else
        edges.erase(it);  // interior edge, seen from both sides
    }
  }
  for (const auto& [key, oriented] : edges) {
    const auto& pa = mesh.nodes[oriented.first];
    const auto& pb = mesh.nodes[oriented.second];
    const double dx = pb[0] - pa[0];
    const double dy = pb[1] - pa[1];
    const double len = std::hypot(dx, dy);
    // Triangles are CCW, so the exterior lies to the right of a->b.
    mesh.boundary_edges.push_back(
        {oriented.first, oriented.second, {dy / len, -dx / len}});
  }
}

}  // namespace

double triangle_area(const TriMesh& mesh, index_t t) {
  const auto& tri = mesh.triangles[t];
  return signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                     mesh.nodes[tri[2]]);
}

TriMesh generate_mesh(index_t nx, std::uint64_t seed, double jitter) {
  if (nx < 1) throw std::invalid_argument("generate_mesh: nx must be >= 1");
  if (jitter < 0.0 || jitter > kMaxJitter)
    throw std::invalid_argument(
        "generate_mesh: jitter must lie in [0, 0.3], got " +
        std::to_string(jitter));
  const double h = kBoxSide / static_cast<double>(nx);
  const double min_area = 1e-9 * h * h;
  double applied = jitter;
  for (int attempt = 0; attempt < 20; ++attempt) {
    TriMesh mesh = try_mesh(nx, seed, applied);
    bool ok = true;
    for (index_t t = 0; t < static_cast<index_t>(mesh.triangles.size()); ++t) {
      if (triangle_area(mesh, t) <= min_area) {
        ok = false;
        break;
      }
    }
    if (ok) {
      mesh.jitter_requested = jitter;
      mesh.jitter_applied = applied;
      find_boundary(mesh);
      return mesh;
    }
    applied *= 0.5;  // inverted element: retry gentler
  }
  throw std::runtime_error("generate_mesh: could not avoid inverted elements");
}

StreamingProblem assemble_streaming(const TriMesh& mesh) {
  StreamingProblem p;
  p.mesh = mesh;
  p.coords = mesh.nodes;
  p.n_nodes = static_cast<index_t>(mesh.nodes.size());
  p.n_triangles = static_cast<index_t>(mesh.triangles.size());
  p.nddofs = 3 * p.n_triangles * 4;
  p.nx = mesh.nx;
  p.seed = mesh.seed;
  p.jitter_requested = mesh.jitter_requested;
  p.jitter_applied = mesh.jitter_applied;

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  p.angles = {{{inv_sqrt2, inv_sqrt2},
               {-inv_sqrt2, inv_sqrt2},
               {-inv_sqrt2, -inv_sqrt2},
               {inv_sqrt2, -inv_sqrt2}}};

  const index_t n = p.n_nodes;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(4) * 9 * mesh.triangles.size());
  p.b.assign(4 * n, 0.0);

  for (index_t ang = 0; ang < 4; ++ang) {
    const auto& omega = p.angles[ang];
    const index_t off = ang * n;
    for (const auto& tri : mesh.triangles) {
      const auto& p0 = mesh.nodes[tri[0]];
      const auto& p1 = mesh.nodes[tri[1]];
      const auto& p2 = mesh.nodes[tri[2]];
      const double area = signed_area(p0, p1, p2);
      const double inv2a = 1.0 / (2.0 * area);
      if (area <= 0.0)
        throw std::runtime_error("assemble_streaming: degenerate element");
      // P1 basis gradients.
      const double gx[3] = {(p1[1] - p2[1]) * inv2a, (p2[1] - p0[1]) * inv2a,
                            (p0[1] - p1[1]) * inv2a};
      const double gy[3] = {(p2[0] - p1[0]) * inv2a, (p0[0] - p2[0]) * inv2a,
                            (p1[0] - p0[0]) * inv2a};
      double d[3];
      for (int i = 0; i < 3; ++i) d[i] = omega[0] * gx[i] + omega[1] * gy[i];
      // Streamline-upwind test functions v + tau * (omega . grad v) with
      // tau = h_e / (2 |omega|), h_e = sqrt(2 area); |omega| = 1.
      const double tau = 0.5 * std::sqrt(2.0 * area);

      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double k_ij = d[j] * (area / 3.0) + tau * d[i] * d[j] * area;
          trips.push_back({off + tri[i], off + tri[j], k_ij});
        }
      }
      const double cx = (p0[0] + p1[0] + p2[0]) / 3.0;
      const double cy = (p0[1] + p1[1] + p2[1]) / 3.0;
      if (cx >= kSourceLo && cx <= kSourceHi && cy >= kSourceLo &&
          cy <= kSourceHi) {
        for (int i = 0; i < 3; ++i)
          p.b[off + tri[i]] += area / 3.0 + tau * d[i] * area;
      }
    }
    // Weak zero-inflow boundary: add |omega . n| (v, psi) on inflow edges.
    for (const auto& be : mesh.boundary_edges) {
      const double wn = omega[0] * be.normal[0] + omega[1] * be.normal[1];
      if (wn >= 0.0) continue;
      const auto& pa = mesh.nodes[be.a];
      const auto& pb = mesh.nodes[be.b];
      const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
      const double w = -wn * len;
      trips.push_back({off + be.a, off + be.a, w / 3.0});
      trips.push_back({off + be.b, off + be.b, w / 3.0});
      trips.push_back({off + be.a, off + be.b, w / 6.0});
      trips.push_back({off + be.b, off + be.a, w / 6.0});
    }
  }
  p.a = SparseMatrix::from_triplets(4 * n, 4 * n, std::move(trips))
            .with_full_diagonal();
  return p;
}

SparseMatrix extract_angle_block(const StreamingProblem& p, index_t angle) {
  const index_t n = p.n_nodes;
  const index_t off = angle * n;
  std::vector<Triplet> trips;
  for (index_t i = 0; i < n; ++i) {
    auto cols = p.a.row_cols(off + i);
    auto vals = p.a.row_vals(off + i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      trips.push_back({i, cols[k] - off, vals[k]});
  }
  return SparseMatrix::from_triplets(n, n, std::move(trips));
}

std::vector<double> extract_angle_rhs(const StreamingProblem& p,
                                      index_t angle) {
  const index_t n = p.n_nodes;
  return {p.b.begin() + angle * n, p.b.begin() + (angle + 1) * n};
}

namespace {

void write_array(const std::filesystem::path& path,
                 std::span<const double> v) {
  std::FILE* out = std::fopen(path.string().c_str(), "w");
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::fprintf(out, "%zu\n", v.size());
  for (double x : v) std::fprintf(out, "%.17g\n", x);
  if (std::fclose(out) != 0)
    throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_array(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::size_t count = 0;
  in >> count;
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> v[i]))
      throw std::runtime_error("truncated array in " + path.string());
  }
  return v;
}

}  // namespace

void export_problem(const StreamingProblem& p,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_market(p.a, dir / "A.mtx");
  write_array(dir / "b.txt", p.b);

  std::FILE* out = std::fopen((dir / "coords.txt").string().c_str(), "w");
  if (!out) throw std::runtime_error("cannot write coords.txt");
  std::fprintf(out, "%zu\n", p.coords.size());
  for (const auto& c : p.coords)
    std::fprintf(out, "%.17g %.17g\n", c[0], c[1]);
  if (std::fclose(out) != 0) throw std::runtime_error("coords.txt write failed");

  nlohmann::json meta;
  meta["nx"] = p.nx;
  meta["seed"] = p.seed;
  meta["jitter"] = p.jitter_requested;
  meta["jitter_applied"] = p.jitter_applied;
  meta["n_nodes"] = p.n_nodes;
  meta["n_triangles"] = p.n_triangles;
  meta["n_angles"] = 4;
  meta["nddofs"] = p.nddofs;
  meta["angles"] = nlohmann::json::array();
  for (const auto& a : p.angles) meta["angles"].push_back({a[0], a[1]});
  std::ofstream mf(dir / "meta.json");
  if (!mf) throw std::runtime_error("cannot write meta.json");
  mf << meta.dump(2) << "\n";
}

StreamingProblem import_problem(const std::filesystem::path& dir) {
  StreamingProblem p;
  p.a = read_matrix_market(dir / "A.mtx");
  p.b = read_array(dir / "b.txt");
  if (static_cast<index_t>(p.b.size()) != p.a.nrows())
    throw std::runtime_error("import_problem: rhs length does not match A");

  std::ifstream cf(dir / "coords.txt");
  if (cf) {
    std::size_t count = 0;
    cf >> count;
    p.coords.resize(count);
    for (std::size_t i = 0; i < count; ++i) cf >> p.coords[i][0] >> p.coords[i][1];
  }
  std::ifstream mf(dir / "meta.json");
  if (mf) {
    nlohmann::json meta = nlohmann::json::parse(mf);
    p.nx = meta.value("nx", index_t{0});
    p.seed = meta.value("seed", std::uint64_t{0});
    p.jitter_requested = meta.value("jitter", 0.0);
    p.jitter_applied = meta.value("jitter_applied", 0.0);
    p.n_nodes = meta.value("n_nodes", p.a.nrows() / 4);
    p.n_triangles = meta.value("n_triangles", index_t{0});
    p.nddofs = meta.value("nddofs", index_t{0});
    if (meta.contains("angles")) {
      for (std::size_t k = 0; k < 4 && k < meta["angles"].size(); ++k) {
        p.angles[k] = {meta["angles"][k][0].get<double>(),
                       meta["angles"][k][1].get<double>()};
      }
    }
  } else {
    p.n_nodes = p.a.nrows();
  }
  return p;
}

}  // namespace airgraph
