#include "airgraph/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "airgraph/air.hpp"
#include "airgraph/matrix_market.hpp"
#include "airgraph/partition_model.hpp"
#include "airgraph/reports.hpp"
#include "airgraph/solve.hpp"
#include "airgraph/transport.hpp"

namespace airgraph {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolveFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Union of the problem, setup, solve and partition-model knobs; loadable
/// from a JSON manifest with flags taking precedence.
struct RunConfig {
  index_t nx = 40;
  std::uint64_t seed = 1;
  double jitter = 0.3;
  std::string problem;
  std::string matrix;

  double alpha = 0.5;
  std::string cf = "pmisr-ddc";
  double ddc_fraction = 0.10;
  index_t max_loops = 3;
  index_t poly_order = 6;
  index_t sparsity_order = 1;
  index_t coarse_order = 12;
  index_t coarse_its = 3;
  double drop_coarse = 0.001;
  double drop_restrict = 0.01;
  index_t truncate_size = 3000;

  double rtol = 1e-10;
  index_t max_its = 200;
  index_t up_smooths = 2;

  int ranks = 64;
  double ratio_threshold = 2.0;

  std::string out = ".";
};

void apply_json(RunConfig& rc, const nlohmann::json& j) {
  const std::map<std::string, std::function<void(const nlohmann::json&)>>
      setters = {
          {"nx", [&](const auto& v) { rc.nx = v.template get<index_t>(); }},
          {"seed",
           [&](const auto& v) { rc.seed = v.template get<std::uint64_t>(); }},
          {"jitter", [&](const auto& v) { rc.jitter = v.template get<double>(); }},
          {"problem",
           [&](const auto& v) { rc.problem = v.template get<std::string>(); }},
          {"matrix",
           [&](const auto& v) { rc.matrix = v.template get<std::string>(); }},
          {"alpha", [&](const auto& v) { rc.alpha = v.template get<double>(); }},
          {"cf", [&](const auto& v) { rc.cf = v.template get<std::string>(); }},
          {"ddc_fraction",
           [&](const auto& v) { rc.ddc_fraction = v.template get<double>(); }},
          {"max_loops",
           [&](const auto& v) { rc.max_loops = v.template get<index_t>(); }},
          {"poly_order",
           [&](const auto& v) { rc.poly_order = v.template get<index_t>(); }},
          {"sparsity_order",
           [&](const auto& v) { rc.sparsity_order = v.template get<index_t>(); }},
          {"coarse_order",
           [&](const auto& v) { rc.coarse_order = v.template get<index_t>(); }},
          {"coarse_its",
           [&](const auto& v) { rc.coarse_its = v.template get<index_t>(); }},
          {"drop_coarse",
           [&](const auto& v) { rc.drop_coarse = v.template get<double>(); }},
          {"drop_restrict",
           [&](const auto& v) { rc.drop_restrict = v.template get<double>(); }},
          {"truncate_size",
           [&](const auto& v) { rc.truncate_size = v.template get<index_t>(); }},
          {"rtol", [&](const auto& v) { rc.rtol = v.template get<double>(); }},
          {"max_its",
           [&](const auto& v) { rc.max_its = v.template get<index_t>(); }},
          {"up_smooths",
           [&](const auto& v) { rc.up_smooths = v.template get<index_t>(); }},
          {"ranks", [&](const auto& v) { rc.ranks = v.template get<int>(); }},
          {"ratio_threshold",
           [&](const auto& v) { rc.ratio_threshold = v.template get<double>(); }},
          {"out", [&](const auto& v) { rc.out = v.template get<std::string>(); }},
      };
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("config: unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception&) {
      throw UsageError("config: bad value for key '" + key + "'");
    }
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: parse error: ") + e.what());
  }
  RunConfig rc;
  apply_json(rc, j);
  return rc;
}

SetupConfig make_setup_config(const RunConfig& rc) {
  SetupConfig cfg;
  cfg.strength_alpha = rc.alpha;
  if (rc.cf == "pmisr") {
    cfg.cf = CfSplitting::kPmisr;
    cfg.ddc_enabled = false;
  } else if (rc.cf == "pmisr-ddc") {
    cfg.cf = CfSplitting::kPmisr;
    cfg.ddc_enabled = true;
  } else if (rc.cf == "pmis") {
    cfg.cf = CfSplitting::kPmis;
    cfg.ddc_enabled = false;
  } else if (rc.cf == "pmis-swap") {
    cfg.cf = CfSplitting::kPmisSwap;
    cfg.ddc_enabled = false;
  } else {
    throw UsageError("unknown --cf '" + rc.cf +
                     "' (pmisr|pmisr-ddc|pmis|pmis-swap)");
  }
  cfg.ddc_fraction = rc.ddc_fraction;
  cfg.max_loops = rc.max_loops;
  cfg.poly_order = rc.poly_order;
  cfg.sparsity_order = rc.sparsity_order;
  cfg.coarse_poly_order = rc.coarse_order;
  cfg.coarse_iterations = rc.coarse_its;
  cfg.drop_coarse = rc.drop_coarse;
  cfg.drop_restrict = rc.drop_restrict;
  cfg.coarse_size_target = rc.truncate_size;
  cfg.seed = rc.seed;
  return cfg;
}

nlohmann::json config_echo(const RunConfig& rc) {
  return {{"nx", rc.nx},
          {"seed", rc.seed},
          {"jitter", rc.jitter},
          {"problem", rc.problem},
          {"matrix", rc.matrix},
          {"alpha", rc.alpha},
          {"cf", rc.cf},
          {"ddc_fraction", rc.ddc_fraction},
          {"max_loops", rc.max_loops},
          {"poly_order", rc.poly_order},
          {"sparsity_order", rc.sparsity_order},
          {"coarse_order", rc.coarse_order},
          {"coarse_its", rc.coarse_its},
          {"drop_coarse", rc.drop_coarse},
          {"drop_restrict", rc.drop_restrict},
          {"truncate_size", rc.truncate_size},
          {"rtol", rc.rtol},
          {"max_its", rc.max_its},
          {"up_smooths", rc.up_smooths},
          {"ranks", rc.ranks},
          {"ratio_threshold", rc.ratio_threshold},
          {"out", rc.out}};
}

StreamingProblem load_problem(const RunConfig& rc) {
  if (!rc.matrix.empty()) {
    StreamingProblem p;
    p.a = read_matrix_market(rc.matrix);
    if (p.a.nrows() != p.a.ncols())
      throw UsageError("--matrix: operator must be square");
    p.b.assign(p.a.nrows(), 1.0);  // unit rhs for bare operators
    p.n_nodes = p.a.nrows();
    return p;
  }
  if (!rc.problem.empty()) return import_problem(rc.problem);
  throw UsageError("need --problem <dir> or --matrix <file.mtx>");
}

int cmd_generate(const RunConfig& rc) {
  TriMesh mesh;
  try {
    mesh = generate_mesh(rc.nx, rc.seed, rc.jitter);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "generate: %s\n", e.what());
    return kExitUsage;
  }
  StreamingProblem p = assemble_streaming(mesh);
  export_problem(p, rc.out);
  if (mesh.jitter_applied != mesh.jitter_requested)
    std::fprintf(stderr,
                 "generate: jitter reduced from %g to %g to keep elements "
                 "positive\n",
                 mesh.jitter_requested, mesh.jitter_applied);
  std::printf("generated %s: %lld nodes/angle, %lld triangles, n=%lld, nnz=%lld\n",
              rc.out.c_str(), static_cast<long long>(p.n_nodes),
              static_cast<long long>(p.n_triangles),
              static_cast<long long>(p.a.nrows()),
              static_cast<long long>(p.a.nnz()));
  return kExitOk;
}

int cmd_solve(const RunConfig& rc) {
  SetupConfig scfg = make_setup_config(rc);  // validate before any I/O
  StreamingProblem p = load_problem(rc);

  Hierarchy h;
  std::optional<std::string> setup_error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    h = setup(p.a, scfg);
  } catch (const std::runtime_error& e) {
    setup_error = e.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double setup_seconds = std::chrono::duration<double>(t1 - t0).count();

  std::filesystem::create_directories(rc.out);
  nlohmann::json out;
  out["config"] = config_echo(rc);
  out["problem"] = {{"n", p.a.nrows()},
                    {"nnz", p.a.nnz()},
                    {"n_nodes", p.n_nodes},
                    {"nddofs", p.nddofs}};

  if (setup_error) {
    out["setup_error"] = *setup_error;
    std::ofstream sf(std::filesystem::path(rc.out) / "stats.json");
    sf << out.dump(2) << "\n";
    std::fprintf(stderr, "solve: setup aborted: %s\n", setup_error->c_str());
    return kExitSolveFailed;
  }

  SolveConfig vcfg;
  vcfg.rtol = rc.rtol;
  vcfg.max_iterations = rc.max_its;
  vcfg.up_f_smooths = rc.up_smooths;
  vcfg.coarse_iterations = rc.coarse_its;
  vcfg.nddofs = p.nddofs;
  SolveStats stats = richardson_solve(h, p.b, vcfg);

  out["hierarchy"] = hierarchy_report(h);
  out["solve"] = solve_report(stats);
  out["setup_seconds"] = setup_seconds;
  {
    std::ofstream sf(std::filesystem::path(rc.out) / "stats.json");
    if (!sf) throw std::runtime_error("cannot write stats.json");
    sf << out.dump(2) << "\n";
  }
  append_csv(std::filesystem::path(rc.out) / "runs.csv",
             csv_row(h, stats, rc.alpha, rc.cf, rc.seed));

  std::printf(
      "solve: %s in %lld iterations, %.1f WUs, levels=%lld, grid=%.3g, "
      "op=%.3g, storage=%.3g, max_theta=%.3g\n",
      stats.converged ? "converged" : "FAILED",
      static_cast<long long>(stats.iterations), stats.work_units,
      static_cast<long long>(h.level_count()), h.metrics.grid_complexity,
      h.metrics.operator_complexity, h.metrics.storage_complexity,
      max_theta(h));
  return stats.converged ? kExitOk : kExitSolveFailed;
}

int cmd_report(const RunConfig& rc) {
  SetupConfig scfg = make_setup_config(rc);
  StreamingProblem p = load_problem(rc);
  Hierarchy h;
  try {
    h = setup(p.a, scfg);
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "report: setup aborted: %s\n", e.what());
    return kExitSolveFailed;
  }
  const std::filesystem::path out_dir(rc.out);
  std::filesystem::create_directories(out_dir);

  // Dominance histograms, one file per level: gnuplot-friendly columns.
  for (std::size_t l = 0; l < h.levels.size(); ++l) {
    const Level& lvl = h.levels[l];
    const auto path = out_dir / ("hist_level" + std::to_string(l) + ".csv");
    std::ofstream hf(path);
    if (!hf) throw std::runtime_error("cannot write " + path.string());
    hf << "# theta histograms, level " << l << "\n";
    hf << "bin,pre_lower,pre_count,post_lower,post_count\n";
    const auto& pre = lvl.theta_pre;
    const auto& post = lvl.theta_post;
    const std::size_t bins = pre.histogram.size();
    const double wpre = pre.max_theta > 0 ? pre.max_theta / bins : 1.0;
    const double wpost = post.max_theta > 0 ? post.max_theta / bins : 1.0;
    for (std::size_t b = 0; b < bins; ++b) {
      hf << b << ',' << b * wpre << ',' << pre.histogram[b] << ','
         << b * wpost << ',' << post.histogram[b] << "\n";
    }
  }

  // Top-grid CF splitting with coordinates for plotting, when available.
  if (!p.coords.empty() && !h.levels.empty() &&
      static_cast<index_t>(p.coords.size()) == p.n_nodes) {
    const Level& top = h.levels.front();
    std::vector<bool> converted(top.a.nrows(), false);
    for (index_t g : top.ddc_converted) converted[g] = true;
    std::ofstream cf(out_dir / "cf_points.csv");
    if (!cf) throw std::runtime_error("cannot write cf_points.csv");
    cf << "angle,x,y,state\n";
    const index_t blocks = top.a.nrows() / p.n_nodes;
    for (index_t ang = 0; ang < blocks; ++ang) {
      for (index_t i = 0; i < p.n_nodes; ++i) {
        const index_t g = ang * p.n_nodes + i;
        const char* state = converted[g]                           ? "C-ddc"
                            : top.labels.label[g] == CfLabel::C ? "C"
                                                                  : "F";
        cf << ang << ',' << p.coords[i][0] << ',' << p.coords[i][1] << ','
           << state << "\n";
      }
    }
  }

  PartitionState ps = replay_triggers(h, rc.ranks, rc.ratio_threshold);
  {
    std::ofstream pf(out_dir / "partition.json");
    if (!pf) throw std::runtime_error("cannot write partition.json");
    pf << partition_report(ps).dump(2) << "\n";
  }
  std::printf("report: %zu levels, max_theta pre=%.3g post=%.3g, %zu triggers\n",
              h.levels.size(),
              [&] {
                double m = 0;
                for (const auto& l : h.levels)
                  m = std::max(m, l.theta_pre.max_theta);
                return m;
              }(),
              max_theta(h),
              [&] {
                std::size_t t = 0;
                for (const auto& l : ps.levels) t += l.triggered;
                return t;
              }());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"airgraph: reduction multigrid solver for streaming transport"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;

  struct Tracked {
    CLI::Option* opt;
    std::function<void(RunConfig&, const RunConfig&)> copy;
  };
  std::vector<Tracked> tracked;
  auto track = [&tracked](CLI::Option* opt, auto member) {
    tracked.push_back({opt, [member](RunConfig& dst, const RunConfig& src) {
                         dst.*member = src.*member;
                       }});
    return opt;
  };

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run manifest");
    track(cmd->add_option("--out", flags.out, "output directory"),
          &RunConfig::out);
    track(cmd->add_option("--seed", flags.seed, "RNG seed"), &RunConfig::seed);
  };
  auto add_problem = [&](CLI::App* cmd) {
    track(cmd->add_option("--nx", flags.nx, "cells per side"), &RunConfig::nx);
    track(cmd->add_option("--jitter", flags.jitter, "node jitter in [0,0.3]"),
          &RunConfig::jitter);
  };
  auto add_setup = [&](CLI::App* cmd) {
    track(cmd->add_option("--problem", flags.problem, "problem directory"),
          &RunConfig::problem);
    track(cmd->add_option("--matrix", flags.matrix,
                          "bare Matrix Market operator (unit rhs)"),
          &RunConfig::matrix);
    track(cmd->add_option("--alpha", flags.alpha, "strength threshold"),
          &RunConfig::alpha);
    track(cmd->add_option("--cf", flags.cf,
                          "CF splitting: pmisr|pmisr-ddc|pmis|pmis-swap"),
          &RunConfig::cf);
    track(cmd->add_option("--ddc-fraction", flags.ddc_fraction,
                          "DDC conversion fraction"),
          &RunConfig::ddc_fraction);
    track(cmd->add_option("--max-loops", flags.max_loops, "PMISR sweep cap"),
          &RunConfig::max_loops);
    track(cmd->add_option("--poly-order", flags.poly_order,
                          "GMRES polynomial order"),
          &RunConfig::poly_order);
    track(cmd->add_option("--sparsity-order", flags.sparsity_order,
                          "fixed sparsity order"),
          &RunConfig::sparsity_order);
    track(cmd->add_option("--coarse-order", flags.coarse_order,
                          "coarse solver polynomial order"),
          &RunConfig::coarse_order);
    track(cmd->add_option("--coarse-its", flags.coarse_its,
                          "coarse Richardson iterations"),
          &RunConfig::coarse_its);
    track(cmd->add_option("--drop-coarse", flags.drop_coarse,
                          "relative drop on coarse matrices"),
          &RunConfig::drop_coarse);
    track(cmd->add_option("--drop-restrict", flags.drop_restrict,
                          "relative drop on the restrictor"),
          &RunConfig::drop_restrict);
    track(cmd->add_option("--truncate-size", flags.truncate_size,
                          "hierarchy truncation size"),
          &RunConfig::truncate_size);
  };

  CLI::App* generate = app.add_subcommand("generate", "generate a problem");
  add_common(generate);
  add_problem(generate);

  CLI::App* solve = app.add_subcommand("solve", "set up and solve");
  add_common(solve);
  add_setup(solve);
  track(solve->add_option("--rtol", flags.rtol, "relative tolerance"),
        &RunConfig::rtol);
  track(solve->add_option("--max-its", flags.max_its, "iteration cap"),
        &RunConfig::max_its);
  track(solve->add_option("--up-smooths", flags.up_smooths,
                          "up F-smooths per level"),
        &RunConfig::up_smooths);

  CLI::App* report = app.add_subcommand("report", "hierarchy diagnostics");
  add_common(report);
  add_setup(report);
  track(report->add_option("--ranks", flags.ranks, "simulated MPI ranks"),
        &RunConfig::ranks);
  track(report->add_option("--ratio-threshold", flags.ratio_threshold,
                           "repartition trigger threshold"),
        &RunConfig::ratio_threshold);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig rc;
    if (!config_path.empty()) rc = load_config_file(config_path);
    for (const Tracked& t : tracked)
      if (t.opt->count() > 0) t.copy(rc, flags);  // flags win over the manifest

    if (generate->parsed()) return cmd_generate(rc);
    if (solve->parsed()) return cmd_solve(rc);
    if (report->parsed()) return cmd_report(rc);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
}

}  // namespace airgraph
