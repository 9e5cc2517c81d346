#pragma once

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ames/ames_preconditioner.hpp"
#include "ames/gmres.hpp"
#include "ames/graph.hpp"
#include "ames/matrix_market.hpp"
#include "ames/overlap.hpp"
#include "ames/scaling.hpp"

namespace ames {

/// An error raised inside one pipeline phase ("read", "scale", "preorder", ...).
class PhaseError : public Error {
 public:
  PhaseError(std::string phase, const std::string& what)
      : Error("[" + phase + "] " + what), phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

struct RunConfig {
  std::string matrix_path;
  Index p = 4;             // parts at the first level
  Index n_lev = 2;         // depth of the reordering of the diagonal blocks
  Index n_lev_as = 0;      // depth of the reordering of each Schur complement
  Index p_schur = 2;       // parts per split inside Schur reorderings
  Index min_block_size = 16;
  double imbalance = 1.2;
  LocalKind local_kind = LocalKind::IluThreshold;
  double droptol = 0.01;
  double droptol_schur = 0.01;
  int fsai_power = 1;
  bool overlap = false;
  GmresConfig gmres;
  std::uint64_t seed = 0;
  std::string output_path;
  std::string partition_file;
  unsigned threads = 1;

  void validate() const {
    if (p < 1) throw Error("p must be at least 1");
    if (n_lev < 1) throw Error("nlev must be at least 1");
    if (p_schur < 2 && n_lev_as > 0) throw Error("Schur reordering needs at least 2 parts");
    if (min_block_size < 1) throw Error("min block size must be at least 1");
    if (droptol < 0.0 || droptol_schur < 0.0) throw Error("drop tolerances must be nonnegative");
    if (fsai_power != 1 && fsai_power != 2) throw Error("fsai power must be 1 or 2");
    gmres.validate();
  }

  TreeConfig tree_config() const { return {p, n_lev, min_block_size, imbalance}; }

  FactorizeConfig factorize_config() const {
    FactorizeConfig f;
    f.local_kind = local_kind;
    f.droptol_blocks.droptol = droptol;
    f.droptol_schur.droptol = droptol_schur;
    f.schur_tree = {p_schur, n_lev_as, min_block_size, imbalance};
    f.fsai_power = fsai_power;
    f.threads = threads;
    f.seed = seed;
    return f;
  }
};

struct RunReport {
  RunConfig config;
  std::string matrix_name;
  Index n = 0;
  Index nnz = 0;
  bool symmetric_pattern = false;

  GmresReport solve;
  double density_ratio = 0.0;
  Index preconditioner_nnz = 0;
  Index first_level_parts = 0;
  Index separator_size = 0;
  double size_b_over_size_s = 0.0;  // average first-level block size / Schur size
  Index tree_depth = 0;
  std::optional<OverlapStats> overlap;
  double t_p = 0.0, t_f = 0.0, t_s = 0.0;

  double max_abs_error = 0.0;  // against the exact solution of ones
  double original_relative_residual = 0.0;
  Vector solution;  // in the original unknowns; not serialized

  nlohmann::json to_json(bool with_timings = true) const {
    using nlohmann::json;
    json j;
    j["schema"] = 1;
    const auto& c = config;
    j["config"] = {
        {"matrix", c.matrix_path},
        {"p", c.p},
        {"nlev", c.n_lev},
        {"nlevas", c.n_lev_as},
        {"p_schur", c.p_schur},
        {"min_block_size", c.min_block_size},
        {"imbalance", c.imbalance},
        {"local", std::string(to_string(c.local_kind))},
        {"droptol", c.droptol},
        {"droptol_schur", c.droptol_schur},
        {"fsai_power", c.fsai_power},
        {"overlap", c.overlap},
        {"seed", c.seed},
        {"partition_file", c.partition_file},
        {"gmres",
         {{"restart", c.gmres.restart},
          {"max_matvecs", c.gmres.max_matvecs},
          {"rtol", c.gmres.rtol},
          {"side", c.gmres.side == PrecondSide::Right ? "right" : "left"},
          {"initial_guess", "zero"},
          {"rhs", "A*ones"}}},
    };
    j["matrix"] = {{"name", matrix_name}, {"n", n}, {"nnz", nnz},
                   {"symmetric_pattern", symmetric_pattern}};
    j["solve"] = {{"iterations", solve.iterations},
                  {"matvecs", solve.matvecs},
                  {"precond_applies", solve.precond_applies},
                  {"converged", solve.converged},
                  {"final_relative_residual", solve.final_relative_residual},
                  {"residual_history", solve.residual_history},
                  {"cycle_starts", solve.cycle_starts}};
    j["density_ratio"] = density_ratio;
    j["preconditioner_nnz"] = preconditioner_nnz;
    j["structure"] = {{"first_level_parts", first_level_parts},
                      {"separator_size", separator_size},
                      {"sizeB_over_sizeA_S", size_b_over_size_s},
                      {"tree_depth", tree_depth}};
    if (overlap) {
      j["overlap"] = {{"size_ratio", overlap->size_ratio},
                      {"nnz_ratio", overlap->nnz_ratio},
                      {"separator_before", overlap->separator_before},
                      {"separator_after", overlap->separator_after},
                      {"sp_f_before", overlap->sparsity_f_before},
                      {"sp_f_after", overlap->sparsity_f_after}};
    } else {
      j["overlap"] = nullptr;
    }
    if (with_timings) j["timings"] = {{"t_p", t_p}, {"t_f", t_f}, {"t_s", t_s}};
    j["solution"] = {{"max_abs_error_vs_ones", max_abs_error},
                     {"original_relative_residual", original_relative_residual}};
    return j;
  }
};

/// Everything built by one run, kept for inspection by callers and tests.
struct RunArtifacts {
  SparseMatrix system;  // scaled (and possibly overlapped) matrix in the root ordering
  std::optional<AmesPreconditioner> preconditioner;
  DissectionTree tree;
};

namespace detail {

template <class F>
auto in_phase(const char* phase, F&& f) {
  try {
    return f();
  } catch (const PhaseError&) {
    throw;
  } catch (const std::exception& e) {
    throw PhaseError(phase, e.what());
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Scale, preorder, (overlap), analyse, factorize, solve, restrict, unscale.
inline RunReport run_system(const SparseMatrix& a_in, const RunConfig& cfg,
                            const std::string& name = "", RunArtifacts* artifacts = nullptr) {
  detail::in_phase("config", [&] { cfg.validate(); return 0; });
  const SparseMatrix a = a_in.with_layout(Layout::Row);
  if (!a.square()) throw PhaseError("read", "matrix must be square");
  RunReport rep;
  rep.config = cfg;
  rep.matrix_name = name;
  rep.n = a.rows();
  rep.nnz = a.nnz();
  rep.symmetric_pattern = structurally_symmetric(a);

  const Vector b = make_rhs(a);
  const ScaledSystem scaled = detail::in_phase("scale", [&] { return scale_system(a, b); });

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  std::optional<OverlappedSystem> ov;
  PartitionResult forced;
  DissectionTree tree = detail::in_phase("preorder", [&] {
    const AdjacencyGraph g = build_adjacency(scaled.matrix, true);
    PartitionResult pr;
    if (!cfg.partition_file.empty()) {
      auto part_of = read_partition_file(cfg.partition_file, g.size());
      const Index parts = count_parts(part_of);
      pr = classify_partition(g, std::move(part_of), parts);
    } else {
      PartitionOptions opt;
      opt.imbalance = cfg.imbalance;
      pr = partition_graph(g, std::min<Index>(cfg.p, std::max<Index>(g.size(), 1)), cfg.seed, opt);
    }
    if (cfg.overlap) {
      ov = build_overlapped(scaled.matrix, scaled.rhs, pr);
      rep.overlap = overlap_stats(scaled.matrix, pr, *ov);
      forced = ov->block_partition();
      return build_tree(ov->matrix, cfg.tree_config(), cfg.seed, &forced);
    }
    forced = pr;
    return build_tree(scaled.matrix, cfg.tree_config(), cfg.seed, &forced);
  });
  const SparseMatrix& base = ov ? ov->matrix : scaled.matrix;
  const Vector& base_rhs = ov ? ov->rhs : scaled.rhs;
  SparseMatrix system = permute(base, tree.permutation);
  rep.t_p = detail::seconds_since(t0);

  t0 = clock::now();
  AmesPreconditioner m =
      detail::in_phase("factorize", [&] { return factorize(tree.root, cfg.factorize_config()); });
  rep.t_f = detail::seconds_since(t0);

  t0 = clock::now();
  GmresResult sol = detail::in_phase("solve", [&] {
    const Vector rhs = tree.permutation.to_new(base_rhs);
    LinearOperator op = matrix_operator(system);
    LinearOperator pre = [&m](std::span<const double> in, std::span<double> out) {
      m.apply(in, out);
    };
    return gmres(op, rhs, &pre, cfg.gmres);
  });
  rep.t_s = detail::seconds_since(t0);
  rep.solve = sol.report;

  const Vector x_base = tree.permutation.to_old(sol.x);
  const Vector y = ov ? restrict_solution(x_base, ov->map) : x_base;
  rep.solution = unscale_solution(y, scaled.scaling);

  rep.preconditioner_nnz = m.stored_nnz();
  rep.density_ratio = density_ratio(m, a);
  rep.tree_depth = depth(tree.root);
  if (!tree.root.is_leaf()) {
    rep.first_level_parts = tree.root.children.size();
    rep.separator_size = tree.root.separator_size();
    const double avg = static_cast<double>(tree.root.size - rep.separator_size) /
                       static_cast<double>(rep.first_level_parts);
    rep.size_b_over_size_s =
        rep.separator_size ? avg / static_cast<double>(rep.separator_size) : 0.0;
  } else {
    rep.first_level_parts = 1;
  }
  for (double v : rep.solution) rep.max_abs_error = std::max(rep.max_abs_error, std::abs(v - 1.0));
  Vector r = spmv(a, rep.solution);
  for (Index i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double bn = norm2(b);
  rep.original_relative_residual = bn > 0.0 ? norm2(r) / bn : norm2(r);

  if (artifacts) {
    artifacts->system = std::move(system);
    artifacts->preconditioner.emplace(std::move(m));
    artifacts->tree = std::move(tree);
  }
  return rep;
}

inline RunReport run(const RunConfig& cfg) {
  const SparseMatrix a =
      detail::in_phase("read", [&] { return read_matrix_market(cfg.matrix_path); });
  return run_system(a, cfg, cfg.matrix_path);
}

/// Sets one parameter by its CLI name (without leading dashes).
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_index = [&] { return static_cast<Index>(std::stoull(value)); };
  if (key == "p") cfg.p = as_index();
  else if (key == "nlev") cfg.n_lev = as_index();
  else if (key == "nlevas") cfg.n_lev_as = as_index();
  else if (key == "p-schur") cfg.p_schur = as_index();
  else if (key == "min-block") cfg.min_block_size = as_index();
  else if (key == "local") cfg.local_kind = parse_local_kind(value);
  else if (key == "droptol") cfg.droptol = std::stod(value);
  else if (key == "droptol-schur") cfg.droptol_schur = std::stod(value);
  else if (key == "fsai-power") cfg.fsai_power = std::stoi(value);
  else if (key == "overlap") cfg.overlap = value == "1" || value == "true" || value == "on";
  else if (key == "restart") cfg.gmres.restart = as_index();
  else if (key == "maxmv") cfg.gmres.max_matvecs = as_index();
  else if (key == "rtol") cfg.gmres.rtol = std::stod(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else throw Error("unknown sweep parameter '" + key + "'");
}

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> settings;
  std::optional<RunReport> report;
  std::string error;  // non-empty when the point failed
};

using SweepGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Runs the cartesian product of `grid` on one matrix. Failing points are
/// recorded and the sweep continues.
inline std::vector<SweepPoint> sweep(const SparseMatrix& a, const RunConfig& base,
                                     const SweepGrid& grid, const std::string& name = "") {
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw Error("sweep: no values for '" + key + "'");
  }
  std::vector<SweepPoint> out;
  std::vector<Index> pos(grid.size(), 0);
  while (true) {
    SweepPoint pt;
    RunConfig cfg = base;
    try {
      for (Index k = 0; k < grid.size(); ++k) {
        pt.settings.emplace_back(grid[k].first, grid[k].second[pos[k]]);
        apply_setting(cfg, grid[k].first, grid[k].second[pos[k]]);
      }
      pt.report = run_system(a, cfg, name);
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
    Index k = grid.size();
    while (k-- > 0) {
      if (++pos[k] < grid[k].second.size()) break;
      pos[k] = 0;
    }
    if (k == static_cast<Index>(-1)) break;
  }
  return out;
}

/// Aligned text table: one row per point with Its, density and phase timings.
inline void write_sweep_table(std::ostream& os, const std::vector<SweepPoint>& pts) {
  if (pts.empty()) return;
  std::vector<std::string> head;
  for (const auto& s : pts.front().settings) head.push_back(s.first);
  for (const char* h : {"Its", "conv", "density", "sizeB/sizeA_S", "t_p", "t_f", "t_s"}) {
    head.emplace_back(h);
  }
  std::vector<std::vector<std::string>> rows;
  auto fmt = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  for (const auto& pt : pts) {
    std::vector<std::string> row;
    for (const auto& s : pt.settings) row.push_back(s.second);
    if (pt.report) {
      const auto& r = *pt.report;
      row.push_back(std::to_string(r.solve.iterations));
      row.push_back(r.solve.converged ? "yes" : "no");
      row.push_back(fmt(r.density_ratio, 3));
      row.push_back(fmt(r.size_b_over_size_s, 3));
      row.push_back(fmt(r.t_p, 3));
      row.push_back(fmt(r.t_f, 3));
      row.push_back(fmt(r.t_s, 3));
    } else {
      row.push_back("error: " + pt.error);
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (Index c = 0; c < head.size(); ++c) width[c] = head[c].size();
  for (const auto& row : rows) {
    for (Index c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (Index c = 0; c < cells.size(); ++c) {
      if (c) os << "  ";
      if (c < width.size()) {
        os << std::setw(static_cast<int>(width[c])) << cells[c];
      } else {
        os << cells[c];
      }
    }
    os << '\n';
  };
  line(head);
  for (const auto& row : rows) line(row);
}

}  // namespace ames
