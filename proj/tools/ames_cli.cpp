// Command-line driver: one solve per invocation, or a parameter sweep.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ames/ames.hpp"

namespace {

ames::SweepGrid parse_grid(const std::vector<std::string>& specs) {
  ames::SweepGrid grid;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ames::Error("--vary expects key=v1,v2,..., got '" + spec + "'");
    }
    std::vector<std::string> values;
    std::string rest = spec.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const auto item = rest.substr(start, comma == std::string::npos ? comma : comma - start);
      if (!item.empty()) values.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    grid.emplace_back(spec.substr(0, eq), std::move(values));
  }
  return grid;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ames::Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw ames::Error("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algebraic multilevel inverse-factorization preconditioner with restarted GMRES"};
  app.fallthrough();
  ames::RunConfig cfg;
  cfg.threads = ames::threads_from_env();
  std::string local = "ilu";
  bool left = false;
  bool no_fail = false;
  bool show_structure = false;

  app.add_option("--matrix", cfg.matrix_path, "Matrix Market file")->required()->check(CLI::ExistingFile);
  app.add_option("--p", cfg.p, "parts at the first reordering level")->capture_default_str();
  app.add_option("--nlev", cfg.n_lev, "reordering depth of the diagonal blocks")->capture_default_str();
  app.add_option("--nlevas", cfg.n_lev_as, "reordering depth of each Schur complement")->capture_default_str();
  app.add_option("--p-schur", cfg.p_schur, "parts per split inside Schur reorderings")->capture_default_str();
  app.add_option("--min-block", cfg.min_block_size, "blocks this small are not split")->capture_default_str();
  app.add_option("--local", local, "local solver")
      ->check(CLI::IsMember({"ilu", "fsai", "ainv", "exact"}))
      ->capture_default_str();
  app.add_option("--droptol", cfg.droptol, "absolute drop tolerance of local factorizations")->capture_default_str();
  app.add_option("--droptol-schur", cfg.droptol_schur, "absolute drop tolerance of Schur complements")->capture_default_str();
  app.add_option("--fsai-power", cfg.fsai_power, "FSAI pattern power (1 or 2)")->capture_default_str();
  app.add_flag("--overlap", cfg.overlap, "overlap the first reordering level");
  app.add_option("--restart", cfg.gmres.restart, "GMRES restart length")->capture_default_str();
  app.add_option("--maxmv", cfg.gmres.max_matvecs, "cap on products with A")->capture_default_str();
  app.add_option("--rtol", cfg.gmres.rtol, "relative residual target")->capture_default_str();
  app.add_flag("--left", left, "left preconditioning (default right)");
  app.add_option("--seed", cfg.seed, "partitioner seed")->capture_default_str();
  app.add_option("--out", cfg.output_path, "write the JSON report here instead of stdout");
  app.add_option("--partition-file", cfg.partition_file, "first-level part id per row")
      ->check(CLI::ExistingFile);
  app.add_flag("--no-fail-on-diverge", no_fail, "exit 0 whenever the report is written");
  app.add_flag("--structure", show_structure, "print the preconditioner tree to stderr");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid and print a table");
  std::vector<std::string> vary;
  sweep_cmd->add_option("--vary", vary, "key=v1,v2,... (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every usage error maps to the generic error code
    return app.exit(e) == 0 ? 0 : 2;
  }
  cfg.local_kind = ames::parse_local_kind(local);
  cfg.gmres.side = left ? ames::PrecondSide::Left : ames::PrecondSide::Right;

  try {
    if (*sweep_cmd) {
      const ames::SparseMatrix a = ames::read_matrix_market(cfg.matrix_path);
      const auto points = ames::sweep(a, cfg, parse_grid(vary), cfg.matrix_path);
      ames::write_sweep_table(std::cout, points);
      if (!cfg.output_path.empty()) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& pt : points) {
          nlohmann::json j = pt.report ? pt.report->to_json() : nlohmann::json{{"error", pt.error}};
          for (const auto& [k, v] : pt.settings) j["sweep"][k] = v;
          all.push_back(std::move(j));
        }
        write_json(all, cfg.output_path);
      }
      bool all_converged = true;
      for (const auto& pt : points) all_converged &= pt.report && pt.report->solve.converged;
      return (all_converged || no_fail) ? 0 : 1;
    }

    const ames::SparseMatrix a = ames::read_matrix_market(cfg.matrix_path);
    ames::RunArtifacts artifacts;
    const ames::RunReport rep = ames::run_system(a, cfg, cfg.matrix_path, &artifacts);
    if (show_structure && artifacts.preconditioner) {
      std::cerr << ames::dump_tree(artifacts.tree.root) << artifacts.preconditioner->dump();
    }
    write_json(rep.to_json(), cfg.output_path);
    if (!rep.solve.converged) {
      std::cerr << "GMRES did not converge: relative residual " << rep.solve.final_relative_residual
                << " after " << rep.solve.matvecs << " matrix-vector products\n";
    }
    return (rep.solve.converged || no_fail) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
