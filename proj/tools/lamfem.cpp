#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lamfem/config.hpp"
#include "lamfem/output.hpp"
#include "lamfem/run.hpp"
#include "lamfem/study.hpp"

namespace {

// Precedence for the output directory: --out beats LAMFEM_OUT_DIR beats the
// config file.
void apply_out_dir(lamfem::OutputConfig& out, const std::string& flag) {
  if (const char* env = std::getenv("LAMFEM_OUT_DIR"); env && *env) out.dir = env;
  if (!flag.empty()) out.dir = flag;
}

void apply_problem_overrides(lamfem::RunConfig& cfg, const std::string& method, int mesh_n) {
  if (!method.empty()) cfg.problem.method = lamfem::method_from_string(method);
  if (mesh_n > 0) {
    const lamfem::Mesh& m = cfg.problem.mesh;
    const double aspect = static_cast<double>(m.ny) / m.nx;
    const int ny = std::max(1, static_cast<int>(std::lround(mesh_n * aspect)));
    cfg.problem.mesh = lamfem::build_mesh(mesh_n, ny, m.box);
  }
}

int cmd_simulate(const std::string& config_path, const std::string& method, int mesh_n,
                 const std::string& out_dir) {
  lamfem::RunConfig cfg = lamfem::load_run_config(config_path);
  apply_problem_overrides(cfg, method, mesh_n);
  apply_out_dir(cfg.output, out_dir);

  const lamfem::RunSummary s = lamfem::run(cfg);
  std::cout << "method=" << s.method << " mesh=" << s.nx << "x" << s.ny
            << " steps=" << s.steps << " newton_iterations=" << s.newton_iterations
            << " energy=" << s.energy << " reaction=(" << s.reaction.x() << ", "
            << s.reaction.y() << ")\n";
  std::cout << "wrote " << s.summary_path << "\n";
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_dir) {
  lamfem::StudyConfig cfg = lamfem::load_study_config(config_path);
  apply_out_dir(cfg.base.output, out_dir);

  const auto results = lamfem::run_study(cfg);
  lamfem::write_study_csvs(cfg.base.output.dir, results);
  for (const lamfem::StudyResult& sr : results) {
    std::cout << "method " << lamfem::to_string(sr.method) << "\n";
    std::cout << "  h ndof error_L2_displacement error_energy wall_time\n";
    for (const lamfem::ConvergenceRow& r : sr.rows)
      std::cout << "  " << r.h << " " << r.ndof << " " << r.error_L2_displacement << " "
                << r.error_energy << " " << r.wall_time << "\n";
  }
  std::cout << "wrote study CSVs to " << cfg.base.output.dir << "\n";
  return 0;
}

int cmd_laminate_path(const std::string& config_path, const std::string& out_dir) {
  lamfem::PathConfig cfg = lamfem::load_path_config(config_path);
  apply_out_dir(cfg.output, out_dir);

  const auto pts = lamfem::run_laminate_path(cfg);
  std::filesystem::create_directories(cfg.output.dir);
  const std::string csv =
      (std::filesystem::path(cfg.output.dir) / (cfg.output.tag + "_path.csv")).string();
  lamfem::write_path_csv(csv, pts);

  const lamfem::PathPoint& last = pts.back();
  std::cout << "steps=" << pts.size() << " final c=(" << last.c.x() << ", " << last.c.y()
            << ", " << last.c.z() << ") W=" << last.W << "\n";
  std::cout << "wrote " << csv << "\n";
  return 0;
}

int cmd_classify(const std::string& config_path, int mesh_n, const std::string& out_dir) {
  lamfem::RunConfig cfg = lamfem::load_run_config(config_path);
  apply_problem_overrides(cfg, "", mesh_n);
  apply_out_dir(cfg.output, out_dir);
  if (!cfg.problem.level_set)
    throw lamfem::ConfigError("classify requires a level_set in the config");

  const lamfem::Mesh& mesh = cfg.problem.mesh;
  std::vector<lamfem::ElementClassification> cls(static_cast<std::size_t>(mesh.n_elements()));
  int n1 = 0, n2 = 0, ncut = 0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    cls[static_cast<std::size_t>(e)] = lamfem::classify_element(
        *cfg.problem.level_set, mesh.element_geometry(e), cfg.problem.n_sub);
    const auto& c = cls[static_cast<std::size_t>(e)];
    if (c.cut())
      ++ncut;
    else
      ++(c.phase() == 2 ? n2 : n1);
  }

  std::filesystem::create_directories(cfg.output.dir);
  const std::string csv =
      (std::filesystem::path(cfg.output.dir) / (cfg.output.tag + "_classification.csv"))
          .string();
  lamfem::write_classification_csv(csv, mesh, cls);

  std::cout << "elements=" << mesh.n_elements() << " phase1=" << n1 << " phase2=" << n2
            << " cut=" << ncut << "\n";
  std::cout << "wrote " << csv << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase finite elements on structured meshes with laminated cut elements"};
  app.require_subcommand(1);

  std::string config_path, method, out_dir;
  int mesh_n = 0;

  CLI::App* sim = app.add_subcommand("simulate", "Run a configured simulation");
  sim->add_option("--config", config_path, "JSON run configuration")->required();
  sim->add_option("--method", method, "Override the method (ela, gpla, let)");
  sim->add_option("--mesh", mesh_n, "Override the mesh resolution (elements along x)");
  sim->add_option("--out", out_dir, "Override the output directory");

  CLI::App* study = app.add_subcommand("study", "Run a mesh-refinement study");
  study->add_option("--config", config_path, "JSON study configuration")->required();
  study->add_option("--out", out_dir, "Override the output directory");

  CLI::App* path = app.add_subcommand("laminate-path", "Drive a single laminate point");
  path->add_option("--config", config_path, "JSON path configuration")->required();
  path->add_option("--out", out_dir, "Override the output directory");

  CLI::App* classify = app.add_subcommand("classify", "Dump the element classification");
  classify->add_option("--config", config_path, "JSON run configuration")->required();
  classify->add_option("--mesh", mesh_n, "Override the mesh resolution (elements along x)");
  classify->add_option("--out", out_dir, "Override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim)) return cmd_simulate(config_path, method, mesh_n, out_dir);
    if (app.got_subcommand(study)) return cmd_study(config_path, out_dir);
    if (app.got_subcommand(path)) return cmd_laminate_path(config_path, out_dir);
    if (app.got_subcommand(classify)) return cmd_classify(config_path, mesh_n, out_dir);
  } catch (const lamfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lamfem::MeshMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lamfem::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
