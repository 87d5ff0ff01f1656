#include "lamfem/run.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "lamfem/errors.hpp"
#include "lamfem/output.hpp"

namespace lamfem {

namespace {

const char* face_name(Face f) {
  switch (f) {
    case Face::Left: return "left";
    case Face::Right: return "right";
    case Face::Bottom: return "bottom";
    case Face::Top: return "top";
  }
  return "?";
}

void write_summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["method"] = s.method;
  j["mesh"] = {{"nx", s.nx}, {"ny", s.ny}};
  j["n_elements"] = s.n_elements;
  j["n_reduced_dofs"] = s.n_reduced_dofs;
  j["converged"] = true;  // divergence aborts the run before this is written
  j["steps"] = s.steps;
  j["newton_iterations"] = s.newton_iterations;
  j["final_lambda"] = s.final_lambda;
  j["energy"] = s.energy;
  j["reaction"] = {{"face", face_name(s.reaction_face)},
                   {"x", s.reaction.x()},
                   {"y", s.reaction.y()}};
  j["wall_time"] = s.wall_time;
  nlohmann::json outputs = nlohmann::json::object();
  if (!s.vtk_path.empty()) outputs["vtk"] = s.vtk_path;
  if (!s.history_path.empty()) outputs["history_csv"] = s.history_path;
  j["outputs"] = outputs;

  std::ofstream out(s.summary_path);
  if (!out) throw ConfigError("cannot open output file: " + s.summary_path);
  out << j.dump(2) << "\n";
}

} // namespace

RunSummary run(const RunConfig& cfg) {
  if (cfg.problem.dirichlet.empty() && !cfg.problem.periodic)
    throw ConfigError("no boundary conditions: the system would be singular");

  const auto t0 = std::chrono::steady_clock::now();
  FemSystem sys(cfg.problem);
  const Trajectory traj = run_load_steps(sys, cfg.schedule);
  const auto t1 = std::chrono::steady_clock::now();

  RunSummary s;
  s.method = to_string(cfg.problem.method);
  s.nx = sys.mesh().nx;
  s.ny = sys.mesh().ny;
  s.n_elements = sys.mesh().n_elements();
  s.n_reduced_dofs = sys.n_reduced();
  s.steps = static_cast<int>(traj.steps.size());
  for (const StepRecord& r : traj.steps) s.newton_iterations += r.iterations;
  s.final_lambda = traj.steps.empty() ? 0.0 : traj.steps.back().lambda;
  s.energy = sys.total_energy(traj.u, traj.states);
  s.reaction_face = cfg.output.reaction_face;
  if (!traj.steps.empty())
    s.reaction = traj.steps.back()
                     .face_reactions[static_cast<std::size_t>(cfg.output.reaction_face)];
  s.wall_time = std::chrono::duration<double>(t1 - t0).count();

  const std::filesystem::path dir(cfg.output.dir);
  std::filesystem::create_directories(dir);

  if (cfg.output.vtk) {
    CellFields cells{sys.classification_field(), sys.von_mises_field(traj.u, traj.states),
                     sys.plastic_strain_field(traj.states)};
    s.vtk_path = (dir / (cfg.output.tag + ".vtk")).string();
    write_vtk(s.vtk_path, sys.mesh(), traj.u, cells);
  }
  if (cfg.output.csv) {
    s.history_path = (dir / (cfg.output.tag + "_history.csv")).string();
    write_history_csv(s.history_path, traj.steps, cfg.output.reaction_face);
  }
  s.summary_path = (dir / (cfg.output.tag + "_summary.json")).string();
  write_summary_json(s);
  return s;
}

std::vector<PathPoint> run_laminate_path(const PathConfig& cfg) {
  std::vector<double> schedule;
  for (int k = 1; k <= cfg.n_steps; ++k)
    schedule.push_back(static_cast<double>(k) / cfg.n_steps);
  if (cfg.cycle)
    for (int k = cfg.n_steps - 1; k >= 0; --k)
      schedule.push_back(static_cast<double>(k) / cfg.n_steps);

  std::vector<PathPoint> pts;
  LaminateState state;
  int step = 0;
  for (const double lam : schedule) {
    Tensor2 F = Tensor2::Identity();
    F(cfg.row, cfg.col) += lam * cfg.amplitude;
    const LaminateResponse r = respond(F, cfg.laminate, state);
    state = r.state;
    pts.push_back({++step, lam, F, r.state.c, r.Pbar, r.W, r.iterations});
  }
  return pts;
}

void write_path_csv(const std::string& path, const std::vector<PathPoint>& pts) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << std::setprecision(17);
  out << "step,lambda,F11,F12,F21,F22,c1,c2,c3,P11,P12,P21,P22,P33,W,iterations\n";
  for (const PathPoint& p : pts)
    out << p.step << "," << p.lambda << "," << p.F(0, 0) << "," << p.F(0, 1) << ","
        << p.F(1, 0) << "," << p.F(1, 1) << "," << p.c.x() << "," << p.c.y() << ","
        << p.c.z() << "," << p.Pbar(0, 0) << "," << p.Pbar(0, 1) << "," << p.Pbar(1, 0)
        << "," << p.Pbar(1, 1) << "," << p.Pbar(2, 2) << "," << p.W << "," << p.iterations
        << "\n";
}

} // namespace lamfem
