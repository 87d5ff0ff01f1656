#pragma once

#include <string>
#include <vector>

#include "lamfem/config.hpp"

namespace lamfem {

struct RunSummary {
  std::string method;
  int nx = 0, ny = 0;
  int n_elements = 0;
  int n_reduced_dofs = 0;
  int steps = 0;
  int newton_iterations = 0;  // summed over all committed increments
  double final_lambda = 0.0;
  double energy = 0.0;
  Eigen::Vector2d reaction = Eigen::Vector2d::Zero();
  Face reaction_face = Face::Right;
  double wall_time = 0.0;
  std::string vtk_path;      // empty when not written
  std::string history_path;
  std::string summary_path;
};

// Execute a configured simulation and write the requested outputs
// (<dir>/<tag>.vtk, <dir>/<tag>_history.csv, <dir>/<tag>_summary.json).
RunSummary run(const RunConfig& cfg);

// Single-point laminate driver: one deformation-gradient component ramped
// over a schedule, response recorded per step.
struct PathPoint {
  int step = 0;
  double lambda = 0.0;
  Tensor2 F = Tensor2::Identity();
  Vector3 c = Vector3::Zero();
  Tensor2 Pbar = Tensor2::Zero();
  double W = 0.0;
  int iterations = 0;
};

std::vector<PathPoint> run_laminate_path(const PathConfig& cfg);
void write_path_csv(const std::string& path, const std::vector<PathPoint>& pts);

} // namespace lamfem
