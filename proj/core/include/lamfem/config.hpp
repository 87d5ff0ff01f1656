#pragma once

#include <string>
#include <vector>

#include "lamfem/fem.hpp"
#include "lamfem/laminate.hpp"

namespace lamfem {

struct OutputConfig {
  std::string dir = "out";
  std::string tag = "run";
  bool vtk = true;
  bool csv = true;
  Face reaction_face = Face::Right;
};

// A fully resolved simulation: the assembled problem definition, the load
// schedule, and where the results go.
struct RunConfig {
  Problem problem;
  std::vector<double> schedule = {1.0};
  OutputConfig output;
};

// Reference solution a convergence study measures against.
struct ReferenceSpec {
  enum class Kind {
    AnalyticPlanar,      // piecewise-affine two-phase field, plane interface
    AnalyticEigenstrain, // stress-free transformation field, plane interface
    Overkill,            // LET solution on a much finer mesh
  };
  Kind kind = Kind::Overkill;
  int nx = 0;                            // overkill resolution
  Tensor2 strain = Tensor2::Zero();      // phase-1 strain (analytic planar)
  Eigen::Vector2d direction{1.0, 0.0};   // transformation direction (eigenstrain)
  double magnitude = 0.0;                // transformation magnitude (eigenstrain)
};

struct StudyConfig {
  RunConfig base;
  std::vector<int> resolutions;
  std::vector<MethodKind> methods = {MethodKind::ELA, MethodKind::GPLA, MethodKind::LET};
  ReferenceSpec reference;
};

// Single laminate point driven along one deformation-gradient component.
struct PathConfig {
  LaminateConfig laminate;
  int row = 0, col = 1;      // driven F component
  double amplitude = 0.05;
  int n_steps = 20;
  bool cycle = false;
  OutputConfig output;
};

// Strict parsers: unknown keys are rejected with the offending field named,
// wrong types and malformed values throw ConfigError. Sampled level-set file
// paths resolve relative to base_dir.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".");
StudyConfig parse_study_config(const std::string& json_text, const std::string& base_dir = ".");
PathConfig parse_path_config(const std::string& json_text, const std::string& base_dir = ".");

RunConfig load_run_config(const std::string& path);
StudyConfig load_study_config(const std::string& path);
PathConfig load_path_config(const std::string& path);

MethodKind method_from_string(const std::string& s);
std::string to_string(MethodKind m);
Face face_from_string(const std::string& s);

} // namespace lamfem
