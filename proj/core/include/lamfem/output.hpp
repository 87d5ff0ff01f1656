#pragma once

#include <string>
#include <vector>

#include "lamfem/fem.hpp"

namespace lamfem {

// Per-element scalar fields attached to the VTK cell data.
struct CellFields {
  std::vector<double> classification;
  std::vector<double> von_mises;
  std::vector<double> eq_plastic_strain;
};

// Legacy ASCII VTK unstructured grid: quad cells, nodal displacement
// vectors, per-cell classification / von Mises stress / plastic strain.
void write_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& u_full,
               const CellFields& cells, const std::string& title = "lamfem");

// Load history: one row per committed increment with the Newton iteration
// count and the reaction on the requested face.
void write_history_csv(const std::string& path, const std::vector<StepRecord>& steps,
                       Face reaction_face);

struct ConvergenceRow {
  double h = 0.0;
  int ndof = 0;
  double error_L2_displacement = 0.0;
  double error_energy = 0.0;
  double wall_time = 0.0;
};

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

// Element classification dump: index pair, kind, phase-2 fraction, normal.
void write_classification_csv(const std::string& path, const Mesh& mesh,
                              const std::vector<ElementClassification>& cls);

} // namespace lamfem
