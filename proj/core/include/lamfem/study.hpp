#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lamfem/config.hpp"
#include "lamfem/output.hpp"

namespace lamfem {

using DisplacementField = std::function<Eigen::Vector2d(double, double)>;

// Exact two-phase solution for a plane interface: continuous displacement
// with uniform strain on each side, traction continuity across the
// interface, eps1 the prescribed phase-1 strain.
struct PlanarTwoPhaseSolution {
  DisplacementField u;
  Vector3 c = Vector3::Zero();   // gradient jump, grad u_2 - grad u_1 = c x N
  double energy_density_1 = 0.0; // per unit area
  double energy_density_2 = 0.0;
};

PlanarTwoPhaseSolution planar_two_phase_solution(const LinearElastic& m1,
                                                 const LinearElastic& m2,
                                                 const PlaneGeometry& plane,
                                                 const Tensor2& eps1);

// Stress-free transformation field u = s a max(N . (x - p), 0); the matching
// phase-2 eigenstrain is sym(s a x N).
DisplacementField eigenstrain_step_field(const PlaneGeometry& plane,
                                         const Eigen::Vector2d& a, double s);
Tensor2 matching_eigenstrain(const PlaneGeometry& plane, const Eigen::Vector2d& a, double s);

// Relative L2 distance between the discrete solution and the nodal
// interpolant of the reference field, by element Gauss quadrature. A method
// that is nodally exact scores machine zero here even when the reference
// kinks inside elements.
double l2_error(const Mesh& mesh, const Eigen::VectorXd& u_full, const DisplacementField& ref);

// Relative L2 distance against a solution on a nested finer mesh, evaluated
// at the fine mesh's Gauss points. Throws MeshMismatch unless the boxes
// coincide and the fine resolution is an integer multiple per axis.
double l2_error(const Mesh& coarse, const Eigen::VectorXd& u_coarse, const Mesh& fine,
                const Eigen::VectorXd& u_fine);

struct StudyResult {
  MethodKind method = MethodKind::LET;
  std::vector<ConvergenceRow> rows;
};

// Mesh-refinement sweep per method against the configured reference.
// Analytic references override the boundary conditions with the exact field;
// the overkill reference reuses the configured problem on the fine mesh.
std::vector<StudyResult> run_study(const StudyConfig& cfg);

// One CSV per method: <dir>/study_<method>.csv.
void write_study_csvs(const std::string& dir, const std::vector<StudyResult>& results);

} // namespace lamfem
