#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "lamfem/classify.hpp"
#include "lamfem/laminate.hpp"
#include "lamfem/material.hpp"
#include "lamfem/mesh.hpp"

namespace lamfem {

enum class MethodKind { ELA, GPLA, LET };

enum class Face { Left = 0, Right = 1, Bottom = 2, Top = 3 };

// Prescribed displacement on a node region, scaled by the load factor.
// A null value function means zero displacement.
struct DirichletBC {
  enum class Region { Left, Right, Bottom, Top, Boundary };
  Region region = Region::Boundary;
  bool fix_x = true;
  bool fix_y = true;
  std::function<Eigen::Vector2d(double, double)> value;  // u(x, y) at load factor 1
};

// Ties right to left and top to bottom with the affine offset
// u_slave - u_master = macro (X_slave - X_master); the lower-left corner node
// is pinned to macro X to remove the translation.
struct PeriodicBC {
  Eigen::Matrix2d macro = Eigen::Matrix2d::Zero();  // displacement gradient at load factor 1
};

struct Problem {
  Mesh mesh;
  MethodKind method = MethodKind::LET;
  MaterialModel phase1;
  MaterialModel phase2;
  LevelSetPtr level_set;  // null means homogeneous phase 1
  int n_sub = 32;
  std::vector<DirichletBC> dirichlet;
  std::optional<PeriodicBC> periodic;
  double tol_newton = 1e-10;  // relative to the first residual of the step
  int max_newton_iter = 15;
  int max_halvings = 8;
};

// Committed per-Gauss-point state. Pure points use the history matching
// their phase; laminate points use all three fields.
struct GPState {
  History h1;
  History h2;
  Vector3 c = Vector3::Zero();
};

struct NewtonResult {
  Eigen::VectorXd u_red;
  std::vector<GPState> states;
  std::vector<double> residual_norms;  // per iteration, starting with the initial one
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd f_int;  // full internal force at the converged state
};

struct StepRecord {
  double lambda = 0.0;
  int iterations = 0;
  std::vector<double> residual_norms;
  std::array<Eigen::Vector2d, 4> face_reactions{};  // indexed by Face
};

struct Trajectory {
  Eigen::VectorXd u;            // full nodal displacement at the final state
  std::vector<GPState> states;  // committed Gauss-point states
  std::vector<StepRecord> steps;
};

// Assembled problem: classifications, constraint maps, and the
// material-dispatch machinery shared by all solves.
class FemSystem {
public:
  explicit FemSystem(Problem p);

  const Problem& problem() const { return p_; }
  const Mesh& mesh() const { return p_.mesh; }

  // LET-style geometric classification of every element (also what the
  // classify CLI dumps); ELA/GPLA hold their own per-point assignments.
  const std::vector<ElementClassification>& classifications() const { return cls_; }

  int n_reduced() const { return n_red_; }
  int n_gauss() const { return 4 * p_.mesh.n_elements(); }
  std::vector<GPState> virgin_states() const;

  Eigen::VectorXd full_displacement(const Eigen::VectorXd& u_red, double lambda) const;

  // Element integration: internal force, consistent stiffness, updated
  // Gauss states for the element's four points.
  void element_force_and_stiffness(int e, const Eigen::Matrix<double, 8, 1>& ue,
                                   const GPState* states_n,
                                   Eigen::Matrix<double, 8, 1>& fe,
                                   Eigen::Matrix<double, 8, 8>& Ke,
                                   GPState* states_new) const;

  // Full internal force and reduced tangent at fixed nodal displacement.
  void assemble(const Eigen::VectorXd& u_full, const std::vector<GPState>& states_n,
                std::vector<GPState>& states_new, Eigen::VectorXd& f_int,
                Eigen::SparseMatrix<double>* K_red) const;

  Eigen::VectorXd reduce(const Eigen::VectorXd& f_full) const;

  // Sum of internal forces on the nodes of a face: the reaction transmitted
  // through the supports there.
  Eigen::Vector2d face_reaction(const Eigen::VectorXd& f_int, Face f) const;

  // Per-element scalar fields for output, evaluated at the committed state.
  // classification: phase index, or 1 + eta on cut elements (LET).
  std::vector<double> classification_field() const;
  std::vector<double> von_mises_field(const Eigen::VectorXd& u_full,
                                      const std::vector<GPState>& states) const;
  std::vector<double> plastic_strain_field(const std::vector<GPState>& states) const;

  // Total strain energy of the current state.
  double total_energy(const Eigen::VectorXd& u_full, const std::vector<GPState>& states_n) const;

  bool symmetric_tangent() const { return symmetric_; }

private:
  struct GPData {
    Eigen::Matrix<double, 4, 2> dNdX;  // shape gradients at this Gauss point
  };

  void build_constraints();
  void classify_all();

  Problem p_;
  std::vector<ElementClassification> cls_;
  std::vector<int> ela_phase_;
  std::vector<std::array<int, 4>> gpla_phase_;

  // dof -> reduced index (-1 if eliminated); affine offset at load factor 1.
  std::vector<int> red_index_;
  std::vector<double> offset_;
  int n_red_ = 0;
  bool symmetric_ = false;

  std::array<GPData, 4> gp_;
  double wdetJ_ = 0.0;
};

// Newton iteration at fixed load factor. tangent_scale != 1 deliberately
// mis-scales the stiffness (diagnostic for convergence-order tests).
NewtonResult newton_solve(const FemSystem& sys, double lambda,
                          const Eigen::VectorXd& u_red0, const std::vector<GPState>& states_n,
                          double tangent_scale = 1.0);

// Incremental driver over a schedule of load factors (need not be monotone).
// A failing increment is halved up to max_halvings times before
// GlobalDivergence is thrown.
Trajectory run_load_steps(const FemSystem& sys, const std::vector<double>& lambdas);

} // namespace lamfem
