#pragma once

#include <vector>

#include "lamfem/material.hpp"
#include "lamfem/tensor.hpp"

namespace lamfem {

// Two-phase simple laminate at a material point. N is the unit interface
// normal in the reference configuration, pointing from phase 1 into phase 2;
// eta is the phase-2 volume fraction.
struct LaminateConfig {
  double eta = 0.5;
  Vector3 N = Vector3::UnitX();
  MaterialModel phase1;
  MaterialModel phase2;
};

struct LaminateState {
  Vector3 c = Vector3::Zero();
  History h1;
  History h2;
};

struct LaminateResponse {
  Tensor2 Pbar = Tensor2::Zero();
  Tensor4 L;  // algorithmic tangent dPbar/dFbar
  LaminateState state;
  double W = 0.0;
  int iterations = 0;
};

struct SolveTrace {
  std::vector<double> residual_norms;  // per accepted Newton iterate
  int backtracks = 0;
};

// F1 = Fbar - eta c x N, F2 = Fbar + (1 - eta) c x N, so that
// (1 - eta) F1 + eta F2 = Fbar and F2 - F1 = c x N identically.
std::pair<Tensor2, Tensor2> local_gradients(const Tensor2& Fbar, const Vector3& c,
                                            const LaminateConfig& cfg);

// R = (P2 - P1) N with P_i from state_update at F_i(c); the updated phase
// histories are written to h1, h2.
Vector3 traction_residual(const Tensor2& Fbar, const Vector3& c, const LaminateConfig& cfg,
                          History& h1, History& h2, const History& h1n, const History& h2n);

// Newton solve of R(c) = 0 with backtracking line search, warm-started from
// state_n.c. Tolerance 1e-10 relative to max phase shear modulus; 30
// iterations; 10 halvings. Throws InterfaceDivergence when exhausted.
LaminateState solve_c(const Tensor2& Fbar, const LaminateConfig& cfg,
                      const LaminateState& state_n, SolveTrace* trace = nullptr);

// Full incremental laminate response: jump solve, averaged stress and energy,
// consistent tangent including dc/dFbar. eta outside [1e-6, 1 - 1e-6]
// degenerates to the corresponding single-phase response.
LaminateResponse respond(const Tensor2& Fbar, const LaminateConfig& cfg,
                         const LaminateState& state_n);

// FD gradient of the averaged energy w.r.t. c minus eta (1 - eta) (P2 - P1) N.
// Should vanish for hyperelastic phases; test instrumentation.
Vector3 stationarity_check(const Tensor2& Fbar, const Vector3& c, const LaminateConfig& cfg);

struct SmallStrainLaminateResponse {
  Tensor2 sigma = Tensor2::Zero();
  Tensor4 C;
  Vector3 c = Vector3::Zero();
};

// Linear-elastic variant: the traction residual is affine in c, so the jump
// follows from one 3x3 solve and the tangent is constant. Throws
// SingularAcousticTensor when the system is singular.
SmallStrainLaminateResponse respond_small_strain(const Tensor2& epsbar,
                                                 const LaminateConfig& cfg);

// ac(A, N)_mk = A_mjkq N_j N_q
Eigen::Matrix3d acoustic(const Tensor4& A, const Vector3& N);

double shear_modulus(const MaterialModel& m);

} // namespace lamfem
