#pragma once

#include <variant>

#include "lamfem/tensor.hpp"

namespace lamfem {

// sigma = lambda tr(e) I + 2 mu e with e = sym(F - I) - eigenstrain.
// Used both directly (small-strain runs) and as a finite-form P(F) so that
// every model goes through the same assembly path.
struct LinearElastic {
  double E = 1.0;
  double nu = 0.3;
  Tensor2 eigenstrain = Tensor2::Zero();

  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double mu() const { return E / (2.0 * (1.0 + nu)); }
};

// W = mu/2 (I1 - 3 - log I3) + lambda/4 (I3 - 1 - log I3), invariants of b_e.
struct NeoHookean {
  double mu = 1.0;
  double lambda = 1.0;
};

// Finite-strain J2 plasticity with linear isotropic hardening
// sigma_y(gamma) = sigma0 + hardening * gamma, elastic part as NeoHookean.
struct J2Plastic {
  double mu = 1.0;
  double lambda = 1.0;
  double sigma0 = 1.0;
  double hardening = 0.0;

  double yield_stress(double gamma) const { return sigma0 + hardening * gamma; }
};

using MaterialModel = std::variant<LinearElastic, NeoHookean, J2Plastic>;

// Internal state of a material point:
// { Cp^-1_11 - 1, Cp^-1_22 - 1, Cp^-1_33 - 1, Cp^-1_23, Cp^-1_13, Cp^-1_12, gamma }.
// Elastic models carry it along untouched (all zeros).
struct History {
  Eigen::Matrix<double, 7, 1> v = Eigen::Matrix<double, 7, 1>::Zero();

  static History virgin() { return {}; }

  double gamma() const { return v[6]; }

  Tensor2 cp_inverse() const {
    Tensor2 c;
    c << 1.0 + v[0], v[5], v[4],
         v[5], 1.0 + v[1], v[3],
         v[4], v[3], 1.0 + v[2];
    return c;
  }
};

// dh/dF with F flattened row-major (column f = 3i + j).
using Sensitivity79 = Eigen::Matrix<double, 7, 9>;

struct StateUpdateResult {
  History h;
  Tensor2 P = Tensor2::Zero();
  Sensitivity79 G = Sensitivity79::Zero();
  bool plastic = false;
  int iterations = 0;
};

// Free energy density at frozen internal state.
double energy(const MaterialModel& m, const Tensor2& F, const History& h);

// First Piola-Kirchhoff stress at frozen internal state.
Tensor2 piola_stress(const MaterialModel& m, const Tensor2& F, const History& h);

// Yield function evaluated at the elastic trial state (history frozen at h_n).
double trial_yield(const J2Plastic& m, const Tensor2& F, const History& hn);

// Residual of the exponential-map return mapping:
// { Z_11, Z_22, Z_33, Z_23, Z_13, Z_12, phi } with
// Z = F Cp^-1 - exp(-2 (gamma - gamma_n) n) F Cp_n^-1.
Eigen::Matrix<double, 7, 1> local_residual(const J2Plastic& m, const Tensor2& F,
                                           const History& h, const History& hn);

// Incremental constitutive update. Elastic trial branch returns h = h_n and
// G = 0; otherwise Newton on local_residual (tolerance 1e-12 on ||dh||,
// cap 50 iterations) followed by the implicit sensitivity
// G = -(dQ/dh)^-1 dQ/dF. Throws LocalDivergence at the iteration cap.
StateUpdateResult state_update(const MaterialModel& m, const Tensor2& F, const History& hn);

Tensor2 small_strain_stress(const LinearElastic& m, const Tensor2& eps);

// Algorithmic moduli dP/dF of the incremental map, including the implicit
// history dependence through G.
Tensor4 phase_tangent(const MaterialModel& m, const Tensor2& F, const StateUpdateResult& r);

inline bool is_linear_elastic(const MaterialModel& m) {
  return std::holds_alternative<LinearElastic>(m);
}

} // namespace lamfem
