#pragma once

// Shared test instrumentation: deterministic random state/material
// generators, finite-difference derivative helpers, and independent
// constitutive oracles. Everything here is deliberately written from the
// public tensor primitives only, so the oracles do not share code with the
// implementation paths they check.

#include <cmath>
#include <random>
#include <vector>

#include "lamfem/laminate.hpp"
#include "lamfem/material.hpp"
#include "lamfem/tensor.hpp"

namespace lamfem::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector3 random_unit(Rng& rng) {
  Vector3 v;
  do {
    for (int i = 0; i < 3; ++i) v[i] = uniform(rng, -1.0, 1.0);
  } while (v.norm() < 0.1);
  return v.normalized();
}

// In-plane unit normal (N3 = 0), the form the mesh classification produces.
inline Vector3 random_unit_inplane(Rng& rng) {
  Eigen::Vector2d v;
  do {
    v = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
  } while (v.norm() < 0.1);
  v.normalize();
  return {v.x(), v.y(), 0.0};
}

inline Tensor2 random_tensor(Rng& rng, double scale) {
  Tensor2 d;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d(i, j) = uniform(rng, -scale, scale);
  return d;
}

inline Tensor2 random_symmetric(Rng& rng, double scale) {
  return sym(random_tensor(rng, scale));
}

// Deformation gradient within `scale` of identity; small enough scales keep
// both laminate phase gradients invertible for any eta.
inline Tensor2 random_deformation(Rng& rng, double scale) {
  return Tensor2::Identity() + random_tensor(rng, scale);
}

inline Tensor2 random_rotation(Rng& rng) {
  const Vector3 axis = random_unit(rng);
  const double angle = uniform(rng, -3.0, 3.0);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline LinearElastic random_linear_elastic(Rng& rng) {
  LinearElastic m;
  m.E = uniform(rng, 0.5, 5.0);
  m.nu = uniform(rng, 0.05, 0.45);
  return m;
}

inline NeoHookean random_neo_hookean(Rng& rng) {
  NeoHookean m;
  m.mu = uniform(rng, 0.5, 4.0);
  m.lambda = uniform(rng, 0.5, 8.0);
  return m;
}

inline J2Plastic random_j2(Rng& rng) {
  J2Plastic m;
  m.mu = uniform(rng, 0.5, 4.0);
  m.lambda = uniform(rng, 0.5, 8.0);
  m.sigma0 = m.mu * uniform(rng, 0.02, 0.2);
  m.hardening = m.mu * uniform(rng, 0.0, 0.5);
  return m;
}

inline MaterialModel random_hyperelastic(Rng& rng) {
  if (uniform(rng, 0.0, 1.0) < 0.5) return random_linear_elastic(rng);
  return random_neo_hookean(rng);
}

inline MaterialModel random_material(Rng& rng) {
  const double u = uniform(rng, 0.0, 1.0);
  if (u < 1.0 / 3.0) return random_linear_elastic(rng);
  if (u < 2.0 / 3.0) return random_neo_hookean(rng);
  return random_j2(rng);
}

// Central finite difference of a scalar function of a second-order tensor.
template <typename F>
Tensor2 fd_gradient(const F& f, const Tensor2& X, double delta) {
  Tensor2 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Tensor2 Xp = X, Xm = X;
      Xp(i, j) += delta;
      Xm(i, j) -= delta;
      g(i, j) = (f(Xp) - f(Xm)) / (2.0 * delta);
    }
  return g;
}

// Central finite difference of a tensor-valued function of a tensor.
template <typename F>
Tensor4 fd_tangent(const F& f, const Tensor2& X, double delta) {
  Tensor4 T;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      Tensor2 Xp = X, Xm = X;
      Xp(k, l) += delta;
      Xm(k, l) -= delta;
      const Tensor2 d = (f(Xp) - f(Xm)) / (2.0 * delta);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) T(i, j, k, l) = d(i, j);
    }
  return T;
}

// Central finite difference of a scalar function of a 3-vector.
template <typename F>
Vector3 fd_gradient_vec(const F& f, const Vector3& x, double delta) {
  Vector3 g;
  for (int k = 0; k < 3; ++k) {
    Vector3 xp = x, xm = x;
    xp[k] += delta;
    xm[k] -= delta;
    g[k] = (f(xp) - f(xm)) / (2.0 * delta);
  }
  return g;
}

inline double max_abs_diff(const Tensor4& a, const Tensor4& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          m = std::max(m, std::abs(a(i, j, k, l) - b(i, j, k, l)));
  return m;
}

// ---------------------------------------------------------------------------
// Independent return-mapping oracle: the same defining equations transcribed
// from the public tensor primitives (sym_exp, dev, inv) and solved by a plain
// damped dense Newton with a central-difference Jacobian. No dual numbers, no
// predictor, no shared code with state_update.

struct OracleUpdate {
  History h;
  Tensor2 P = Tensor2::Zero();
  bool plastic = false;
  bool converged = true;
};

inline Tensor2 oracle_cp_inverse(const Eigen::Matrix<double, 7, 1>& h) {
  Tensor2 c;
  c << 1.0 + h[0], h[5], h[4],
       h[5], 1.0 + h[1], h[3],
       h[4], h[3], 1.0 + h[2];
  return c;
}

inline Tensor2 oracle_kirchhoff(const J2Plastic& m, const Tensor2& be) {
  return m.mu * (be - Tensor2::Identity())
       + 0.5 * m.lambda * (det(be) - 1.0) * Tensor2::Identity();
}

inline Eigen::Matrix<double, 7, 1> oracle_residual(const J2Plastic& m, const Tensor2& F,
                                                   const Eigen::Matrix<double, 7, 1>& h,
                                                   const Eigen::Matrix<double, 7, 1>& hn) {
  const Tensor2 cpi = oracle_cp_inverse(h);
  const Tensor2 cpin = oracle_cp_inverse(hn);
  const Tensor2 be = F * cpi * F.transpose();
  const Tensor2 taud = dev(oracle_kirchhoff(m, be));
  const double j2 = 1.5 * ddot(taud, taud);

  Tensor2 nflow = Tensor2::Zero();
  double phi = -m.yield_stress(0.0);
  if (j2 > 1e-300) {
    const double norm = std::sqrt(j2);
    phi = norm - m.sigma0 - m.hardening * h[6];
    nflow = (1.5 / norm) * taud;
  }

  const Tensor2 E = sym_exp(-2.0 * (h[6] - hn[6]) * nflow);
  const Tensor2 Z = F * cpi - E * F * cpin;
  Eigen::Matrix<double, 7, 1> q;
  q << Z(0, 0), Z(1, 1), Z(2, 2), Z(1, 2), Z(0, 2), Z(0, 1), phi;
  return q;
}

inline Tensor2 oracle_piola(const J2Plastic& m, const Tensor2& F,
                            const Eigen::Matrix<double, 7, 1>& h) {
  const Tensor2 cpi = oracle_cp_inverse(h);
  const Tensor2 be = F * cpi * F.transpose();
  const Tensor2 bei = inv(be);
  const Tensor2 S = 0.5 * m.mu * (Tensor2::Identity() - bei)
                  + 0.25 * m.lambda * (det(be) - 1.0) * bei;
  return 2.0 * S * F * cpi;
}

inline OracleUpdate oracle_state_update(const J2Plastic& m, const Tensor2& F,
                                        const History& hn) {
  OracleUpdate out;
  if (trial_yield(m, F, hn) < 0.0) {
    out.h = hn;
    out.P = oracle_piola(m, F, hn.v);
    return out;
  }

  Eigen::Matrix<double, 7, 1> h = hn.v;
  Eigen::Matrix<double, 7, 1> q = oracle_residual(m, F, h, hn.v);
  const double qscale = F.norm() + m.sigma0;

  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    if (q.norm() <= 1e-13 * qscale) {
      converged = true;
      break;
    }
    Eigen::Matrix<double, 7, 7> J;
    for (int k = 0; k < 7; ++k) {
      const double d = 1e-7 * std::max(1.0, std::abs(h[k]));
      Eigen::Matrix<double, 7, 1> hp = h, hm = h;
      hp[k] += d;
      hm[k] -= d;
      J.col(k) = (oracle_residual(m, F, hp, hn.v) - oracle_residual(m, F, hm, hn.v))
               / (2.0 * d);
    }
    const Eigen::Matrix<double, 7, 1> dh = J.fullPivLu().solve(-q);
    double s = 1.0;
    Eigen::Matrix<double, 7, 1> ht = h + dh;
    Eigen::Matrix<double, 7, 1> qt = oracle_residual(m, F, ht, hn.v);
    for (int bt = 0; bt < 30 && !(qt.norm() < q.norm()); ++bt) {
      s *= 0.5;
      ht = h + s * dh;
      qt = oracle_residual(m, F, ht, hn.v);
    }
    if (!(qt.norm() < q.norm())) break;
    h = ht;
    q = qt;
  }

  out.converged = converged || q.norm() <= 1e-11 * qscale;
  out.plastic = true;
  out.h.v = h;
  out.P = oracle_piola(m, F, h);
  return out;
}

// ---------------------------------------------------------------------------
// Independent laminate jump oracle: minimize the averaged energy over c with
// a finite-difference Newton (FD gradient, FD Hessian). Valid for
// history-free phases, where the jump root is the energy minimizer.

inline double averaged_energy(const Tensor2& Fbar, const Vector3& c,
                              const LaminateConfig& cfg) {
  const auto [F1, F2] = local_gradients(Fbar, c, cfg);
  return (1.0 - cfg.eta) * energy(cfg.phase1, F1, History::virgin())
       + cfg.eta * energy(cfg.phase2, F2, History::virgin());
}

inline Vector3 oracle_minimize_jump(const Tensor2& Fbar, const LaminateConfig& cfg,
                                    const Vector3& c0 = Vector3::Zero()) {
  const auto W = [&](const Vector3& c) { return averaged_energy(Fbar, c, cfg); };
  const double delta = 1e-6;
  Vector3 c = c0;
  Vector3 g = fd_gradient_vec(W, c, delta);
  for (int it = 0; it < 80; ++it) {
    if (g.norm() <= 1e-11) break;
    Eigen::Matrix3d H;
    for (int k = 0; k < 3; ++k) {
      Vector3 cp = c, cm = c;
      cp[k] += delta;
      cm[k] -= delta;
      H.col(k) = (fd_gradient_vec(W, cp, delta) - fd_gradient_vec(W, cm, delta))
               / (2.0 * delta);
    }
    const Vector3 dc = H.fullPivLu().solve(-g);
    double s = 1.0;
    Vector3 ct = c + dc;
    Vector3 gt = fd_gradient_vec(W, ct, delta);
    for (int bt = 0; bt < 30 && !(gt.norm() < g.norm()); ++bt) {
      s *= 0.5;
      ct = c + s * dc;
      gt = fd_gradient_vec(W, ct, delta);
    }
    if (!(gt.norm() < g.norm())) break;
    c = ct;
    g = gt;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Mandel 6x6 image of a minor-symmetric fourth-order tensor: quadratic forms
// and inverses (Reuss bound) carry over exactly under this isometry.

inline Eigen::Matrix<double, 6, 6> mandel(const Tensor4& C) {
  constexpr int I[6] = {0, 1, 2, 1, 0, 0};
  constexpr int J[6] = {0, 1, 2, 2, 2, 1};
  const double rt2 = std::sqrt(2.0);
  const double w[6] = {1.0, 1.0, 1.0, rt2, rt2, rt2};
  Eigen::Matrix<double, 6, 6> M;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) M(a, b) = w[a] * w[b] * C(I[a], J[a], I[b], J[b]);
  return M;
}

inline Eigen::Matrix<double, 6, 1> mandel(const Tensor2& eps) {
  const double rt2 = std::sqrt(2.0);
  Eigen::Matrix<double, 6, 1> v;
  v << eps(0, 0), eps(1, 1), eps(2, 2), rt2 * eps(1, 2), rt2 * eps(0, 2), rt2 * eps(0, 1);
  return v;
}

// Convergence order of the last residual triple above the roundoff floor:
// p = log(r2/r1) / log(r1/r0). Quadratic tails give p near 2.
inline double tail_order(const std::vector<double>& r) {
  std::vector<double> v;
  for (double x : r)
    if (x > 1e-15 * (r.empty() ? 1.0 : r.front())) v.push_back(x);
  if (v.size() < 3) return 0.0;
  const double r0 = v[v.size() - 3], r1 = v[v.size() - 2], r2 = v[v.size() - 1];
  if (!(r1 < r0) || !(r2 < r1)) return 0.0;
  return std::log(r2 / r1) / std::log(r1 / r0);
}

} // namespace lamfem::testing
