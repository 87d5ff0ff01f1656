#include "lamfem/material.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "lamfem/dual.hpp"

namespace lamfem {

namespace {

template <typename T>
using Arr7 = std::array<T, 7>;

template <typename T>
Mat3<T> as_mat3(const Tensor2& A) {
  Mat3<T> m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = T(A(i, j));
  return m;
}

Tensor2 as_tensor(const Mat3<double>& m) {
  Tensor2 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = m(i, j);
  return A;
}

template <typename T>
Mat3<T> cp_inverse_of(const Arr7<T>& h) {
  Mat3<T> c;
  c(0, 0) = h[0] + T(1.0);
  c(1, 1) = h[1] + T(1.0);
  c(2, 2) = h[2] + T(1.0);
  c(1, 2) = c(2, 1) = h[3];
  c(0, 2) = c(2, 0) = h[4];
  c(0, 1) = c(1, 0) = h[5];
  return c;
}

template <typename T>
T ddot3(const Mat3<T>& a, const Mat3<T>& b) {
  T s = T(0.0);
  for (int n = 0; n < 9; ++n)
    s += a.a[static_cast<std::size_t>(n)] * b.a[static_cast<std::size_t>(n)];
  return s;
}

// Elastic energy of the NeoHookean/J2 family as a function of b_e = F Cp^-1 F^T.
template <typename T>
T hyper_energy(double mu, double lambda, const Mat3<T>& F, const Mat3<T>& cpi) {
  const Mat3<T> be = F * (cpi * transpose(F));
  const T I1 = trace(be);
  const T I3 = det(be);
  const T lI3 = log(I3);
  return T(0.5 * mu) * (I1 - T(3.0) - lI3) + T(0.25 * lambda) * (I3 - T(1.0) - lI3);
}

// P = 2 S F Cp^-1 with S = dW/db_e = mu/2 (I - be^-1) + lambda/4 (I3 - 1) be^-1.
template <typename T>
Mat3<T> hyper_piola(double mu, double lambda, const Mat3<T>& F, const Mat3<T>& cpi) {
  const Mat3<T> be = F * (cpi * transpose(F));
  const Mat3<T> bei = inverse(be);
  const T I3 = det(be);
  const Mat3<T> I = Mat3<T>::identity();
  Mat3<T> S = T(0.5 * mu) * (I - bei);
  S += (T(0.25 * lambda) * (I3 - T(1.0))) * bei;
  return T(2.0) * (S * (F * cpi));
}

// Kirchhoff stress in closed form: tau = mu (be - I) + lambda/2 (I3 - 1) I.
template <typename T>
Mat3<T> kirchhoff(double mu, double lambda, const Mat3<T>& be) {
  const T I3 = det(be);
  Mat3<T> tau = be;
  tau -= Mat3<T>::identity();
  tau = T(mu) * tau;
  const T p = T(0.5 * lambda) * (I3 - T(1.0));
  tau(0, 0) += p;
  tau(1, 1) += p;
  tau(2, 2) += p;
  return tau;
}

template <typename T>
Mat3<T> deviator(const Mat3<T>& a) {
  Mat3<T> d = a;
  const T p = trace(a) / T(3.0);
  d(0, 0) -= p;
  d(1, 1) -= p;
  d(2, 2) -= p;
  return d;
}

// Return-mapping residual Q(F, h; h_n). The flow direction n is the
// symmetric derivative of phi w.r.t. tau: n = sqrt(3/2) tau' / ||tau'||.
template <typename T>
Arr7<T> residual(const J2Plastic& m, const Mat3<T>& F, const Arr7<T>& h,
                 const Eigen::Matrix<double, 7, 1>& hn) {
  const Mat3<T> cpi = cp_inverse_of(h);
  Arr7<T> hnc;
  for (int a = 0; a < 7; ++a) hnc[static_cast<std::size_t>(a)] = T(hn[a]);
  const Mat3<T> cpin = cp_inverse_of(hnc);

  const Mat3<T> be = F * (cpi * transpose(F));
  const Mat3<T> taud = deviator(kirchhoff(m.mu, m.lambda, be));
  const T j2 = T(1.5) * ddot3(taud, taud);

  Mat3<T> nflow = Mat3<T>::zero();
  T phi = T(-m.yield_stress(0.0));
  if (value(j2) > 1e-300) {
    const T norm = sqrt(j2);
    phi = norm - T(m.sigma0) - T(m.hardening) * h[6];
    nflow = (T(1.5) / norm) * taud;
  }

  const T dgamma = h[6] - T(hn[6]);
  const Mat3<T> E = mexp(T(-2.0) * dgamma * nflow);
  const Mat3<T> Z = F * cpi - E * (F * cpin);

  return {Z(0, 0), Z(1, 1), Z(2, 2), Z(1, 2), Z(0, 2), Z(0, 1), phi};
}

void check_jacobian(const Tensor2& F) {
  if (!(F.determinant() > 0.0))
    throw NonPositiveJacobian("deformation gradient has non-positive determinant");
}

Tensor2 elastic_small_stress(const LinearElastic& m, const Tensor2& F) {
  const Tensor2 e = sym(F - Tensor2::Identity()) - m.eigenstrain;
  return m.lambda() * e.trace() * Tensor2::Identity() + 2.0 * m.mu() * e;
}

// Dual sweep over the 7 history slots at fixed F: dP/dh as 9x7.
Eigen::Matrix<double, 9, 7> piola_history_sensitivity(double mu, double lambda,
                                                      const Tensor2& F,
                                                      const History& h) {
  using D = Dual<7>;
  Arr7<D> hd;
  for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = D::seed(h.v[a], a);
  const Mat3<D> P = hyper_piola(mu, lambda, as_mat3<D>(F), cp_inverse_of(hd));
  Eigen::Matrix<double, 9, 7> dPdh;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 7; ++a) dPdh(flat(i, j), a) = P(i, j).d[a];
  return dPdh;
}

// Dual sweep over the 9 entries of F at frozen history: dP/dF|_h.
Eigen::Matrix<double, 9, 9> piola_deformation_sensitivity(double mu, double lambda,
                                                          const Tensor2& F,
                                                          const History& h) {
  using D = Dual<9>;
  Mat3<D> Fd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Fd(i, j) = D::seed(F(i, j), flat(i, j));
  Arr7<D> hd;
  for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = D(h.v[a]);
  const Mat3<D> P = hyper_piola(mu, lambda, Fd, cp_inverse_of(hd));
  Eigen::Matrix<double, 9, 9> dPdF;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int f = 0; f < 9; ++f) dPdF(flat(i, j), f) = P(i, j).d[f];
  return dPdF;
}

Tensor4 tensor4_from_99(const Eigen::Matrix<double, 9, 9>& M) {
  Tensor4 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) A(i, j, k, l) = M(flat(i, j), flat(k, l));
  return A;
}

constexpr double kTolLocal = 1e-12;
constexpr int kMaxLocalIter = 50;

// ||Q|| of the full return-mapping residual; arbiter between seed candidates.
double residual_norm_at(const J2Plastic& m, const Tensor2& F,
                        const Eigen::Matrix<double, 7, 1>& h, const History& hn) {
  Arr7<double> hd;
  for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = h[a];
  const Arr7<double> Q = residual(m, as_mat3<double>(F), hd, hn.v);
  double s = 0.0;
  for (int a = 0; a < 7; ++a) s += Q[static_cast<std::size_t>(a)] * Q[static_cast<std::size_t>(a)];
  return std::sqrt(s);
}

// Seed for the Newton iteration. At the root, be = exp(-2 dg n) be_tr with
// n = 1.5 mu dev(be) / |1.5 mu dev(be)|_phi, so be commutes with the trial
// state and the full problem collapses to four scalars in the trial
// eigenbasis: log eigenvalue shifts z (be_i = b_i exp(z_i)) and dg. The flow
// is first marched to the yield surface, a damped Newton then refines the
// reduced root, and the best candidate by full residual norm (including the
// unmodified previous state) is mapped back to the history vector. Seeding
// this way keeps the 7-dim Newton in state_update convergent even when a
// single increment carries the trial state far past the yield surface (e.g.
// inside thin laminate slivers), and never degrades the mild-step path.
Eigen::Matrix<double, 7, 1> plastic_predictor(const J2Plastic& m, const Tensor2& F,
                                              const History& hn) {
  const Tensor2 be_raw = F * hn.cp_inverse() * F.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (be_raw + be_raw.transpose()));
  const Eigen::Vector3d b = eig.eigenvalues();
  const Eigen::Matrix3d V = eig.eigenvectors();

  const Eigen::Vector3d td = m.mu * (b.array() - b.mean()).matrix();
  const double jt = std::sqrt(1.5 * td.squaredNorm());
  if (!(jt > 0.0)) return hn.v;

  // March the direction-updating flow down to the yield surface by explicit
  // exponential steps. phi decreases monotonically along this path while the
  // yield stress hardens, so the march always arrives; the radial-return
  // estimate sizes the step (near-exact close to the surface) and the 0.1
  // cap keeps each step well inside the eigenvalue-doubling scale.
  Eigen::Vector3d be = b;
  double dg = 0.0;
  for (int it = 0; it < 400; ++it) {
    const Eigen::Vector3d d = m.mu * (be.array() - be.mean()).matrix();
    const double ph = std::sqrt(1.5 * d.squaredNorm());
    const double remaining = (ph - m.yield_stress(hn.gamma() + dg)) / (3.0 * m.mu + m.hardening);
    if (remaining <= 1e-14 * (1.0 + dg)) break;
    const double ds = std::min(remaining, 0.1);
    const Eigen::Vector3d nu = (1.5 / ph) * d;
    be = (((-2.0 * ds) * nu.array()).exp() * be.array()).matrix();
    dg += ds;
  }
  if (!(dg > 0.0)) return hn.v;

  // Reduced residual: r_i = z_i + 2 dg nu_i(be(z)), r_3 = phi(be(z)); y = (z, dg).
  using Vec4 = Eigen::Matrix<double, 4, 1>;
  const auto reduced = [&](const Vec4& y) {
    const Eigen::Vector3d bz = (y.head<3>().array().exp() * b.array()).matrix();
    const Eigen::Vector3d d = m.mu * (bz.array() - bz.mean()).matrix();
    const double ph = std::sqrt(1.5 * d.squaredNorm());
    Vec4 r;
    if (ph > 0.0)
      r.head<3>() = y.head<3>() + (3.0 * y[3] / ph) * d;
    else
      r.head<3>() = y.head<3>();
    r[3] = ph - m.yield_stress(hn.gamma() + y[3]);
    return r;
  };

  const Eigen::Matrix3d Fi = F.inverse();
  const auto pack = [&](const Vec4& y) {
    const Eigen::Vector3d be0 = (y.head<3>().array().exp() * b.array()).matrix();
    const Tensor2 cpi = Fi * (V * be0.asDiagonal() * V.transpose()) * Fi.transpose();
    const Tensor2 cs = 0.5 * (cpi + cpi.transpose());
    Eigen::Matrix<double, 7, 1> h;
    h << cs(0, 0) - 1.0, cs(1, 1) - 1.0, cs(2, 2) - 1.0, cs(1, 2), cs(0, 2), cs(0, 1),
        hn.gamma() + y[3];
    return h;
  };

  Vec4 y;
  y[3] = dg;
  y.head<3>() = (be.array() / b.array()).log().matrix();
  const Vec4 y_march = y;

  Vec4 r = reduced(y);
  for (int it = 0; it < 60 && r.norm() > 1e-13 * (jt + m.sigma0); ++it) {
    Eigen::Matrix4d J;
    for (int k = 0; k < 4; ++k) {
      Vec4 yp = y;
      const double dh = 1e-7 * std::max(1.0, std::abs(y[k]));
      yp[k] += dh;
      J.col(k) = (reduced(yp) - r) / dh;
    }
    const Vec4 dy = J.fullPivLu().solve(-r);
    double s = 1.0;
    Vec4 yt = y + dy;
    Vec4 rt = reduced(yt);
    for (int bt = 0; bt < 25 && !(rt.norm() < r.norm()); ++bt) {
      s *= 0.5;
      yt = y + s * dy;
      rt = reduced(yt);
    }
    if (!(rt.norm() < r.norm())) break;
    y = yt;
    r = rt;
  }

  Eigen::Matrix<double, 7, 1> seed = hn.v;
  double qbest = std::numeric_limits<double>::infinity();
  for (const Vec4& cand : {y, y_march}) {
    if (!(cand[3] > 0.0)) continue;
    const Eigen::Matrix<double, 7, 1> hc = pack(cand);
    const double qc = residual_norm_at(m, F, hc, hn);
    if (qc < qbest) {
      qbest = qc;
      seed = hc;
    }
  }
  return seed;
}

StateUpdateResult state_update_j2(const J2Plastic& m, const Tensor2& F, const History& hn) {
  check_jacobian(F);
  StateUpdateResult r;

  if (trial_yield(m, F, hn) < 0.0) {
    r.h = hn;
    r.P = piola_stress(MaterialModel(m), F, hn);
    return r;
  }

  using D7 = Dual<7>;
  const Mat3<D7> F7 = as_mat3<D7>(F);

  // One Newton run from a given start; returns the converged h or nothing.
  const auto attempt = [&](Eigen::Matrix<double, 7, 1> h,
                           int& iters) -> std::optional<Eigen::Matrix<double, 7, 1>> {
    Eigen::Matrix<double, 7, 7> J;
    for (int it = 1; it <= kMaxLocalIter; ++it) {
      Arr7<D7> hd;
      for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = D7::seed(h[a], a);
      const Arr7<D7> Q = residual(m, F7, hd, hn.v);

      Eigen::Matrix<double, 7, 1> q;
      for (int a = 0; a < 7; ++a) {
        q[a] = Q[static_cast<std::size_t>(a)].v;
        for (int b = 0; b < 7; ++b) J(a, b) = Q[static_cast<std::size_t>(a)].d[b];
      }

      // Residual exit against the natural row scales of Q (flow rows
      // ~ F Cp^-1, yield row ~ stress); the dh test below cannot see
      // convergence when the iterate already sits at the root and J^-1
      // amplifies residual roundoff.
      const double qscale = F.norm() * (1.0 + h.head<6>().norm())
                            + m.sigma0 + m.hardening * std::abs(h[6]);
      if (q.norm() <= kTolLocal * qscale) return h;

      const Eigen::Matrix<double, 7, 1> dh = J.fullPivLu().solve(-q);
      h += dh;
      iters = it;
      // Relative test: h holds Cp^-1 - I, whose entries grow with accumulated
      // flow, and an absolute 1e-12 would chase roundoff noise at large h.
      if (dh.norm() <= kTolLocal * std::max(1.0, h.norm())) return h;
    }
    return std::nullopt;
  };

  auto h_conv = attempt(hn.v, r.iterations);
  if (!h_conv) {
    // Retry once from the reduced-problem seed; a single increment that lands
    // far past the yield surface (laminate slivers) starts outside the Newton
    // basin of the previous state.
    const Eigen::Matrix<double, 7, 1> seed = plastic_predictor(m, F, hn);
    if ((seed.array() != hn.v.array()).any()) h_conv = attempt(seed, r.iterations);
  }
  if (!h_conv)
    throw LocalDivergence("return mapping did not converge within iteration cap");
  const Eigen::Matrix<double, 7, 1> h = *h_conv;

  r.plastic = true;
  r.h.v = h;

  // Implicit sensitivity at the converged state: G = -(dQ/dh)^-1 dQ/dF.
  {
    Eigen::Matrix<double, 7, 7> J;
    Arr7<D7> hd;
    for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = D7::seed(h[a], a);
    const Arr7<D7> Q = residual(m, F7, hd, hn.v);
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b) J(a, b) = Q[static_cast<std::size_t>(a)].d[b];

    using D9 = Dual<9>;
    Mat3<D9> F9;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F9(i, j) = D9::seed(F(i, j), flat(i, j));
    Arr7<D9> h9;
    for (int a = 0; a < 7; ++a) h9[static_cast<std::size_t>(a)] = D9(h[a]);
    const Arr7<D9> QF = residual(m, F9, h9, hn.v);

    Eigen::Matrix<double, 7, 9> dQdF;
    for (int a = 0; a < 7; ++a)
      for (int f = 0; f < 9; ++f) dQdF(a, f) = QF[static_cast<std::size_t>(a)].d[f];
    r.G = J.fullPivLu().solve(-dQdF);
  }

  r.P = piola_stress(MaterialModel(m), F, r.h);
  return r;
}

} // namespace

double energy(const MaterialModel& m, const Tensor2& F, const History& h) {
  check_jacobian(F);
  return std::visit(
      [&](const auto& mm) -> double {
        using M = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<M, LinearElastic>) {
          const Tensor2 e = sym(F - Tensor2::Identity()) - mm.eigenstrain;
          const double tr = e.trace();
          return 0.5 * mm.lambda() * tr * tr + mm.mu() * ddot(e, e);
        } else if constexpr (std::is_same_v<M, NeoHookean>) {
          return hyper_energy(mm.mu, mm.lambda, as_mat3<double>(F), Mat3<double>::identity());
        } else {
          Arr7<double> hd;
          for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = h.v[a];
          return hyper_energy(mm.mu, mm.lambda, as_mat3<double>(F), cp_inverse_of(hd));
        }
      },
      m);
}

Tensor2 piola_stress(const MaterialModel& m, const Tensor2& F, const History& h) {
  check_jacobian(F);
  return std::visit(
      [&](const auto& mm) -> Tensor2 {
        using M = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<M, LinearElastic>) {
          return elastic_small_stress(mm, F);
        } else if constexpr (std::is_same_v<M, NeoHookean>) {
          return as_tensor(hyper_piola(mm.mu, mm.lambda, as_mat3<double>(F),
                                       Mat3<double>::identity()));
        } else {
          Arr7<double> hd;
          for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = h.v[a];
          return as_tensor(hyper_piola(mm.mu, mm.lambda, as_mat3<double>(F),
                                       cp_inverse_of(hd)));
        }
      },
      m);
}

double trial_yield(const J2Plastic& m, const Tensor2& F, const History& hn) {
  const Tensor2 be = F * hn.cp_inverse() * F.transpose();
  const Tensor2 tau = m.mu * (be - Tensor2::Identity())
                    + 0.5 * m.lambda * (be.determinant() - 1.0) * Tensor2::Identity();
  const Tensor2 td = dev(tau);
  return std::sqrt(1.5 * ddot(td, td)) - m.yield_stress(hn.gamma());
}

Eigen::Matrix<double, 7, 1> local_residual(const J2Plastic& m, const Tensor2& F,
                                           const History& h, const History& hn) {
  check_jacobian(F);
  Arr7<double> hd;
  for (int a = 0; a < 7; ++a) hd[static_cast<std::size_t>(a)] = h.v[a];
  const Arr7<double> Q = residual(m, as_mat3<double>(F), hd, hn.v);
  Eigen::Matrix<double, 7, 1> q;
  for (int a = 0; a < 7; ++a) q[a] = Q[static_cast<std::size_t>(a)];
  return q;
}

StateUpdateResult state_update(const MaterialModel& m, const Tensor2& F, const History& hn) {
  check_jacobian(F);
  return std::visit(
      [&](const auto& mm) -> StateUpdateResult {
        using M = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<M, J2Plastic>) {
          return state_update_j2(mm, F, hn);
        } else {
          StateUpdateResult r;
          r.h = hn;
          r.P = piola_stress(m, F, hn);
          return r;
        }
      },
      m);
}

Tensor2 small_strain_stress(const LinearElastic& m, const Tensor2& eps) {
  const Tensor2 e = eps - m.eigenstrain;
  return m.lambda() * e.trace() * Tensor2::Identity() + 2.0 * m.mu() * e;
}

Tensor4 phase_tangent(const MaterialModel& m, const Tensor2& F, const StateUpdateResult& r) {
  return std::visit(
      [&](const auto& mm) -> Tensor4 {
        using M = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<M, LinearElastic>) {
          return isotropic_stiffness(mm.lambda(), mm.mu());
        } else if constexpr (std::is_same_v<M, NeoHookean>) {
          return tensor4_from_99(
              piola_deformation_sensitivity(mm.mu, mm.lambda, F, History::virgin()));
        } else {
          Eigen::Matrix<double, 9, 9> A =
              piola_deformation_sensitivity(mm.mu, mm.lambda, F, r.h);
          if (r.plastic)
            A += piola_history_sensitivity(mm.mu, mm.lambda, F, r.h) * r.G;
          return tensor4_from_99(A);
        }
      },
      m);
}

} // namespace lamfem
