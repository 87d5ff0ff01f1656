#include "lamfem/tensor.hpp"

#include <cmath>

namespace lamfem {

double det(const Tensor2& A) { return A.determinant(); }

Tensor2 inv(const Tensor2& A) {
  const double nrm = A.norm();
  const double d = A.determinant();
  if (std::abs(d) <= 1e-14 * nrm * nrm * nrm)
    throw SingularTensor("inv: determinant below conditioning threshold");
  return A.inverse();
}

Tensor2 dyad(const Vector3& a, const Vector3& b) { return a * b.transpose(); }

Tensor2 sym(const Tensor2& A) { return 0.5 * (A + A.transpose()); }

Tensor2 dev(const Tensor2& A) {
  return A - (A.trace() / 3.0) * Tensor2::Identity();
}

double ddot(const Tensor2& A, const Tensor2& B) {
  return (A.array() * B.array()).sum();
}

namespace {

// exp(A) by scaling-and-squaring with a truncated Taylor series; valid for
// any A but used here only as the clustered-eigenvalue fallback.
Tensor2 exp_series(const Tensor2& A) {
  int s = 0;
  double nrm = A.norm();
  while (nrm > 0.25) {
    nrm *= 0.5;
    ++s;
  }
  const Tensor2 B = A / std::pow(2.0, s);
  Tensor2 term = Tensor2::Identity();
  Tensor2 sum = Tensor2::Identity();
  for (int k = 1; k < 20; ++k) {
    term = (term * B) / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

} // namespace

Tensor2 sym_exp(const Tensor2& A) {
  const double scale = std::max(1.0, A.norm());
  if ((A - A.transpose()).norm() > 1e-12 * scale)
    throw NotSymmetric("sym_exp: input is not symmetric");

  Eigen::SelfAdjointEigenSolver<Tensor2> es;
  es.computeDirect(sym(A));
  const Vector3 lam = es.eigenvalues();

  const double gap = std::min(lam[1] - lam[0], lam[2] - lam[1]);
  if (gap < 1e-6 * A.norm()) return sym(exp_series(sym(A)));

  Vector3 e;
  for (int i = 0; i < 3; ++i) e[i] = std::exp(lam[i]);
  Tensor2 R = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose();
  return sym(R);
}

Voigt6 to_voigt(const Tensor2& A) {
  Voigt6 v;
  v << A(0, 0), A(1, 1), A(2, 2), A(1, 2), A(0, 2), A(0, 1);
  return v;
}

Tensor2 from_voigt(const Voigt6& v) {
  Tensor2 A;
  A << v[0], v[5], v[4],
       v[5], v[1], v[3],
       v[4], v[3], v[2];
  return A;
}

double voigt_ddot(const Voigt6& a, const Voigt6& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
       + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5]);
}

Tensor2 Tensor4::contract(const Tensor2& A) const {
  Tensor2 R = Tensor2::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += (*this)(i, j, k, l) * A(k, l);
      R(i, j) = s;
    }
  return R;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double x : a_) m = std::max(m, std::abs(x));
  return m;
}

Tensor4 Tensor4::dyad(const Tensor2& A, const Tensor2& B) {
  Tensor4 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) C(i, j, k, l) = A(i, j) * B(k, l);
  return C;
}

Tensor4 Tensor4::identity() {
  Tensor4 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j, i, j) = 1.0;
  return C;
}

Tensor4 Tensor4::sym_identity() {
  Tensor4 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      C(i, j, i, j) += 0.5;
      C(i, j, j, i) += 0.5;
    }
  return C;
}

Tensor4 isotropic_stiffness(double lambda, double mu) {
  const Tensor2 I = Tensor2::Identity();
  Tensor4 C = Tensor4::dyad(I, I);
  C *= lambda;
  C += 2.0 * mu * Tensor4::sym_identity();
  return C;
}

} // namespace lamfem
