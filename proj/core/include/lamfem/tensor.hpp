#pragma once

#include <Eigen/Dense>

#include <array>

#include "lamfem/errors.hpp"

namespace lamfem {

using Tensor2 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

// Symmetric second-order tensor in Voigt form, component order
// (11, 22, 33, 23, 13, 12). Shear entries are stored raw (no factor 2);
// contractions must weight them explicitly, see voigt_ddot.
using Voigt6 = Eigen::Matrix<double, 6, 1>;

double det(const Tensor2& A);

// Inverse with an explicit conditioning guard:
// requires |det A| > 1e-14 * ||A||_F^3, else throws SingularTensor.
Tensor2 inv(const Tensor2& A);

Tensor2 dyad(const Vector3& a, const Vector3& b);

Tensor2 sym(const Tensor2& A);
Tensor2 dev(const Tensor2& A);
double ddot(const Tensor2& A, const Tensor2& B);

// Matrix exponential of a symmetric 3x3 tensor. Spectral form by default;
// falls back to a scaled power series when eigenvalues cluster.
// Throws NotSymmetric when ||A - A^T|| exceeds 1e-12 * max(1, ||A||).
Tensor2 sym_exp(const Tensor2& A);

Voigt6 to_voigt(const Tensor2& A);
Tensor2 from_voigt(const Voigt6& v);

// Double contraction of the symmetric tensors represented by a and b:
// sum(a_i * b_i * w_i) with w = (1,1,1,2,2,2).
double voigt_ddot(const Voigt6& a, const Voigt6& b);

// Dense fourth-order tensor on R^3, indexed (i,j,k,l).
class Tensor4 {
public:
  Tensor4() : a_{} {}

  double& operator()(int i, int j, int k, int l) {
    return a_[static_cast<std::size_t>(((i * 3 + j) * 3 + k) * 3 + l)];
  }
  double operator()(int i, int j, int k, int l) const {
    return a_[static_cast<std::size_t>(((i * 3 + j) * 3 + k) * 3 + l)];
  }

  Tensor4& operator+=(const Tensor4& o) {
    for (std::size_t n = 0; n < 81; ++n) a_[n] += o.a_[n];
    return *this;
  }
  Tensor4& operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
  }
  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator*(double s, Tensor4 a) { return a *= s; }

  // (C : A)_ij = C_ijkl A_kl
  Tensor2 contract(const Tensor2& A) const;

  double max_abs() const;

  static Tensor4 dyad(const Tensor2& A, const Tensor2& B);  // A_ij B_kl
  static Tensor4 identity();      // d_ik d_jl
  static Tensor4 sym_identity();  // (d_ik d_jl + d_il d_jk) / 2

private:
  std::array<double, 81> a_;
};

// lambda * I(x)I + 2 mu * Isym
Tensor4 isotropic_stiffness(double lambda, double mu);

// Row-major flattening of second-order tensor indices, f = 3i + j.
constexpr int flat(int i, int j) { return 3 * i + j; }

} // namespace lamfem
