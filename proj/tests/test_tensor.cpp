#include <cmath>

#include <doctest.h>

#include "lamfem/tensor.hpp"

#include "oracles.hpp"

using namespace lamfem;
using namespace lamfem::testing;

namespace {

// Plain truncated exponential series; converges fast for the small-norm
// arguments the tests feed it.
Tensor2 series_exp(const Tensor2& A) {
  Tensor2 term = Tensor2::Identity();
  Tensor2 sum = Tensor2::Identity();
  for (int k = 1; k <= 40; ++k) {
    term = term * A / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

} // namespace

TEST_SUITE("tensor") {

TEST_CASE("det and inv match Eigen on random tensors") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Tensor2 A = random_deformation(rng, 0.4);
    CHECK(det(A) == doctest::Approx(A.determinant()).epsilon(1e-14));
    const Tensor2 Ai = inv(A);
    CHECK((A * Ai - Tensor2::Identity()).norm() <= 1e-13);
  }
}

TEST_CASE("inv rejects numerically singular input") {
  Tensor2 A;
  A << 1.0, 2.0, 3.0,
       2.0, 4.0, 6.0,
       0.5, 1.0, 1.5;  // rank 1
  CHECK_THROWS_AS(inv(A), SingularTensor);
}

TEST_CASE("dyad, sym, dev, ddot basics") {
  const Vector3 a(1.0, 2.0, 3.0), b(-1.0, 0.5, 2.0);
  const Tensor2 D = dyad(a, b);
  CHECK(D(0, 2) == doctest::Approx(2.0));
  CHECK(D(2, 0) == doctest::Approx(-3.0));

  Rng rng(12);
  const Tensor2 A = random_tensor(rng, 1.0);
  CHECK((sym(A) - 0.5 * (A + A.transpose())).norm() <= 1e-15);
  CHECK(dev(A).trace() == doctest::Approx(0.0).epsilon(0).scale(1e-14));
  CHECK(ddot(A, A) == doctest::Approx(A.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("Voigt round trip is exact") {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const Tensor2 A = random_symmetric(rng, 2.0);
    const Tensor2 B = from_voigt(to_voigt(A));
    CHECK((A - B).norm() == 0.0);
  }
}

TEST_CASE("voigt_ddot reproduces the full contraction with shear weights 2") {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    const Tensor2 A = random_symmetric(rng, 2.0);
    const Tensor2 B = random_symmetric(rng, 2.0);
    CHECK(voigt_ddot(to_voigt(A), to_voigt(B))
          == doctest::Approx(ddot(A, B)).epsilon(1e-13));
  }
}

TEST_CASE("sym_exp matches the power series on random symmetric tensors") {
  Rng rng(15);
  for (int t = 0; t < 50; ++t) {
    const Tensor2 A = random_symmetric(rng, 0.8);
    CHECK((sym_exp(A) - series_exp(A)).norm() <= 1e-12 * series_exp(A).norm());
  }
}

TEST_CASE("sym_exp inverse and determinant identities") {
  Rng rng(16);
  for (int t = 0; t < 50; ++t) {
    const Tensor2 A = random_symmetric(rng, 1.5);
    CHECK((sym_exp(A) * sym_exp(-A) - Tensor2::Identity()).norm() <= 1e-10);
    CHECK(det(sym_exp(A)) == doctest::Approx(std::exp(A.trace())).epsilon(1e-10));
  }
}

TEST_CASE("sym_exp handles clustered eigenvalues") {
  // Near-multiples of the identity stress the spectral branch; both the
  // exactly degenerate and the barely split case must agree with the series.
  const Tensor2 A1 = 0.3 * Tensor2::Identity();
  CHECK((sym_exp(A1) - std::exp(0.3) * Tensor2::Identity()).norm() <= 1e-13);

  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const Tensor2 A = 0.2 * Tensor2::Identity() + random_symmetric(rng, 1e-9);
    CHECK((sym_exp(A) - series_exp(A)).norm() <= 1e-12);
  }
}

TEST_CASE("sym_exp rejects non-symmetric input") {
  Tensor2 A = Tensor2::Identity();
  A(0, 1) = 0.2;
  CHECK_THROWS_AS(sym_exp(A), NotSymmetric);
}

TEST_CASE("Tensor4 identities and contraction") {
  Rng rng(18);
  const Tensor2 A = random_tensor(rng, 1.0);
  CHECK((Tensor4::identity().contract(A) - A).norm() <= 1e-15);
  CHECK((Tensor4::sym_identity().contract(A) - sym(A)).norm() <= 1e-15);

  const Tensor2 B = random_tensor(rng, 1.0);
  const Tensor2 C = random_tensor(rng, 1.0);
  CHECK((Tensor4::dyad(A, B).contract(C) - ddot(B, C) * A).norm() <= 1e-13);
}

TEST_CASE("isotropic_stiffness applies the Lame law") {
  Rng rng(19);
  const double lambda = 1.7, mu = 0.9;
  const Tensor4 C = isotropic_stiffness(lambda, mu);
  for (int t = 0; t < 10; ++t) {
    const Tensor2 eps = random_symmetric(rng, 1.0);
    const Tensor2 sig = lambda * eps.trace() * Tensor2::Identity() + 2.0 * mu * eps;
    CHECK((C.contract(eps) - sig).norm() <= 1e-13);
  }
}

TEST_CASE("flat maps row-major index pairs") {
  CHECK(flat(0, 0) == 0);
  CHECK(flat(0, 2) == 2);
  CHECK(flat(1, 0) == 3);
  CHECK(flat(2, 2) == 8);
}

} // TEST_SUITE("tensor")
