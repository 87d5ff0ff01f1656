#include <cmath>

#include <doctest.h>

#include "lamfem/dual.hpp"
#include "lamfem/tensor.hpp"

#include "oracles.hpp"

using namespace lamfem;
using namespace lamfem::testing;

namespace {

// Composite scalar function exercising every dual operator at once.
template <typename T>
T scalar_fn(const T& x, const T& y) {
  return exp(log(sqrt(x * x + y)) * y) - x / (y + T(2.0)) + (-x) * y;
}

template <typename T>
Mat3<T> matrix_fn(const Mat3<T>& m) {
  return mexp(m * transpose(m)) + inverse(m + Mat3<T>::identity());
}

Mat3<double> as_mat3(const Tensor2& A) {
  Mat3<double> m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = A(i, j);
  return m;
}

} // namespace

TEST_SUITE("dual") {

TEST_CASE("scalar derivatives match central differences") {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    const double x = uniform(rng, 0.3, 2.0);
    const double y = uniform(rng, 0.3, 2.0);

    using D = Dual<2>;
    const D f = scalar_fn(D::seed(x, 0), D::seed(y, 1));

    const double d = 1e-6;
    const double fx = (scalar_fn(x + d, y) - scalar_fn(x - d, y)) / (2.0 * d);
    const double fy = (scalar_fn(x, y + d) - scalar_fn(x, y - d)) / (2.0 * d);

    CHECK(f.v == doctest::Approx(scalar_fn(x, y)).epsilon(1e-14));
    CHECK(f.d[0] == doctest::Approx(fx).epsilon(1e-6));
    CHECK(f.d[1] == doctest::Approx(fy).epsilon(1e-6));
  }
}

TEST_CASE("value extraction and comparisons") {
  CHECK(value(1.5) == 1.5);
  const Dual<3> a(2.0), b(3.0);
  CHECK(value(a) == 2.0);
  CHECK(a < b);
  CHECK(b > a);
  CHECK(a <= a);
  CHECK(b >= a);
}

TEST_CASE("Mat3 algebra agrees with Eigen") {
  Rng rng(22);
  const Tensor2 A = random_deformation(rng, 0.5);
  const Tensor2 B = random_tensor(rng, 1.0);
  const Mat3<double> a = as_mat3(A), b = as_mat3(B);

  const Mat3<double> prod = a * b;
  const Tensor2 eprod = A * B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(prod(i, j) == doctest::Approx(eprod(i, j)));

  CHECK(trace(a) == doctest::Approx(A.trace()));
  CHECK(det(a) == doctest::Approx(A.determinant()).epsilon(1e-13));

  const Mat3<double> ai = inverse(a);
  const Tensor2 eai = A.inverse();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(ai(i, j) == doctest::Approx(eai(i, j)).epsilon(1e-12));
}

TEST_CASE("mexp matches sym_exp on symmetric input") {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    const Tensor2 S = random_symmetric(rng, 1.2);
    const Mat3<double> e = mexp(as_mat3(S));
    const Tensor2 r = sym_exp(S);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(e(i, j) == doctest::Approx(r(i, j)).epsilon(1e-11));
  }
}

TEST_CASE("matrix function derivative matches central differences") {
  Rng rng(24);
  const Tensor2 M0 = random_tensor(rng, 0.4);
  const Tensor2 Dir = random_tensor(rng, 1.0);

  // d/dt f(M0 + t Dir) at t = 0, one dual slot along the direction.
  using D = Dual<1>;
  Mat3<D> md;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      md(i, j) = D(M0(i, j), Eigen::Matrix<double, 1, 1>(Dir(i, j)));
  const Mat3<D> f = matrix_fn(md);

  const double d = 1e-6;
  const Mat3<double> fp = matrix_fn(as_mat3(Tensor2(M0 + d * Dir)));
  const Mat3<double> fm = matrix_fn(as_mat3(Tensor2(M0 - d * Dir)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double fd = (fp(i, j) - fm(i, j)) / (2.0 * d);
      CHECK(f(i, j).d[0] == doctest::Approx(fd).epsilon(1e-6));
    }
}

} // TEST_SUITE("dual")
