#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace lamfem {

// Forward-mode dual number carrying N derivative slots. Used to obtain the
// exact Jacobians of the return mapping and the phase tangents without
// hand-deriving fourth-order expressions.
template <int N>
struct Dual {
  double v = 0.0;
  Eigen::Matrix<double, N, 1> d = Eigen::Matrix<double, N, 1>::Zero();

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, const Eigen::Matrix<double, N, 1>& deriv) : v(value), d(deriv) {}

  static Dual seed(double value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
  }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
};

template <int N> Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}
template <int N> Dual<N> log(const Dual<N>& x) {
  return {std::log(x.v), x.d / x.v};
}
template <int N> Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}

inline double value(double x) { return x; }
template <int N> double value(const Dual<N>& x) { return x.v; }

using std::exp;
using std::log;
using std::sqrt;

// Minimal 3x3 matrix over any scalar (double or Dual). Eigen's fixed-size
// matrices are deliberately not used here: the dual scalar does not model
// Eigen's full scalar concept, and the handful of products below is all the
// constitutive code needs.
template <typename T>
struct Mat3 {
  std::array<T, 9> a{};

  T& operator()(int i, int j) { return a[static_cast<std::size_t>(3 * i + j)]; }
  const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(3 * i + j)]; }

  static Mat3 zero() { return Mat3{}; }
  static Mat3 identity() {
    Mat3 m;
    m(0, 0) = T(1.0); m(1, 1) = T(1.0); m(2, 2) = T(1.0);
    return m;
  }

  Mat3& operator+=(const Mat3& o) {
    for (int n = 0; n < 9; ++n) a[static_cast<std::size_t>(n)] += o.a[static_cast<std::size_t>(n)];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int n = 0; n < 9; ++n) a[static_cast<std::size_t>(n)] -= o.a[static_cast<std::size_t>(n)];
    return *this;
  }
  friend Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
  friend Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }

  friend Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        T s = x(i, 0) * y(0, j);
        s += x(i, 1) * y(1, j);
        s += x(i, 2) * y(2, j);
        r(i, j) = s;
      }
    return r;
  }
  friend Mat3 operator*(const T& s, Mat3 x) {
    for (T& e : x.a) e = s * e;
    return x;
  }
};

template <typename T> Mat3<T> transpose(const Mat3<T>& m) {
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(j, i);
  return r;
}

template <typename T> T trace(const Mat3<T>& m) {
  return m(0, 0) + m(1, 1) + m(2, 2);
}

template <typename T> T det(const Mat3<T>& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
       - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
       + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Adjugate-based inverse; caller guarantees det != 0 (constitutive code
// checks det F > 0 before entering templated territory).
template <typename T> Mat3<T> inverse(const Mat3<T>& m) {
  const T d = det(m);
  Mat3<T> r;
  r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
  r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
  r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
  r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
  r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
  r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
  r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
  r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
  r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
  return r;
}

// Matrix exponential by scaling-and-squaring with a truncated Taylor series;
// the scaling decision looks at value parts only, so the whole computation
// stays differentiable.
template <typename T> Mat3<T> mexp(const Mat3<T>& m) {
  double nrm = 0.0;
  for (const T& e : m.a) nrm += value(e) * value(e);
  nrm = std::sqrt(nrm);

  int s = 0;
  while (nrm > 0.25) {
    nrm *= 0.5;
    ++s;
  }
  const T scale = T(1.0 / std::pow(2.0, s));
  Mat3<T> b = scale * m;
  Mat3<T> term = Mat3<T>::identity();
  Mat3<T> sum = Mat3<T>::identity();
  for (int k = 1; k < 20; ++k) {
    term = T(1.0 / k) * (term * b);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

} // namespace lamfem
