#include "lamfem/classify.hpp"

#include <array>
#include <cmath>

#include "lamfem/errors.hpp"

namespace lamfem {

namespace {

constexpr double kEtaSnap = 1e-6;

int phase_of(double phi) { return phi > 0.0 ? 2 : 1; }

} // namespace

double volume_fraction(const LevelSet& ls, const ElementGeometry& g, int n_sub) {
  if (n_sub < 1) throw ConfigError("volume_fraction requires n_sub >= 1");
  long hits = 0;
  for (int j = 0; j < n_sub; ++j) {
    const double y = g.y0 + (j + 0.5) * g.hy / n_sub;
    for (int i = 0; i < n_sub; ++i) {
      const double x = g.x0 + (i + 0.5) * g.hx / n_sub;
      if (ls(x, y) > 0.0) ++hits;
    }
  }
  return static_cast<double>(hits) / (static_cast<double>(n_sub) * n_sub);
}

double plane_cut_fraction(const ElementGeometry& g, const PlaneGeometry& plane) {
  // Clip the rectangle against the half-plane phi > 0 (Sutherland-Hodgman).
  std::array<Eigen::Vector2d, 8> poly{};
  int n = 4;
  poly[0] = {g.x0, g.y0};
  poly[1] = {g.x0 + g.hx, g.y0};
  poly[2] = {g.x0 + g.hx, g.y0 + g.hy};
  poly[3] = {g.x0, g.y0 + g.hy};

  std::array<Eigen::Vector2d, 8> out{};
  int m = 0;
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d& a = poly[k];
    const Eigen::Vector2d& b = poly[(k + 1) % n];
    const double fa = plane.normal.dot(a - plane.point);
    const double fb = plane.normal.dot(b - plane.point);
    if (fa > 0.0) out[m++] = a;
    if ((fa > 0.0) != (fb > 0.0)) out[m++] = a + (fa / (fa - fb)) * (b - a);
  }
  if (m < 3) return 0.0;

  double area2 = 0.0;
  for (int k = 0; k < m; ++k) {
    const Eigen::Vector2d& a = out[k];
    const Eigen::Vector2d& b = out[(k + 1) % m];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(area2) / (g.hx * g.hy);
}

int element_center_phase(const LevelSet& ls, const ElementGeometry& g) {
  return phase_of(ls(g.cx(), g.cy()));
}

std::vector<int> gauss_phase_map(const LevelSet& ls, const ElementGeometry& g,
                                 const std::vector<Eigen::Vector2d>& qpoints) {
  std::vector<int> phases;
  phases.reserve(qpoints.size());
  for (const auto& q : qpoints) {
    const double x = g.x0 + 0.5 * (q.x() + 1.0) * g.hx;
    const double y = g.y0 + 0.5 * (q.y() + 1.0) * g.hy;
    phases.push_back(phase_of(ls(x, y)));
  }
  return phases;
}

ElementClassification classify_element(const LevelSet& ls, const ElementGeometry& g,
                                       int n_sub) {
  ElementClassification cls;

  if (const auto plane = ls.as_plane()) {
    const double eta = plane_cut_fraction(g, *plane);
    if (eta <= kEtaSnap) {
      cls.kind = ElementClassification::Kind::Phase1;
      return cls;
    }
    if (eta >= 1.0 - kEtaSnap) {
      cls.kind = ElementClassification::Kind::Phase2;
      return cls;
    }
    cls.kind = ElementClassification::Kind::Cut;
    cls.eta = eta;
    cls.N = Vector3(plane->normal.x(), plane->normal.y(), 0.0);
    return cls;
  }

  if (n_sub < 1) throw ConfigError("classify_element requires n_sub >= 1");
  long hits = 0;
  Eigen::Vector2d gsum = Eigen::Vector2d::Zero();
  double gmag = 0.0;
  for (int j = 0; j < n_sub; ++j) {
    const double y = g.y0 + (j + 0.5) * g.hy / n_sub;
    for (int i = 0; i < n_sub; ++i) {
      const double x = g.x0 + (i + 0.5) * g.hx / n_sub;
      if (ls(x, y) > 0.0) ++hits;
      const Eigen::Vector2d grad = ls.gradient(x, y);
      gsum += grad;
      gmag += grad.norm();
    }
  }
  const double total = static_cast<double>(n_sub) * n_sub;
  const double eta = static_cast<double>(hits) / total;

  if (eta <= kEtaSnap) {
    cls.kind = ElementClassification::Kind::Phase1;
    return cls;
  }
  if (eta >= 1.0 - kEtaSnap) {
    cls.kind = ElementClassification::Kind::Phase2;
    return cls;
  }

  // Averaged gradient over the sample grid; a vanishing average on a cut
  // element (flat field or perfectly cancelling interfaces) has no usable
  // lamination direction.
  const Eigen::Vector2d gavg = gsum / total;
  if (gmag / total < 1e-300 || gavg.norm() < 1e-8 * (gmag / total))
    throw DegenerateLevelSet("level-set gradient vanishes on a cut element");

  cls.kind = ElementClassification::Kind::Cut;
  cls.eta = eta;
  const Eigen::Vector2d n = gavg.normalized();
  cls.N = Vector3(n.x(), n.y(), 0.0);
  return cls;
}

} // namespace lamfem
