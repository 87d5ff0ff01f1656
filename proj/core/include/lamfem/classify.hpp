#pragma once

#include <vector>

#include "lamfem/level_set.hpp"
#include "lamfem/tensor.hpp"

namespace lamfem {

// Axis-aligned rectangular element of the structured mesh.
struct ElementGeometry {
  double x0 = 0.0, y0 = 0.0;
  double hx = 1.0, hy = 1.0;

  double cx() const { return x0 + 0.5 * hx; }
  double cy() const { return y0 + 0.5 * hy; }
};

struct ElementClassification {
  enum class Kind { Phase1, Phase2, Cut };
  Kind kind = Kind::Phase1;
  double eta = 0.0;              // phase-2 fraction, meaningful for Cut
  Vector3 N = Vector3::Zero();   // unit normal (N3 = 0), phase 1 -> phase 2

  bool cut() const { return kind == Kind::Cut; }
  int phase() const { return kind == Kind::Phase2 ? 2 : 1; }
};

// Pure-phase / cut decision with volume fraction and interface normal.
// Planar level sets take an exact geometric path (clipped polygon area and
// the plane's own normal); everything else is classified from an
// n_sub x n_sub midpoint sample of the sign and the sample-averaged gradient.
// Fractions within 1e-6 of 0 or 1 snap to the pure phases.
ElementClassification classify_element(const LevelSet& ls, const ElementGeometry& g,
                                       int n_sub = 32);

// Phase-2 area fraction by midpoint subsampling.
double volume_fraction(const LevelSet& ls, const ElementGeometry& g, int n_sub);

// Exact phase-2 area fraction of a half-plane cut, by polygon clipping.
double plane_cut_fraction(const ElementGeometry& g, const PlaneGeometry& plane);

// Phase at the element centroid (phi = 0 resolves to phase 1).
int element_center_phase(const LevelSet& ls, const ElementGeometry& g);

// Per-point phases for quadrature points given in reference coordinates
// ([-1,1]^2 on the element).
std::vector<int> gauss_phase_map(const LevelSet& ls, const ElementGeometry& g,
                                 const std::vector<Eigen::Vector2d>& qpoints);

} // namespace lamfem
