#pragma once

#include <array>

#include <Eigen/Dense>

#include "lamfem/classify.hpp"

namespace lamfem {

struct Box {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 1.0, y1 = 1.0;
};

// Structured grid of congruent axis-aligned Q1 quadrilaterals with
// lexicographic numbering (x fastest).
struct Mesh {
  int nx = 1, ny = 1;
  Box box;

  double hx() const { return (box.x1 - box.x0) / nx; }
  double hy() const { return (box.y1 - box.y0) / ny; }

  int n_nodes() const { return (nx + 1) * (ny + 1); }
  int n_elements() const { return nx * ny; }

  int node_id(int i, int j) const { return i + j * (nx + 1); }

  Eigen::Vector2d node_coord(int n) const {
    const int i = n % (nx + 1);
    const int j = n / (nx + 1);
    return {box.x0 + i * hx(), box.y0 + j * hy()};
  }

  // Counterclockwise corner nodes: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
  std::array<int, 4> element_nodes(int e) const {
    const int i = e % nx;
    const int j = e / nx;
    return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
  }

  ElementGeometry element_geometry(int e) const {
    const int i = e % nx;
    const int j = e / nx;
    return {box.x0 + i * hx(), box.y0 + j * hy(), hx(), hy()};
  }
};

Mesh build_mesh(int nx, int ny, const Box& box);

} // namespace lamfem
