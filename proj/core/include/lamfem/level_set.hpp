#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "lamfem/tensor.hpp"

namespace lamfem {

// Exact plane parameters, reported by level sets that are (possibly wrapped)
// planes so that classification can use exact geometry instead of sampling.
struct PlaneGeometry {
  Eigen::Vector2d point;
  Eigen::Vector2d normal;  // unit, points into the phi > 0 side
};

// Scalar field whose sign assigns phases: phi > 0 is phase 2, phi < 0 is
// phase 1 (phi = 0 resolves to phase 1 everywhere in this library).
class LevelSet {
public:
  virtual ~LevelSet() = default;

  virtual double operator()(double x, double y) const = 0;

  // Spatial gradient; default is central differencing, overridden where an
  // analytic form exists.
  virtual Eigen::Vector2d gradient(double x, double y) const;

  virtual std::optional<PlaneGeometry> as_plane() const { return std::nullopt; }
};

using LevelSetPtr = std::shared_ptr<const LevelSet>;

// phi = r - |x - center|: positive (phase 2) inside the circle.
class CircleLevelSet final : public LevelSet {
public:
  CircleLevelSet(const Eigen::Vector2d& center, double radius);
  double operator()(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;

private:
  Eigen::Vector2d center_;
  double radius_;
};

// phi = n . (x - p) with unit n.
class PlaneLevelSet final : public LevelSet {
public:
  PlaneLevelSet(const Eigen::Vector2d& point, const Eigen::Vector2d& normal);
  double operator()(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;
  std::optional<PlaneGeometry> as_plane() const override;

private:
  Eigen::Vector2d point_;
  Eigen::Vector2d normal_;
};

// max of the children: union of the phase-2 regions.
class UnionLevelSet final : public LevelSet {
public:
  UnionLevelSet(LevelSetPtr a, LevelSetPtr b) : a_(std::move(a)), b_(std::move(b)) {}
  double operator()(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;

private:
  LevelSetPtr a_, b_;
};

// min of the children: intersection of the phase-2 regions.
class IntersectionLevelSet final : public LevelSet {
public:
  IntersectionLevelSet(LevelSetPtr a, LevelSetPtr b) : a_(std::move(a)), b_(std::move(b)) {}
  double operator()(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;

private:
  LevelSetPtr a_, b_;
};

class ComplementLevelSet final : public LevelSet {
public:
  explicit ComplementLevelSet(LevelSetPtr a) : a_(std::move(a)) {}
  double operator()(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;
  std::optional<PlaneGeometry> as_plane() const override;

private:
  LevelSetPtr a_;
};

// Bilinear interpolation of nodal values on a regular background grid.
// Queries outside the grid clamp to the boundary.
class SampledLevelSet final : public LevelSet {
public:
  SampledLevelSet(int nx, int ny, double x0, double y0, double dx, double dy,
                  std::vector<double> values);

  double operator()(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;

  // Plain-text format: header line "nx ny x0 y0 dx dy", then nx*ny values in
  // row-major order (x fastest, rows advancing in y).
  static std::shared_ptr<SampledLevelSet> read(std::istream& in);
  static std::shared_ptr<SampledLevelSet> load(const std::string& path);

private:
  double at(int i, int j) const { return values_[static_cast<std::size_t>(j * nx_ + i)]; }
  void locate(double x, double y, int& i, int& j, double& s, double& t) const;

  int nx_, ny_;
  double x0_, y0_, dx_, dy_;
  std::vector<double> values_;
};

} // namespace lamfem
