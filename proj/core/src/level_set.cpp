#include "lamfem/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lamfem/errors.hpp"

namespace lamfem {

Eigen::Vector2d LevelSet::gradient(double x, double y) const {
  const double h = 1e-6 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
  const LevelSet& f = *this;
  return {(f(x + h, y) - f(x - h, y)) / (2.0 * h),
          (f(x, y + h) - f(x, y - h)) / (2.0 * h)};
}

CircleLevelSet::CircleLevelSet(const Eigen::Vector2d& center, double radius)
    : center_(center), radius_(radius) {
  if (!(radius > 0.0)) throw ConfigError("circle level set requires radius > 0");
}

double CircleLevelSet::operator()(double x, double y) const {
  return radius_ - (Eigen::Vector2d(x, y) - center_).norm();
}

Eigen::Vector2d CircleLevelSet::gradient(double x, double y) const {
  const Eigen::Vector2d d = Eigen::Vector2d(x, y) - center_;
  const double r = d.norm();
  if (r < 1e-300) return Eigen::Vector2d::Zero();  // singular at the center
  return -d / r;
}

PlaneLevelSet::PlaneLevelSet(const Eigen::Vector2d& point, const Eigen::Vector2d& normal)
    : point_(point), normal_(normal) {
  const double n = normal_.norm();
  if (n < 1e-300) throw ConfigError("plane level set requires a nonzero normal");
  normal_ /= n;
}

double PlaneLevelSet::operator()(double x, double y) const {
  return normal_.dot(Eigen::Vector2d(x, y) - point_);
}

Eigen::Vector2d PlaneLevelSet::gradient(double, double) const { return normal_; }

std::optional<PlaneGeometry> PlaneLevelSet::as_plane() const {
  return PlaneGeometry{point_, normal_};
}

double UnionLevelSet::operator()(double x, double y) const {
  return std::max((*a_)(x, y), (*b_)(x, y));
}

Eigen::Vector2d UnionLevelSet::gradient(double x, double y) const {
  return (*a_)(x, y) >= (*b_)(x, y) ? a_->gradient(x, y) : b_->gradient(x, y);
}

double IntersectionLevelSet::operator()(double x, double y) const {
  return std::min((*a_)(x, y), (*b_)(x, y));
}

Eigen::Vector2d IntersectionLevelSet::gradient(double x, double y) const {
  return (*a_)(x, y) <= (*b_)(x, y) ? a_->gradient(x, y) : b_->gradient(x, y);
}

double ComplementLevelSet::operator()(double x, double y) const { return -(*a_)(x, y); }

Eigen::Vector2d ComplementLevelSet::gradient(double x, double y) const {
  return -a_->gradient(x, y);
}

std::optional<PlaneGeometry> ComplementLevelSet::as_plane() const {
  auto p = a_->as_plane();
  if (!p) return std::nullopt;
  return PlaneGeometry{p->point, -p->normal};
}

SampledLevelSet::SampledLevelSet(int nx, int ny, double x0, double y0, double dx, double dy,
                                 std::vector<double> values)
    : nx_(nx), ny_(ny), x0_(x0), y0_(y0), dx_(dx), dy_(dy), values_(std::move(values)) {
  if (nx_ < 2 || ny_ < 2) throw ConfigError("sampled level set needs at least a 2x2 grid");
  if (!(dx_ > 0.0) || !(dy_ > 0.0)) throw ConfigError("sampled level set spacing must be positive");
  if (values_.size() != static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_))
    throw ConfigError("sampled level set value count does not match grid size");
}

void SampledLevelSet::locate(double x, double y, int& i, int& j, double& s, double& t) const {
  double u = (x - x0_) / dx_;
  double v = (y - y0_) / dy_;
  u = std::clamp(u, 0.0, static_cast<double>(nx_ - 1));
  v = std::clamp(v, 0.0, static_cast<double>(ny_ - 1));
  i = std::min(static_cast<int>(u), nx_ - 2);
  j = std::min(static_cast<int>(v), ny_ - 2);
  s = u - i;
  t = v - j;
}

double SampledLevelSet::operator()(double x, double y) const {
  int i, j;
  double s, t;
  locate(x, y, i, j, s, t);
  return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j)
       + (1 - s) * t * at(i, j + 1) + s * t * at(i + 1, j + 1);
}

Eigen::Vector2d SampledLevelSet::gradient(double x, double y) const {
  int i, j;
  double s, t;
  locate(x, y, i, j, s, t);
  const double gx = ((1 - t) * (at(i + 1, j) - at(i, j))
                   + t * (at(i + 1, j + 1) - at(i, j + 1))) / dx_;
  const double gy = ((1 - s) * (at(i, j + 1) - at(i, j))
                   + s * (at(i + 1, j + 1) - at(i + 1, j))) / dy_;
  return {gx, gy};
}

std::shared_ptr<SampledLevelSet> SampledLevelSet::read(std::istream& in) {
  int nx = 0, ny = 0;
  double x0, y0, dx, dy;
  if (!(in >> nx >> ny >> x0 >> y0 >> dx >> dy))
    throw ConfigError("sampled level set: malformed header (want: nx ny x0 y0 dx dy)");
  if (nx < 2 || ny < 2) throw ConfigError("sampled level set: grid too small");
  std::vector<double> values(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (double& v : values)
    if (!(in >> v)) throw ConfigError("sampled level set: not enough values for grid");
  return std::make_shared<SampledLevelSet>(nx, ny, x0, y0, dx, dy, std::move(values));
}

std::shared_ptr<SampledLevelSet> SampledLevelSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open level-set file: " + path);
  return read(in);
}

} // namespace lamfem
