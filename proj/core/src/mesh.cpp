#include "lamfem/mesh.hpp"

#include "lamfem/errors.hpp"

namespace lamfem {

Mesh build_mesh(int nx, int ny, const Box& box) {
  if (nx < 1 || ny < 1) throw ConfigError("mesh requires nx, ny >= 1");
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
    throw ConfigError("mesh box must have positive extent");
  return Mesh{nx, ny, box};
}

} // namespace lamfem
