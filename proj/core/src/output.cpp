#include "lamfem/output.hpp"

#include <fstream>
#include <iomanip>

#include "lamfem/errors.hpp"

namespace lamfem {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

const char* face_name(Face f) {
  switch (f) {
    case Face::Left: return "left";
    case Face::Right: return "right";
    case Face::Bottom: return "bottom";
    case Face::Top: return "top";
  }
  return "?";
}

void write_cell_scalars(std::ostream& out, const std::string& name,
                        const std::vector<double>& v) {
  out << "SCALARS " << name << " double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double x : v) out << x << "\n";
}

} // namespace

void write_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& u_full,
               const CellFields& cells, const std::string& title) {
  std::ofstream out = open_out(path);
  out << std::setprecision(12);

  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  const int nn = mesh.n_nodes();
  out << "POINTS " << nn << " double\n";
  for (int n = 0; n < nn; ++n) {
    const Eigen::Vector2d x = mesh.node_coord(n);
    out << x.x() << " " << x.y() << " 0\n";
  }

  const int ne = mesh.n_elements();
  out << "CELLS " << ne << " " << 5 * ne << "\n";
  for (int e = 0; e < ne; ++e) {
    const auto n = mesh.element_nodes(e);
    out << "4 " << n[0] << " " << n[1] << " " << n[2] << " " << n[3] << "\n";
  }
  out << "CELL_TYPES " << ne << "\n";
  for (int e = 0; e < ne; ++e) out << "9\n";

  out << "POINT_DATA " << nn << "\n";
  out << "VECTORS displacement double\n";
  for (int n = 0; n < nn; ++n) out << u_full[2 * n] << " " << u_full[2 * n + 1] << " 0\n";

  out << "CELL_DATA " << ne << "\n";
  write_cell_scalars(out, "classification", cells.classification);
  write_cell_scalars(out, "von_mises", cells.von_mises);
  write_cell_scalars(out, "eq_plastic_strain", cells.eq_plastic_strain);
}

void write_history_csv(const std::string& path, const std::vector<StepRecord>& steps,
                       Face reaction_face) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  out << "step,lambda,newton_iterations,reaction_" << face_name(reaction_face)
      << "_x,reaction_" << face_name(reaction_face) << "_y\n";
  int k = 0;
  for (const StepRecord& s : steps) {
    const Eigen::Vector2d r = s.face_reactions[static_cast<std::size_t>(reaction_face)];
    out << ++k << "," << s.lambda << "," << s.iterations << "," << r.x() << "," << r.y() << "\n";
  }
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  out << "h,ndof,error_L2_displacement,error_energy,wall_time\n";
  for (const ConvergenceRow& r : rows)
    out << r.h << "," << r.ndof << "," << r.error_L2_displacement << "," << r.error_energy
        << "," << r.wall_time << "\n";
}

void write_classification_csv(const std::string& path, const Mesh& mesh,
                              const std::vector<ElementClassification>& cls) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  out << "element,i,j,kind,eta,normal_x,normal_y\n";
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementClassification& c = cls[static_cast<std::size_t>(e)];
    const char* kind = c.cut() ? "cut" : (c.phase() == 2 ? "phase2" : "phase1");
    out << e << "," << e % mesh.nx << "," << e / mesh.nx << "," << kind << ","
        << (c.cut() ? c.eta : (c.phase() == 2 ? 1.0 : 0.0)) << ","
        << c.N.x() << "," << c.N.y() << "\n";
  }
}

} // namespace lamfem
