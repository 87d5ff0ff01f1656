#include "lamfem/study.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "lamfem/errors.hpp"

namespace lamfem {

namespace {

constexpr double kGaussAbscissa = 0.5773502691896257;

const std::array<Eigen::Vector2d, 4> kGaussRef = {
    Eigen::Vector2d{-kGaussAbscissa, -kGaussAbscissa},
    Eigen::Vector2d{kGaussAbscissa, -kGaussAbscissa},
    Eigen::Vector2d{kGaussAbscissa, kGaussAbscissa},
    Eigen::Vector2d{-kGaussAbscissa, kGaussAbscissa}};

Eigen::Vector4d shape_values(double xi, double eta) {
  return {0.25 * (1.0 - xi) * (1.0 - eta), 0.25 * (1.0 + xi) * (1.0 - eta),
          0.25 * (1.0 + xi) * (1.0 + eta), 0.25 * (1.0 - xi) * (1.0 + eta)};
}

Eigen::Vector2d interp(const Mesh& m, const Eigen::VectorXd& u, int e, double xi, double eta) {
  const Eigen::Vector4d N = shape_values(xi, eta);
  const auto nodes = m.element_nodes(e);
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int a = 0; a < 4; ++a) {
    v.x() += N[a] * u[2 * nodes[static_cast<std::size_t>(a)]];
    v.y() += N[a] * u[2 * nodes[static_cast<std::size_t>(a)] + 1];
  }
  return v;
}

Tensor2 small_strain_of(const LinearElastic& m, const Tensor2& eps) {
  const Tensor2 e = eps - m.eigenstrain;
  return m.lambda() * e.trace() * Tensor2::Identity() + 2.0 * m.mu() * e;
}

} // namespace

PlanarTwoPhaseSolution planar_two_phase_solution(const LinearElastic& m1,
                                                 const LinearElastic& m2,
                                                 const PlaneGeometry& plane,
                                                 const Tensor2& eps1) {
  const Vector3 N(plane.normal.x(), plane.normal.y(), 0.0);
  const Tensor2 sigma1 = small_strain_of(m1, eps1);

  // Traction continuity is affine in the jump: ac(C2) c = (sigma1 - sigma2(eps1)) N.
  const Tensor4 C2 = isotropic_stiffness(m2.lambda(), m2.mu());
  const Eigen::Matrix3d K = acoustic(C2, N);
  const Vector3 rhs = (sigma1 - small_strain_of(m2, eps1)) * N;
  const Vector3 c = K.fullPivLu().solve(rhs);

  const Tensor2 eps2 = eps1 + sym(dyad(c, N));
  const Tensor2 sigma2 = small_strain_of(m2, eps2);

  PlanarTwoPhaseSolution sol;
  sol.c = c;
  sol.energy_density_1 = 0.5 * ddot(sigma1, eps1 - m1.eigenstrain);
  sol.energy_density_2 = 0.5 * ddot(sigma2, eps2 - m2.eigenstrain);

  const Eigen::Vector2d p = plane.point;
  const Eigen::Vector2d n2 = plane.normal;
  const Eigen::Matrix2d E1 = eps1.topLeftCorner<2, 2>();
  const Eigen::Vector2d c2(c.x(), c.y());
  sol.u = [p, n2, E1, c2](double x, double y) {
    const Eigen::Vector2d X(x, y);
    const double xi = n2.dot(X - p);
    return Eigen::Vector2d(E1 * X + std::max(xi, 0.0) * c2);
  };
  return sol;
}

DisplacementField eigenstrain_step_field(const PlaneGeometry& plane,
                                         const Eigen::Vector2d& a, double s) {
  const Eigen::Vector2d p = plane.point;
  const Eigen::Vector2d n = plane.normal;
  return [p, n, a, s](double x, double y) {
    const double xi = n.dot(Eigen::Vector2d(x, y) - p);
    return Eigen::Vector2d(s * std::max(xi, 0.0) * a);
  };
}

Tensor2 matching_eigenstrain(const PlaneGeometry& plane, const Eigen::Vector2d& a, double s) {
  const Vector3 av(a.x(), a.y(), 0.0);
  const Vector3 N(plane.normal.x(), plane.normal.y(), 0.0);
  return sym(dyad(s * av, N));
}

double l2_error(const Mesh& mesh, const Eigen::VectorXd& u_full, const DisplacementField& ref) {
  Eigen::VectorXd ur(2 * mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const Eigen::Vector2d x = mesh.node_coord(n);
    const Eigen::Vector2d v = ref(x.x(), x.y());
    ur[2 * n] = v.x();
    ur[2 * n + 1] = v.y();
  }

  const double w = 0.25 * mesh.hx() * mesh.hy();
  double err2 = 0.0, norm2 = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (const Eigen::Vector2d& q : kGaussRef) {
      const Eigen::Vector2d dh = interp(mesh, u_full, e, q.x(), q.y())
                               - interp(mesh, ur, e, q.x(), q.y());
      const Eigen::Vector2d rv = interp(mesh, ur, e, q.x(), q.y());
      err2 += w * dh.squaredNorm();
      norm2 += w * rv.squaredNorm();
    }
  }
  return norm2 > 0.0 ? std::sqrt(err2 / norm2) : std::sqrt(err2);
}

double l2_error(const Mesh& coarse, const Eigen::VectorXd& u_coarse, const Mesh& fine,
                const Eigen::VectorXd& u_fine) {
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); };
  if (!close(coarse.box.x0, fine.box.x0) || !close(coarse.box.y0, fine.box.y0)
      || !close(coarse.box.x1, fine.box.x1) || !close(coarse.box.y1, fine.box.y1))
    throw MeshMismatch("meshes cover different boxes");
  if (fine.nx % coarse.nx != 0 || fine.ny % coarse.ny != 0)
    throw MeshMismatch("fine resolution is not an integer multiple of the coarse one");

  const double w = 0.25 * fine.hx() * fine.hy();
  double err2 = 0.0, norm2 = 0.0;
  for (int e = 0; e < fine.n_elements(); ++e) {
    const ElementGeometry g = fine.element_geometry(e);
    for (const Eigen::Vector2d& q : kGaussRef) {
      const double x = g.x0 + 0.5 * (1.0 + q.x()) * g.hx;
      const double y = g.y0 + 0.5 * (1.0 + q.y()) * g.hy;
      const Eigen::Vector2d uf = interp(fine, u_fine, e, q.x(), q.y());

      int ci = static_cast<int>((x - coarse.box.x0) / coarse.hx());
      int cj = static_cast<int>((y - coarse.box.y0) / coarse.hy());
      ci = std::min(std::max(ci, 0), coarse.nx - 1);
      cj = std::min(std::max(cj, 0), coarse.ny - 1);
      const ElementGeometry cg = coarse.element_geometry(ci + cj * coarse.nx);
      const double xi = 2.0 * (x - cg.x0) / cg.hx - 1.0;
      const double eta = 2.0 * (y - cg.y0) / cg.hy - 1.0;
      const Eigen::Vector2d uc = interp(coarse, u_coarse, ci + cj * coarse.nx, xi, eta);

      err2 += w * (uf - uc).squaredNorm();
      norm2 += w * uf.squaredNorm();
    }
  }
  return norm2 > 0.0 ? std::sqrt(err2 / norm2) : std::sqrt(err2);
}

namespace {

int scaled_ny(const Mesh& base, int nx) {
  const double aspect = static_cast<double>(base.ny) / base.nx;
  return std::max(1, static_cast<int>(std::lround(nx * aspect)));
}

} // namespace

std::vector<StudyResult> run_study(const StudyConfig& cfg) {
  const Problem& base = cfg.base.problem;

  DisplacementField ref_field;
  double ref_energy = 0.0;
  Mesh ref_mesh;
  Eigen::VectorXd ref_u;
  bool analytic = false;
  std::vector<DirichletBC> bcs = base.dirichlet;

  switch (cfg.reference.kind) {
    case ReferenceSpec::Kind::AnalyticPlanar: {
      if (!base.level_set) throw ConfigError("analytic reference requires a level set");
      const auto plane = base.level_set->as_plane();
      if (!plane) throw ConfigError("analytic planar reference requires a plane level set");
      if (!is_linear_elastic(base.phase1) || !is_linear_elastic(base.phase2))
        throw ConfigError("analytic planar reference requires linear elastic phases");
      const PlanarTwoPhaseSolution sol = planar_two_phase_solution(
          std::get<LinearElastic>(base.phase1), std::get<LinearElastic>(base.phase2), *plane,
          cfg.reference.strain);
      ref_field = sol.u;
      analytic = true;
      const Box& b = base.mesh.box;
      const double f =
          plane_cut_fraction({b.x0, b.y0, b.x1 - b.x0, b.y1 - b.y0}, *plane);
      ref_energy = (b.x1 - b.x0) * (b.y1 - b.y0)
                 * ((1.0 - f) * sol.energy_density_1 + f * sol.energy_density_2);
      bcs = {DirichletBC{DirichletBC::Region::Boundary, true, true, ref_field}};
      break;
    }
    case ReferenceSpec::Kind::AnalyticEigenstrain: {
      if (!base.level_set) throw ConfigError("analytic reference requires a level set");
      const auto plane = base.level_set->as_plane();
      if (!plane) throw ConfigError("analytic eigenstrain reference requires a plane level set");
      ref_field = eigenstrain_step_field(*plane, cfg.reference.direction, cfg.reference.magnitude);
      analytic = true;
      ref_energy = 0.0;  // the exact field is stress free
      bcs = {DirichletBC{DirichletBC::Region::Boundary, true, true, ref_field}};
      break;
    }
    case ReferenceSpec::Kind::Overkill: {
      Problem pref = base;
      pref.method = MethodKind::LET;
      pref.mesh = build_mesh(cfg.reference.nx, scaled_ny(base.mesh, cfg.reference.nx),
                             base.mesh.box);
      FemSystem sys(pref);
      const Trajectory traj = run_load_steps(sys, cfg.base.schedule);
      ref_mesh = pref.mesh;
      ref_u = traj.u;
      ref_energy = sys.total_energy(traj.u, traj.states);
      break;
    }
  }

  std::vector<StudyResult> results;
  for (const MethodKind method : cfg.methods) {
    StudyResult sr;
    sr.method = method;
    for (const int n : cfg.resolutions) {
      Problem p = base;
      p.method = method;
      p.mesh = build_mesh(n, scaled_ny(base.mesh, n), base.mesh.box);
      p.dirichlet = bcs;

      const auto t0 = std::chrono::steady_clock::now();
      FemSystem sys(p);
      const Trajectory traj = run_load_steps(sys, cfg.base.schedule);
      const auto t1 = std::chrono::steady_clock::now();

      ConvergenceRow row;
      row.h = std::max(p.mesh.hx(), p.mesh.hy());
      row.ndof = 2 * p.mesh.n_nodes();
      row.error_L2_displacement = analytic ? l2_error(p.mesh, traj.u, ref_field)
                                           : l2_error(p.mesh, traj.u, ref_mesh, ref_u);
      const double eh = sys.total_energy(traj.u, traj.states);
      row.error_energy = std::abs(ref_energy) > 1e-300
                             ? std::abs(eh - ref_energy) / std::abs(ref_energy)
                             : std::abs(eh);
      row.wall_time = std::chrono::duration<double>(t1 - t0).count();
      sr.rows.push_back(row);
    }
    results.push_back(std::move(sr));
  }
  return results;
}

void write_study_csvs(const std::string& dir, const std::vector<StudyResult>& results) {
  std::filesystem::create_directories(dir);
  for (const StudyResult& sr : results) {
    const std::filesystem::path p =
        std::filesystem::path(dir) / ("study_" + to_string(sr.method) + ".csv");
    write_convergence_csv(p.string(), sr.rows);
  }
}

} // namespace lamfem
