#include "lamfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "lamfem/parallel.hpp"

namespace lamfem {

namespace {

constexpr double kGaussAbscissa = 0.5773502691896257;  // 1/sqrt(3)

const std::array<Eigen::Vector2d, 4> kGaussRef = {
    Eigen::Vector2d{-kGaussAbscissa, -kGaussAbscissa},
    Eigen::Vector2d{kGaussAbscissa, -kGaussAbscissa},
    Eigen::Vector2d{kGaussAbscissa, kGaussAbscissa},
    Eigen::Vector2d{-kGaussAbscissa, kGaussAbscissa}};

constexpr std::array<double, 4> kXiA = {-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEtaA = {-1.0, -1.0, 1.0, 1.0};

std::vector<int> region_nodes(const Mesh& m, DirichletBC::Region r) {
  std::vector<int> nodes;
  const auto add_col = [&](int i) {
    for (int j = 0; j <= m.ny; ++j) nodes.push_back(m.node_id(i, j));
  };
  const auto add_row = [&](int j) {
    for (int i = 0; i <= m.nx; ++i) nodes.push_back(m.node_id(i, j));
  };
  switch (r) {
    case DirichletBC::Region::Left: add_col(0); break;
    case DirichletBC::Region::Right: add_col(m.nx); break;
    case DirichletBC::Region::Bottom: add_row(0); break;
    case DirichletBC::Region::Top: add_row(m.ny); break;
    case DirichletBC::Region::Boundary:
      for (int j = 0; j <= m.ny; ++j)
        for (int i = 0; i <= m.nx; ++i)
          if (i == 0 || i == m.nx || j == 0 || j == m.ny) nodes.push_back(m.node_id(i, j));
      break;
  }
  return nodes;
}

std::vector<int> face_nodes(const Mesh& m, Face f) {
  switch (f) {
    case Face::Left: return region_nodes(m, DirichletBC::Region::Left);
    case Face::Right: return region_nodes(m, DirichletBC::Region::Right);
    case Face::Bottom: return region_nodes(m, DirichletBC::Region::Bottom);
    case Face::Top: return region_nodes(m, DirichletBC::Region::Top);
  }
  return {};
}

[[noreturn]] void rethrow_located(int e, int g) {
  const std::string where = " (element " + std::to_string(e) + ", gauss point "
                          + std::to_string(g) + ")";
  try {
    throw;
  } catch (const LocalDivergence& err) {
    throw LocalDivergence(err.what() + where);
  } catch (const InterfaceDivergence& err) {
    throw InterfaceDivergence(err.what() + where);
  } catch (const NonPositiveJacobian& err) {
    throw NonPositiveJacobian(err.what() + where);
  } catch (const SingularAcousticTensor& err) {
    throw SingularAcousticTensor(err.what() + where);
  }
}

double von_mises(const Tensor2& sigma) {
  const Tensor2 s = dev(sigma);
  return std::sqrt(1.5 * ddot(s, s));
}

} // namespace

FemSystem::FemSystem(Problem p) : p_(std::move(p)) {
  if (p_.mesh.nx < 1 || p_.mesh.ny < 1) throw ConfigError("FemSystem: empty mesh");

  const double hx = p_.mesh.hx();
  const double hy = p_.mesh.hy();
  for (int g = 0; g < 4; ++g) {
    const double xi = kGaussRef[static_cast<std::size_t>(g)].x();
    const double et = kGaussRef[static_cast<std::size_t>(g)].y();
    for (int a = 0; a < 4; ++a) {
      const double dxi = 0.25 * kXiA[static_cast<std::size_t>(a)]
                       * (1.0 + kEtaA[static_cast<std::size_t>(a)] * et);
      const double det = 0.25 * kEtaA[static_cast<std::size_t>(a)]
                       * (1.0 + kXiA[static_cast<std::size_t>(a)] * xi);
      gp_[static_cast<std::size_t>(g)].dNdX(a, 0) = dxi * 2.0 / hx;
      gp_[static_cast<std::size_t>(g)].dNdX(a, 1) = det * 2.0 / hy;
    }
  }
  wdetJ_ = 0.25 * hx * hy;

  symmetric_ = !std::holds_alternative<J2Plastic>(p_.phase1)
            && !std::holds_alternative<J2Plastic>(p_.phase2);

  classify_all();
  build_constraints();
}

void FemSystem::classify_all() {
  const int ne = p_.mesh.n_elements();
  cls_.resize(static_cast<std::size_t>(ne));
  ela_phase_.resize(static_cast<std::size_t>(ne), 1);
  gpla_phase_.resize(static_cast<std::size_t>(ne), {1, 1, 1, 1});

  if (!p_.level_set) return;
  const LevelSet& ls = *p_.level_set;
  const std::vector<Eigen::Vector2d> qref(kGaussRef.begin(), kGaussRef.end());

  parallel_for(ne, [&](int e) {
    const ElementGeometry g = p_.mesh.element_geometry(e);
    cls_[static_cast<std::size_t>(e)] = classify_element(ls, g, p_.n_sub);
    ela_phase_[static_cast<std::size_t>(e)] = element_center_phase(ls, g);
    const std::vector<int> gm = gauss_phase_map(ls, g, qref);
    for (int q = 0; q < 4; ++q)
      gpla_phase_[static_cast<std::size_t>(e)][static_cast<std::size_t>(q)] =
          gm[static_cast<std::size_t>(q)];
  });
}

void FemSystem::build_constraints() {
  const Mesh& m = p_.mesh;
  const int ndof = 2 * m.n_nodes();

  enum : char { kFree = 0, kFixed = 1, kSlave = 2 };
  std::vector<char> kind(static_cast<std::size_t>(ndof), kFree);
  std::vector<double> fix_val(static_cast<std::size_t>(ndof), 0.0);
  std::vector<int> master(static_cast<std::size_t>(ndof), -1);
  std::vector<double> slave_off(static_cast<std::size_t>(ndof), 0.0);

  if (p_.periodic) {
    const Eigen::Matrix2d& A = p_.periodic->macro;
    const auto tie = [&](int slave_node, int master_node) {
      const Eigen::Vector2d off =
          A * (m.node_coord(slave_node) - m.node_coord(master_node));
      for (int c = 0; c < 2; ++c) {
        const int d = 2 * slave_node + c;
        kind[static_cast<std::size_t>(d)] = kSlave;
        master[static_cast<std::size_t>(d)] = 2 * master_node + c;
        slave_off[static_cast<std::size_t>(d)] = off[c];
      }
    };
    for (int j = 0; j <= m.ny; ++j) tie(m.node_id(m.nx, j), m.node_id(0, j));
    for (int i = 0; i < m.nx; ++i) tie(m.node_id(i, m.ny), m.node_id(i, 0));

    // Pin the master corner to the affine field: removes rigid translation.
    const int pin = m.node_id(0, 0);
    const Eigen::Vector2d u0 = A * m.node_coord(pin);
    for (int c = 0; c < 2; ++c) {
      const int d = 2 * pin + c;
      kind[static_cast<std::size_t>(d)] = kFixed;
      fix_val[static_cast<std::size_t>(d)] = u0[c];
    }
  }

  for (const DirichletBC& bc : p_.dirichlet) {
    for (int n : region_nodes(m, bc.region)) {
      const Eigen::Vector2d x = m.node_coord(n);
      const Eigen::Vector2d u = bc.value ? bc.value(x.x(), x.y()) : Eigen::Vector2d::Zero();
      for (int c = 0; c < 2; ++c) {
        if (!(c == 0 ? bc.fix_x : bc.fix_y)) continue;
        const int d = 2 * n + c;
        if (kind[static_cast<std::size_t>(d)] == kSlave)
          throw ConfigError("node is both periodic slave and Dirichlet-constrained");
        kind[static_cast<std::size_t>(d)] = kFixed;
        fix_val[static_cast<std::size_t>(d)] = u[c];
      }
    }
  }

  red_index_.assign(static_cast<std::size_t>(ndof), -1);
  offset_.assign(static_cast<std::size_t>(ndof), 0.0);
  n_red_ = 0;

  for (int d = 0; d < ndof; ++d) {
    if (kind[static_cast<std::size_t>(d)] == kFree) red_index_[static_cast<std::size_t>(d)] = n_red_++;
  }
  for (int d = 0; d < ndof; ++d) {
    switch (kind[static_cast<std::size_t>(d)]) {
      case kFree:
        break;
      case kFixed:
        offset_[static_cast<std::size_t>(d)] = fix_val[static_cast<std::size_t>(d)];
        break;
      case kSlave: {
        // Resolve master chains (right face -> left, top -> bottom, corners).
        int root = d;
        double off = 0.0;
        int guard = 0;
        while (kind[static_cast<std::size_t>(root)] == kSlave) {
          off += slave_off[static_cast<std::size_t>(root)];
          root = master[static_cast<std::size_t>(root)];
          if (++guard > ndof) throw ConfigError("cyclic periodic constraints");
        }
        if (kind[static_cast<std::size_t>(root)] == kFixed) {
          offset_[static_cast<std::size_t>(d)] = fix_val[static_cast<std::size_t>(root)] + off;
        } else {
          red_index_[static_cast<std::size_t>(d)] = red_index_[static_cast<std::size_t>(root)];
          offset_[static_cast<std::size_t>(d)] = off;
        }
        break;
      }
    }
  }
}

std::vector<GPState> FemSystem::virgin_states() const {
  return std::vector<GPState>(static_cast<std::size_t>(n_gauss()));
}

Eigen::VectorXd FemSystem::full_displacement(const Eigen::VectorXd& u_red, double lambda) const {
  const int ndof = 2 * p_.mesh.n_nodes();
  Eigen::VectorXd u(ndof);
  for (int d = 0; d < ndof; ++d) {
    const int r = red_index_[static_cast<std::size_t>(d)];
    u[d] = (r >= 0 ? u_red[r] : 0.0) + lambda * offset_[static_cast<std::size_t>(d)];
  }
  return u;
}

Eigen::VectorXd FemSystem::reduce(const Eigen::VectorXd& f_full) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_red_);
  for (int d = 0; d < f_full.size(); ++d) {
    const int idx = red_index_[static_cast<std::size_t>(d)];
    if (idx >= 0) r[idx] += f_full[d];
  }
  return r;
}

void FemSystem::element_force_and_stiffness(int e, const Eigen::Matrix<double, 8, 1>& ue,
                                            const GPState* states_n,
                                            Eigen::Matrix<double, 8, 1>& fe,
                                            Eigen::Matrix<double, 8, 8>& Ke,
                                            GPState* states_new) const {
  fe.setZero();
  Ke.setZero();

  for (int g = 0; g < 4; ++g) {
    const auto& dN = gp_[static_cast<std::size_t>(g)].dNdX;

    Tensor2 F = Tensor2::Identity();
    for (int a = 0; a < 4; ++a) {
      F(0, 0) += ue[2 * a] * dN(a, 0);
      F(0, 1) += ue[2 * a] * dN(a, 1);
      F(1, 0) += ue[2 * a + 1] * dN(a, 0);
      F(1, 1) += ue[2 * a + 1] * dN(a, 1);
    }

    Tensor2 P;
    Tensor4 L;
    GPState ns = states_n[g];

    const auto pure_point = [&](int phase) {
      const MaterialModel& mat = phase == 2 ? p_.phase2 : p_.phase1;
      const History& hn = phase == 2 ? states_n[g].h2 : states_n[g].h1;
      const StateUpdateResult r = state_update(mat, F, hn);
      P = r.P;
      L = phase_tangent(mat, F, r);
      (phase == 2 ? ns.h2 : ns.h1) = r.h;
    };

    try {
      switch (p_.method) {
        case MethodKind::ELA:
          pure_point(ela_phase_[static_cast<std::size_t>(e)]);
          break;
        case MethodKind::GPLA:
          pure_point(gpla_phase_[static_cast<std::size_t>(e)][static_cast<std::size_t>(g)]);
          break;
        case MethodKind::LET: {
          const ElementClassification& c = cls_[static_cast<std::size_t>(e)];
          if (!c.cut()) {
            pure_point(c.phase());
          } else {
            const LaminateConfig cfg{c.eta, c.N, p_.phase1, p_.phase2};
            const LaminateState sn{states_n[g].c, states_n[g].h1, states_n[g].h2};
            const LaminateResponse r = respond(F, cfg, sn);
            P = r.Pbar;
            L = r.L;
            ns.h1 = r.state.h1;
            ns.h2 = r.state.h2;
            ns.c = r.state.c;
          }
          break;
        }
      }
    } catch (const Error&) {
      rethrow_located(e, g);
    }

    states_new[g] = ns;

    for (int a = 0; a < 4; ++a)
      for (int I = 0; I < 2; ++I)
        fe[2 * a + I] += wdetJ_ * (P(I, 0) * dN(a, 0) + P(I, 1) * dN(a, 1));

    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int I = 0; I < 2; ++I)
          for (int J = 0; J < 2; ++J) {
            double s = 0.0;
            for (int j = 0; j < 2; ++j)
              for (int k = 0; k < 2; ++k) s += dN(a, j) * L(I, j, J, k) * dN(b, k);
            Ke(2 * a + I, 2 * b + J) += wdetJ_ * s;
          }
  }
}

void FemSystem::assemble(const Eigen::VectorXd& u_full, const std::vector<GPState>& states_n,
                         std::vector<GPState>& states_new, Eigen::VectorXd& f_int,
                         Eigen::SparseMatrix<double>* K_red) const {
  const Mesh& m = p_.mesh;
  const int ne = m.n_elements();
  states_new.resize(static_cast<std::size_t>(4 * ne));

  std::vector<Eigen::Matrix<double, 8, 1>> fe(static_cast<std::size_t>(ne));
  std::vector<Eigen::Matrix<double, 8, 8>> Ke(static_cast<std::size_t>(ne));

  parallel_for(ne, [&](int e) {
    const auto nodes = m.element_nodes(e);
    Eigen::Matrix<double, 8, 1> ue;
    for (int a = 0; a < 4; ++a) {
      ue[2 * a] = u_full[2 * nodes[static_cast<std::size_t>(a)]];
      ue[2 * a + 1] = u_full[2 * nodes[static_cast<std::size_t>(a)] + 1];
    }
    element_force_and_stiffness(e, ue, &states_n[static_cast<std::size_t>(4 * e)],
                                fe[static_cast<std::size_t>(e)], Ke[static_cast<std::size_t>(e)],
                                &states_new[static_cast<std::size_t>(4 * e)]);
  });

  // Serial scatter in element order: results do not depend on thread count.
  f_int = Eigen::VectorXd::Zero(2 * m.n_nodes());
  for (int e = 0; e < ne; ++e) {
    const auto nodes = m.element_nodes(e);
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c)
        f_int[2 * nodes[static_cast<std::size_t>(a)] + c] +=
            fe[static_cast<std::size_t>(e)][2 * a + c];
  }

  if (K_red) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(ne) * 64);
    for (int e = 0; e < ne; ++e) {
      const auto nodes = m.element_nodes(e);
      int gdof[8];
      for (int a = 0; a < 4; ++a) {
        gdof[2 * a] = 2 * nodes[static_cast<std::size_t>(a)];
        gdof[2 * a + 1] = 2 * nodes[static_cast<std::size_t>(a)] + 1;
      }
      for (int r = 0; r < 8; ++r) {
        const int rr = red_index_[static_cast<std::size_t>(gdof[r])];
        if (rr < 0) continue;
        for (int c = 0; c < 8; ++c) {
          const int cc = red_index_[static_cast<std::size_t>(gdof[c])];
          if (cc < 0) continue;
          trips.emplace_back(rr, cc, Ke[static_cast<std::size_t>(e)](r, c));
        }
      }
    }
    K_red->resize(n_red_, n_red_);
    K_red->setFromTriplets(trips.begin(), trips.end());
  }
}

Eigen::Vector2d FemSystem::face_reaction(const Eigen::VectorXd& f_int, Face f) const {
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  for (int n : face_nodes(p_.mesh, f)) {
    r.x() += f_int[2 * n];
    r.y() += f_int[2 * n + 1];
  }
  return r;
}

std::vector<double> FemSystem::classification_field() const {
  const int ne = p_.mesh.n_elements();
  std::vector<double> out(static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    switch (p_.method) {
      case MethodKind::ELA:
        out[static_cast<std::size_t>(e)] = ela_phase_[static_cast<std::size_t>(e)];
        break;
      case MethodKind::GPLA: {
        double s = 0.0;
        for (int g = 0; g < 4; ++g)
          s += gpla_phase_[static_cast<std::size_t>(e)][static_cast<std::size_t>(g)];
        out[static_cast<std::size_t>(e)] = s / 4.0;
        break;
      }
      case MethodKind::LET: {
        const ElementClassification& c = cls_[static_cast<std::size_t>(e)];
        out[static_cast<std::size_t>(e)] = c.cut() ? 1.0 + c.eta : c.phase();
        break;
      }
    }
  }
  return out;
}

namespace {

// Macroscopic Cauchy stress at a Gauss point of the committed state; for cut
// points under LET this is the averaged laminate stress.
Tensor2 committed_cauchy(const Problem& p, const ElementClassification& c, int phase_ela,
                         int phase_gpla, const Tensor2& F, const GPState& s) {
  Tensor2 P;
  switch (p.method) {
    case MethodKind::ELA:
      P = piola_stress(phase_ela == 2 ? p.phase2 : p.phase1, F,
                       phase_ela == 2 ? s.h2 : s.h1);
      break;
    case MethodKind::GPLA:
      P = piola_stress(phase_gpla == 2 ? p.phase2 : p.phase1, F,
                       phase_gpla == 2 ? s.h2 : s.h1);
      break;
    case MethodKind::LET:
      if (!c.cut()) {
        P = piola_stress(c.phase() == 2 ? p.phase2 : p.phase1, F,
                         c.phase() == 2 ? s.h2 : s.h1);
      } else {
        const LaminateConfig cfg{c.eta, c.N, p.phase1, p.phase2};
        const auto [F1, F2] = local_gradients(F, s.c, cfg);
        P = (1.0 - c.eta) * piola_stress(p.phase1, F1, s.h1)
          + c.eta * piola_stress(p.phase2, F2, s.h2);
      }
      break;
  }
  return P * F.transpose() / F.determinant();
}

} // namespace

std::vector<double> FemSystem::von_mises_field(const Eigen::VectorXd& u_full,
                                               const std::vector<GPState>& states) const {
  const Mesh& m = p_.mesh;
  const int ne = m.n_elements();
  std::vector<double> out(static_cast<std::size_t>(ne), 0.0);
  parallel_for(ne, [&](int e) {
    const auto nodes = m.element_nodes(e);
    Eigen::Matrix<double, 8, 1> ue;
    for (int a = 0; a < 4; ++a) {
      ue[2 * a] = u_full[2 * nodes[static_cast<std::size_t>(a)]];
      ue[2 * a + 1] = u_full[2 * nodes[static_cast<std::size_t>(a)] + 1];
    }
    double vm = 0.0;
    for (int g = 0; g < 4; ++g) {
      const auto& dN = gp_[static_cast<std::size_t>(g)].dNdX;
      Tensor2 F = Tensor2::Identity();
      for (int a = 0; a < 4; ++a) {
        F(0, 0) += ue[2 * a] * dN(a, 0);
        F(0, 1) += ue[2 * a] * dN(a, 1);
        F(1, 0) += ue[2 * a + 1] * dN(a, 0);
        F(1, 1) += ue[2 * a + 1] * dN(a, 1);
      }
      vm += von_mises(committed_cauchy(
          p_, cls_[static_cast<std::size_t>(e)], ela_phase_[static_cast<std::size_t>(e)],
          gpla_phase_[static_cast<std::size_t>(e)][static_cast<std::size_t>(g)], F,
          states[static_cast<std::size_t>(4 * e + g)]));
    }
    out[static_cast<std::size_t>(e)] = vm / 4.0;
  });
  return out;
}

std::vector<double> FemSystem::plastic_strain_field(const std::vector<GPState>& states) const {
  const int ne = p_.mesh.n_elements();
  std::vector<double> out(static_cast<std::size_t>(ne), 0.0);
  for (int e = 0; e < ne; ++e) {
    double g2 = 0.0;
    for (int g = 0; g < 4; ++g) {
      const GPState& s = states[static_cast<std::size_t>(4 * e + g)];
      if (p_.method == MethodKind::LET && cls_[static_cast<std::size_t>(e)].cut()) {
        const double eta = cls_[static_cast<std::size_t>(e)].eta;
        g2 += (1.0 - eta) * s.h1.gamma() + eta * s.h2.gamma();
      } else {
        g2 += s.h1.gamma() + s.h2.gamma();  // only the active phase ever grows
      }
    }
    out[static_cast<std::size_t>(e)] = g2 / 4.0;
  }
  return out;
}

double FemSystem::total_energy(const Eigen::VectorXd& u_full,
                               const std::vector<GPState>& states) const {
  const Mesh& m = p_.mesh;
  const int ne = m.n_elements();
  std::vector<double> we(static_cast<std::size_t>(ne), 0.0);
  parallel_for(ne, [&](int e) {
    const auto nodes = m.element_nodes(e);
    Eigen::Matrix<double, 8, 1> ue;
    for (int a = 0; a < 4; ++a) {
      ue[2 * a] = u_full[2 * nodes[static_cast<std::size_t>(a)]];
      ue[2 * a + 1] = u_full[2 * nodes[static_cast<std::size_t>(a)] + 1];
    }
    double w = 0.0;
    for (int g = 0; g < 4; ++g) {
      const auto& dN = gp_[static_cast<std::size_t>(g)].dNdX;
      Tensor2 F = Tensor2::Identity();
      for (int a = 0; a < 4; ++a) {
        F(0, 0) += ue[2 * a] * dN(a, 0);
        F(0, 1) += ue[2 * a] * dN(a, 1);
        F(1, 0) += ue[2 * a + 1] * dN(a, 0);
        F(1, 1) += ue[2 * a + 1] * dN(a, 1);
      }
      const GPState& s = states[static_cast<std::size_t>(4 * e + g)];
      switch (p_.method) {
        case MethodKind::ELA: {
          const int ph = ela_phase_[static_cast<std::size_t>(e)];
          w += energy(ph == 2 ? p_.phase2 : p_.phase1, F, ph == 2 ? s.h2 : s.h1);
          break;
        }
        case MethodKind::GPLA: {
          const int ph = gpla_phase_[static_cast<std::size_t>(e)][static_cast<std::size_t>(g)];
          w += energy(ph == 2 ? p_.phase2 : p_.phase1, F, ph == 2 ? s.h2 : s.h1);
          break;
        }
        case MethodKind::LET: {
          const ElementClassification& c = cls_[static_cast<std::size_t>(e)];
          if (!c.cut()) {
            w += energy(c.phase() == 2 ? p_.phase2 : p_.phase1, F,
                        c.phase() == 2 ? s.h2 : s.h1);
          } else {
            const LaminateConfig cfg{c.eta, c.N, p_.phase1, p_.phase2};
            const auto [F1, F2] = local_gradients(F, s.c, cfg);
            w += (1.0 - c.eta) * energy(p_.phase1, F1, s.h1)
               + c.eta * energy(p_.phase2, F2, s.h2);
          }
          break;
        }
      }
    }
    we[static_cast<std::size_t>(e)] = w * wdetJ_;
  });
  double total = 0.0;
  for (double w : we) total += w;
  return total;
}

NewtonResult newton_solve(const FemSystem& sys, double lambda,
                          const Eigen::VectorXd& u_red0, const std::vector<GPState>& states_n,
                          double tangent_scale) {
  const Problem& p = sys.problem();
  NewtonResult res;
  res.u_red = u_red0;
  std::vector<GPState> states_new;
  Eigen::VectorXd f_int;
  Eigen::SparseMatrix<double> K;

  double scale = 0.0;
  for (int it = 0; it <= p.max_newton_iter; ++it) {
    const Eigen::VectorXd u_full = sys.full_displacement(res.u_red, lambda);
    sys.assemble(u_full, states_n, states_new, f_int, &K);
    const Eigen::VectorXd r = sys.reduce(f_int);
    const double rn = r.norm();
    res.residual_norms.push_back(rn);

    if (it == 0) scale = std::max(rn, f_int.norm());
    if (rn <= p.tol_newton * std::max(scale, f_int.norm()) || rn <= 1e-300) {
      res.converged = true;
      res.iterations = it;
      res.states = std::move(states_new);
      res.f_int = std::move(f_int);
      return res;
    }
    if (it == p.max_newton_iter) break;

    if (tangent_scale != 1.0) K *= tangent_scale;

    Eigen::VectorXd du;
    if (sys.symmetric_tangent()) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
      if (solver.info() != Eigen::Success)
        throw GlobalDivergence("sparse factorization failed");
      du = solver.solve(-r);
    } else {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> solver(K);
      if (solver.info() != Eigen::Success)
        throw GlobalDivergence("sparse factorization failed");
      du = solver.solve(-r);
    }

    // Backtracking line search on the force residual. Full steps overshoot when
    // cut-element jump roots move fast near phase yield transitions; a trial
    // point that breaks a local solve counts as overshoot, not failure.
    bool accepted = false;
    double s = 1.0;
    for (int half = 0; half < 9; ++half, s *= 0.5) {
      const Eigen::VectorXd u_try = res.u_red + s * du;
      try {
        sys.assemble(sys.full_displacement(u_try, lambda), states_n, states_new, f_int,
                     nullptr);
      } catch (const Error&) {
        continue;
      }
      if (sys.reduce(f_int).norm() < rn) {
        res.u_red = u_try;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw GlobalDivergence("Newton line search could not reduce the residual");
    res.iterations = it + 1;
  }
  throw GlobalDivergence("Newton did not converge within the iteration limit");
}

Trajectory run_load_steps(const FemSystem& sys, const std::vector<double>& lambdas) {
  const Problem& p = sys.problem();
  Trajectory traj;
  traj.states = sys.virgin_states();
  Eigen::VectorXd u_red = Eigen::VectorXd::Zero(sys.n_reduced());
  Eigen::VectorXd u_prev = u_red;
  double committed = 0.0;
  double lam_prev = 0.0;
  bool have_prev = false;

  for (const double target : lambdas) {
    int halvings = 0;
    double d = target - committed;
    while (std::abs(target - committed) > 0.0) {
      const double lam = committed + d;
      // Secant predictor: start from the extrapolated previous solution so the
      // first iterate already sits past material-state transitions.
      Eigen::VectorXd u0 = u_red;
      if (have_prev && committed != lam_prev) {
        const double ratio =
            std::clamp((lam - committed) / (committed - lam_prev), -2.0, 2.0);
        u0 += ratio * (u_red - u_prev);
      }
      try {
        NewtonResult nr = newton_solve(sys, lam, u0, traj.states);
        u_prev = u_red;
        lam_prev = committed;
        have_prev = true;
        u_red = nr.u_red;
        traj.states = std::move(nr.states);
        committed = lam;

        StepRecord rec;
        rec.lambda = lam;
        rec.iterations = nr.iterations;
        rec.residual_norms = std::move(nr.residual_norms);
        for (int f = 0; f < 4; ++f)
          rec.face_reactions[static_cast<std::size_t>(f)] =
              sys.face_reaction(nr.f_int, static_cast<Face>(f));
        traj.steps.push_back(std::move(rec));

        d = target - committed;
      } catch (const GlobalDivergence& e) {
        if (++halvings > p.max_halvings)
          throw GlobalDivergence("load step failed after halving the increment "
                                 + std::to_string(p.max_halvings) + " times (last: "
                                 + e.what() + ")");
        d *= 0.5;
      } catch (const Error& e) {
        if (++halvings > p.max_halvings)
          throw GlobalDivergence("load step failed after halving the increment "
                                 + std::to_string(p.max_halvings) + " times (last: "
                                 + e.what() + ")");
        d *= 0.5;
      }
    }
  }

  traj.u = sys.full_displacement(u_red, committed);
  return traj;
}

} // namespace lamfem
