#include "lamfem/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lamfem/errors.hpp"

namespace lamfem {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) throw ConfigError("unknown key \"" + it.key() + "\" in " + path);
  }
}

const json& req(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing required key \"") + key + "\"");
  return *it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double num_or(const json& j, const std::string& path, const char* key, double dflt) {
  const auto it = j.find(key);
  return it == j.end() ? dflt : num(*it, path + "." + key);
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

int int_or(const json& j, const std::string& path, const char* key, int dflt) {
  const auto it = j.find(key);
  return it == j.end() ? dflt : integer(*it, path + "." + key);
}

bool bool_or(const json& j, const std::string& path, const char* key, bool dflt) {
  const auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::Vector2d vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected an array of 2 numbers");
  return {num(j[0], path), num(j[1], path)};
}

Eigen::Matrix2d mat2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a 2x2 array");
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 2) fail(path, "expected a 2x2 array");
    for (int c = 0; c < 2; ++c)
      m(r, c) = num(row[static_cast<std::size_t>(c)], path);
  }
  return m;
}

MaterialModel parse_material(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string type = str(req(j, path, "type"), path + ".type");

  if (type == "linear_elastic") {
    check_keys(j, path, {"type", "E", "nu", "eigenstrain"});
    LinearElastic m;
    m.E = num(req(j, path, "E"), path + ".E");
    m.nu = num(req(j, path, "nu"), path + ".nu");
    if (m.E <= 0.0) fail(path + ".E", "must be positive");
    if (m.nu <= -1.0 || m.nu >= 0.5) fail(path + ".nu", "must lie in (-1, 0.5)");
    if (const auto it = j.find("eigenstrain"); it != j.end()) {
      const std::string p = path + ".eigenstrain";
      if (!it->is_array() || it->size() != 6) fail(p, "expected an array of 6 numbers");
      Voigt6 v;
      for (int k = 0; k < 6; ++k) v[k] = num((*it)[static_cast<std::size_t>(k)], p);
      m.eigenstrain = from_voigt(v);
    }
    return m;
  }
  if (type == "neo_hookean") {
    check_keys(j, path, {"type", "mu", "lambda"});
    NeoHookean m;
    m.mu = num(req(j, path, "mu"), path + ".mu");
    m.lambda = num(req(j, path, "lambda"), path + ".lambda");
    if (m.mu <= 0.0) fail(path + ".mu", "must be positive");
    return m;
  }
  if (type == "j2_plastic") {
    check_keys(j, path, {"type", "mu", "lambda", "sigma0", "hardening"});
    J2Plastic m;
    m.mu = num(req(j, path, "mu"), path + ".mu");
    m.lambda = num(req(j, path, "lambda"), path + ".lambda");
    m.sigma0 = num(req(j, path, "sigma0"), path + ".sigma0");
    m.hardening = num_or(j, path, "hardening", 0.0);
    if (m.mu <= 0.0) fail(path + ".mu", "must be positive");
    if (m.sigma0 <= 0.0) fail(path + ".sigma0", "must be positive");
    return m;
  }
  fail(path + ".type", "unknown material type \"" + type + "\"");
}

LevelSetPtr parse_level_set(const json& j, const std::string& path,
                            const std::string& base_dir) {
  if (j.is_null()) return nullptr;
  if (!j.is_object()) fail(path, "expected an object or null");
  const std::string type = str(req(j, path, "type"), path + ".type");

  if (type == "circle") {
    check_keys(j, path, {"type", "center", "radius"});
    return std::make_shared<CircleLevelSet>(vec2(req(j, path, "center"), path + ".center"),
                                            num(req(j, path, "radius"), path + ".radius"));
  }
  if (type == "plane") {
    check_keys(j, path, {"type", "point", "normal"});
    return std::make_shared<PlaneLevelSet>(vec2(req(j, path, "point"), path + ".point"),
                                           vec2(req(j, path, "normal"), path + ".normal"));
  }
  if (type == "union" || type == "intersection") {
    check_keys(j, path, {"type", "a", "b"});
    auto a = parse_level_set(req(j, path, "a"), path + ".a", base_dir);
    auto b = parse_level_set(req(j, path, "b"), path + ".b", base_dir);
    if (!a || !b) fail(path, "children must not be null");
    if (type == "union") return std::make_shared<UnionLevelSet>(std::move(a), std::move(b));
    return std::make_shared<IntersectionLevelSet>(std::move(a), std::move(b));
  }
  if (type == "complement") {
    check_keys(j, path, {"type", "a"});
    auto a = parse_level_set(req(j, path, "a"), path + ".a", base_dir);
    if (!a) fail(path, "child must not be null");
    return std::make_shared<ComplementLevelSet>(std::move(a));
  }
  if (type == "sampled") {
    check_keys(j, path, {"type", "file"});
    const std::string file = str(req(j, path, "file"), path + ".file");
    const std::filesystem::path p(file);
    const std::string full = p.is_absolute() ? file : (std::filesystem::path(base_dir) / p).string();
    return SampledLevelSet::load(full);
  }
  fail(path + ".type", "unknown level set type \"" + type + "\"");
}

DirichletBC::Region region_from_string(const std::string& s, const std::string& path) {
  if (s == "left") return DirichletBC::Region::Left;
  if (s == "right") return DirichletBC::Region::Right;
  if (s == "bottom") return DirichletBC::Region::Bottom;
  if (s == "top") return DirichletBC::Region::Top;
  if (s == "boundary") return DirichletBC::Region::Boundary;
  fail(path, "unknown face \"" + s + "\" (expected left/right/bottom/top/boundary)");
}

void parse_bc(const json& j, const std::string& path, Problem& p) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string type = str(req(j, path, "type"), path + ".type");

  if (type == "affine") {
    check_keys(j, path, {"type", "gradient"});
    const Eigen::Matrix2d G = mat2(req(j, path, "gradient"), path + ".gradient");
    DirichletBC bc;
    bc.region = DirichletBC::Region::Boundary;
    bc.value = [G](double x, double y) { return Eigen::Vector2d(G * Eigen::Vector2d(x, y)); };
    p.dirichlet.push_back(std::move(bc));
    return;
  }
  if (type == "periodic") {
    check_keys(j, path, {"type", "gradient"});
    p.periodic = PeriodicBC{mat2(req(j, path, "gradient"), path + ".gradient")};
    return;
  }
  if (type == "faces") {
    check_keys(j, path, {"type", "faces"});
    const json& arr = req(j, path, "faces");
    if (!arr.is_array() || arr.empty()) fail(path + ".faces", "expected a non-empty array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string ep = path + ".faces[" + std::to_string(k) + "]";
      const json& f = arr[k];
      if (!f.is_object()) fail(ep, "expected an object");
      check_keys(f, ep, {"face", "ux", "uy"});
      DirichletBC bc;
      bc.region = region_from_string(str(req(f, ep, "face"), ep + ".face"), ep + ".face");
      bc.fix_x = f.contains("ux");
      bc.fix_y = f.contains("uy");
      if (!bc.fix_x && !bc.fix_y) fail(ep, "at least one of ux, uy must be given");
      const double ux = num_or(f, ep, "ux", 0.0);
      const double uy = num_or(f, ep, "uy", 0.0);
      bc.value = [ux, uy](double, double) { return Eigen::Vector2d(ux, uy); };
      p.dirichlet.push_back(std::move(bc));
    }
    return;
  }
  fail(path + ".type", "unknown bc type \"" + type + "\"");
}

std::vector<double> parse_load(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (const auto it = j.find("schedule"); it != j.end()) {
    check_keys(j, path, {"schedule"});
    if (!it->is_array() || it->empty()) fail(path + ".schedule", "expected a non-empty array");
    std::vector<double> s;
    for (const json& v : *it) s.push_back(num(v, path + ".schedule"));
    return s;
  }
  check_keys(j, path, {"n_steps", "amplitude", "cycle"});
  const int n = int_or(j, path, "n_steps", 1);
  const double amp = num_or(j, path, "amplitude", 1.0);
  const bool cycle = bool_or(j, path, "cycle", false);
  if (n < 1) fail(path + ".n_steps", "must be at least 1");
  std::vector<double> s;
  for (int k = 1; k <= n; ++k) s.push_back(amp * k / n);
  if (cycle)
    for (int k = n - 1; k >= 0; --k) s.push_back(amp * k / n);
  return s;
}

Mesh parse_mesh(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path, {"nx", "ny", "box"});
  const int nx = integer(req(j, path, "nx"), path + ".nx");
  const int ny = int_or(j, path, "ny", nx);
  Box box;
  if (const auto it = j.find("box"); it != j.end()) {
    const std::string p = path + ".box";
    if (!it->is_array() || it->size() != 4) fail(p, "expected an array of 4 numbers");
    box = {num((*it)[0], p), num((*it)[1], p), num((*it)[2], p), num((*it)[3], p)};
  }
  return build_mesh(nx, ny, box);
}

OutputConfig parse_output(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path, {"dir", "tag", "vtk", "csv", "reaction_face"});
  OutputConfig out;
  if (const auto it = j.find("dir"); it != j.end()) out.dir = str(*it, path + ".dir");
  if (const auto it = j.find("tag"); it != j.end()) out.tag = str(*it, path + ".tag");
  out.vtk = bool_or(j, path, "vtk", true);
  out.csv = bool_or(j, path, "csv", true);
  if (const auto it = j.find("reaction_face"); it != j.end())
    out.reaction_face = face_from_string(str(*it, path + ".reaction_face"));
  return out;
}

RunConfig build_run_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config root: expected an object");
  check_keys(j, "config", {"mesh", "method", "phase1", "phase2", "level_set", "n_sub",
                           "bc", "load", "solver", "output", "study"});

  RunConfig cfg;
  cfg.problem.mesh = parse_mesh(req(j, "config", "mesh"), "mesh");

  if (const auto it = j.find("method"); it != j.end())
    cfg.problem.method = method_from_string(str(*it, "method"));

  cfg.problem.phase1 = j.contains("phase1") ? parse_material(j["phase1"], "phase1")
                                            : MaterialModel{LinearElastic{}};
  cfg.problem.phase2 = j.contains("phase2") ? parse_material(j["phase2"], "phase2")
                                            : MaterialModel{LinearElastic{}};

  if (const auto it = j.find("level_set"); it != j.end())
    cfg.problem.level_set = parse_level_set(*it, "level_set", base_dir);

  cfg.problem.n_sub = int_or(j, "config", "n_sub", 32);
  if (cfg.problem.n_sub < 1) fail("n_sub", "must be at least 1");

  if (const auto it = j.find("bc"); it != j.end()) parse_bc(*it, "bc", cfg.problem);
  if (const auto it = j.find("load"); it != j.end()) cfg.schedule = parse_load(*it, "load");

  if (const auto it = j.find("solver"); it != j.end()) {
    check_keys(*it, "solver", {"tol_newton", "max_iterations", "max_halvings"});
    cfg.problem.tol_newton = num_or(*it, "solver", "tol_newton", 1e-10);
    cfg.problem.max_newton_iter = int_or(*it, "solver", "max_iterations", 15);
    cfg.problem.max_halvings = int_or(*it, "solver", "max_halvings", 8);
    if (cfg.problem.tol_newton <= 0.0) fail("solver.tol_newton", "must be positive");
  }

  if (const auto it = j.find("output"); it != j.end())
    cfg.output = parse_output(*it, "output");
  return cfg;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ReferenceSpec parse_reference(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string type = str(req(j, path, "type"), path + ".type");
  ReferenceSpec ref;
  if (type == "analytic_planar") {
    check_keys(j, path, {"type", "strain"});
    ref.kind = ReferenceSpec::Kind::AnalyticPlanar;
    const Eigen::Matrix2d e = mat2(req(j, path, "strain"), path + ".strain");
    ref.strain = Tensor2::Zero();
    ref.strain.topLeftCorner<2, 2>() = 0.5 * (e + e.transpose());
  } else if (type == "analytic_eigenstrain") {
    check_keys(j, path, {"type", "direction", "magnitude"});
    ref.kind = ReferenceSpec::Kind::AnalyticEigenstrain;
    ref.direction = vec2(req(j, path, "direction"), path + ".direction");
    ref.magnitude = num(req(j, path, "magnitude"), path + ".magnitude");
  } else if (type == "overkill") {
    check_keys(j, path, {"type", "nx"});
    ref.kind = ReferenceSpec::Kind::Overkill;
    ref.nx = integer(req(j, path, "nx"), path + ".nx");
    if (ref.nx < 1) fail(path + ".nx", "must be at least 1");
  } else {
    fail(path + ".type", "unknown reference type \"" + type + "\"");
  }
  return ref;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  const json j = parse_text(json_text);
  if (j.is_object() && j.contains("study"))
    throw ConfigError("config: \"study\" section present; this is a study config");
  return build_run_config(j, base_dir);
}

StudyConfig parse_study_config(const std::string& json_text, const std::string& base_dir) {
  const json j = parse_text(json_text);
  if (!j.is_object()) throw ConfigError("config root: expected an object");
  StudyConfig cfg;
  cfg.base = build_run_config(j, base_dir);

  const json& s = req(j, "config", "study");
  check_keys(s, "study", {"resolutions", "methods", "reference"});

  const json& res = req(s, "study", "resolutions");
  if (!res.is_array() || res.empty()) fail("study.resolutions", "expected a non-empty array");
  for (const json& v : res) {
    const int n = integer(v, "study.resolutions");
    if (n < 1) fail("study.resolutions", "entries must be at least 1");
    cfg.resolutions.push_back(n);
  }

  if (const auto it = s.find("methods"); it != s.end()) {
    if (!it->is_array() || it->empty()) fail("study.methods", "expected a non-empty array");
    cfg.methods.clear();
    for (const json& v : *it) cfg.methods.push_back(method_from_string(str(v, "study.methods")));
  }

  cfg.reference = parse_reference(req(s, "study", "reference"), "study.reference");
  return cfg;
}

PathConfig parse_path_config(const std::string& json_text, const std::string& /*base_dir*/) {
  const json j = parse_text(json_text);
  if (!j.is_object()) throw ConfigError("config root: expected an object");
  check_keys(j, "config", {"phase1", "phase2", "eta", "normal", "component", "amplitude",
                           "n_steps", "cycle", "output"});
  PathConfig cfg;
  cfg.laminate.phase1 = parse_material(req(j, "config", "phase1"), "phase1");
  cfg.laminate.phase2 = parse_material(req(j, "config", "phase2"), "phase2");
  cfg.laminate.eta = num_or(j, "config", "eta", 0.5);
  if (cfg.laminate.eta < 0.0 || cfg.laminate.eta > 1.0) fail("eta", "must lie in [0, 1]");
  if (const auto it = j.find("normal"); it != j.end()) {
    const Eigen::Vector2d n = vec2(*it, "normal");
    if (n.norm() == 0.0) fail("normal", "must be nonzero");
    cfg.laminate.N = Vector3(n.x(), n.y(), 0.0).normalized();
  }
  if (const auto it = j.find("component"); it != j.end()) {
    const std::string p = "component";
    if (!it->is_array() || it->size() != 2) fail(p, "expected an array of 2 indices");
    cfg.row = integer((*it)[0], p);
    cfg.col = integer((*it)[1], p);
    if (cfg.row < 0 || cfg.row > 2 || cfg.col < 0 || cfg.col > 2)
      fail(p, "indices must lie in 0..2");
  }
  cfg.amplitude = num_or(j, "config", "amplitude", 0.05);
  cfg.n_steps = int_or(j, "config", "n_steps", 20);
  if (cfg.n_steps < 1) fail("n_steps", "must be at least 1");
  cfg.cycle = bool_or(j, "config", "cycle", false);
  if (const auto it = j.find("output"); it != j.end()) cfg.output = parse_output(*it, "output");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path), std::filesystem::path(path).parent_path().string());
}

StudyConfig load_study_config(const std::string& path) {
  return parse_study_config(read_file(path), std::filesystem::path(path).parent_path().string());
}

PathConfig load_path_config(const std::string& path) {
  return parse_path_config(read_file(path), std::filesystem::path(path).parent_path().string());
}

MethodKind method_from_string(const std::string& s) {
  if (s == "ela") return MethodKind::ELA;
  if (s == "gpla") return MethodKind::GPLA;
  if (s == "let") return MethodKind::LET;
  throw ConfigError("unknown method \"" + s + "\" (expected ela, gpla, or let)");
}

std::string to_string(MethodKind m) {
  switch (m) {
    case MethodKind::ELA: return "ela";
    case MethodKind::GPLA: return "gpla";
    case MethodKind::LET: return "let";
  }
  return "?";
}

Face face_from_string(const std::string& s) {
  if (s == "left") return Face::Left;
  if (s == "right") return Face::Right;
  if (s == "bottom") return Face::Bottom;
  if (s == "top") return Face::Top;
  throw ConfigError("unknown face \"" + s + "\" (expected left, right, bottom, or top)");
}

} // namespace lamfem
