#include "kvdg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace kvdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

bool to_double(const std::string& s, double& v) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  v = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(v);
}

// Line numbers of "key = value" entries, by section, for error messages.
using LineIndex = std::map<std::string, std::map<std::string, int>>;

LineIndex index_lines(const std::string& text) {
  LineIndex idx;
  std::istringstream in(text);
  std::string line, section;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      idx[section]["["] = n;
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) idx[section][trim(t.substr(0, eq))] = n;
  }
  return idx;
}

class Section {
 public:
  Section(std::string name, const boost::property_tree::ptree* tree, const LineIndex& idx)
      : name_(std::move(name)), idx_(idx) {
    if (!tree) return;
    for (const auto& [key, child] : *tree) values_[key] = trim(child.data());
  }

  int line(const std::string& key) const {
    auto s = idx_.find(name_);
    if (s == idx_.end()) return 1;
    auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
    auto h = s->second.find("[");
    return h != s->second.end() ? h->second : 1;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ParseError("config", line(key), "[" + name_ + "] " + key + ": " + what);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> text(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  std::optional<double> number(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    double v = 0.0;
    if (!to_double(*t, v)) fail(key, "expected a number, got '" + *t + "'");
    return v;
  }

  std::optional<int> integer(const std::string& key) {
    auto v = number(key);
    if (!v) return std::nullopt;
    if (std::floor(*v) != *v || std::abs(*v) > 2e9) fail(key, "expected an integer");
    return static_cast<int>(*v);
  }

  std::optional<bool> boolean(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    std::string s = *t;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    fail(key, "expected true or false, got '" + *t + "'");
  }

  // Wraps a parser so that ConfigErrors carry this key's line.
  template <class F>
  auto parsed(const std::string& key, F&& f) -> std::optional<decltype(f(std::string()))> {
    auto t = text(key);
    if (!t) return std::nullopt;
    try {
      return f(*t);
    } catch (const ParseError&) {
      throw;
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  void mark_used(const std::string& key) { used_.insert(key); }

  void check_unused() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) fail(k, "unknown key");
  }

 private:
  std::string name_;
  const LineIndex& idx_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

Vec2 parse_point(const std::string& s) {
  auto v = parse_number_list(s, "point");
  if (v.size() != 2) throw ConfigError("config", "expected 'x, y', got '" + s + "'");
  return Vec2(v[0], v[1]);
}

std::vector<Vec2> parse_points(const std::string& s) {
  std::vector<Vec2> out;
  for (const auto& part : split(s, ';'))
    if (!part.empty()) out.push_back(parse_point(part));
  return out;
}

std::vector<Probe> parse_probes(const std::string& s) {
  std::vector<Probe> out;
  for (const auto& part : split(s, ';')) {
    if (part.empty()) continue;
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError("config", "probe '" + part + "' must be 'name: x, y'");
    Probe p;
    p.name = trim(part.substr(0, colon));
    if (p.name.empty() || p.name.find(',') != std::string::npos)
      throw ConfigError("config", "invalid probe name in '" + part + "'");
    p.x = parse_point(part.substr(colon + 1));
    out.push_back(p);
  }
  return out;
}

BcType parse_bc(const std::string& s) {
  if (s == "dirichlet") return BcType::kDirichlet;
  if (s == "neumann") return BcType::kNeumann;
  throw ConfigError("config", "boundary condition must be dirichlet or neumann, got '" + s + "'");
}

SourceKind parse_source_kind(const std::string& s) {
  if (s == "none") return SourceKind::kNone;
  if (s == "point") return SourceKind::kPointForce;
  if (s == "moment") return SourceKind::kMomentTensor;
  if (s == "injection") return SourceKind::kInjection;
  throw ConfigError("config", "source kind must be none, point, moment or injection, got '" + s + "'");
}

std::string source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::kPointForce: return "point";
    case SourceKind::kMomentTensor: return "moment";
    case SourceKind::kInjection: return "injection";
    default: return "none";
  }
}

const char* kTagNames[] = {"", "bottom", "right", "top", "left"};

const std::set<std::string> kMaterialKeys = {"rho",  "mu",   "lambda", "delta1", "delta2", "gamma",
                                             "d0",   "D",    "Dxx",    "Dxy",    "Dyy",    "tau1",
                                             "tau2", "tau",  "rho_f",  "porosity"};

}  // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), ',', ' ');
  std::istringstream in(norm);
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    if (!to_double(tok, v)) throw ConfigError("config", "invalid number '" + tok + "' in " + what);
    out.push_back(v);
  }
  return out;
}

Rect parse_domain(const std::string& text) {
  auto v = parse_number_list(text, "domain");
  Rect r;
  if (v.size() == 2) r = Rect{0.0, 0.0, v[0], v[1]};
  else if (v.size() == 4) r = Rect{v[0], v[1], v[2], v[3]};
  else throw ConfigError("config", "domain must be 'W, H' or 'xmin, ymin, xmax, ymax'");
  if (!r.valid()) throw ConfigError("config", "domain has nonpositive extent");
  return r;
}

int parse_boundary_tag(const std::string& text) {
  for (int t = 1; t <= 4; ++t)
    if (text == kTagNames[t]) return t;
  double v = 0.0;
  if (to_double(text, v) && v == std::floor(v) && v >= 0 && v < 1e9) return static_cast<int>(v);
  throw ConfigError("config", "unknown boundary tag '" + text + "'");
}

void RunConfig::validate() const {
  if (!mesh.domain.valid()) throw ConfigError("mesh", "domain has nonpositive extent");
  if (mesh.degree < 1 || mesh.degree > 8) throw ConfigError("basis", "degree must be in 1..8");
  switch (mesh.kind) {
    case MeshSpec::Kind::kVoronoi:
      if (mesh.elements < 2) throw ConfigError("mesh", "at least two Voronoi elements are required");
      if (mesh.lloyd_iters < 0) throw ConfigError("mesh", "lloyd iterations must be >= 0");
      break;
    case MeshSpec::Kind::kCartesian:
      if (mesh.nx < 1 || mesh.ny < 1) throw ConfigError("mesh", "nx and ny must be positive");
      break;
    case MeshSpec::Kind::kFile:
      if (mesh.file.empty()) throw ConfigError("mesh", "mesh type file requires a file name");
      break;
  }
  const bool raster = !coefficients.rasters.empty() || coefficients.channel.has_value();
  if (raster && mesh.kind != MeshSpec::Kind::kCartesian)
    throw ConfigError("models", "raster coefficient fields require a cartesian mesh");
  for (const auto& [k, p] : coefficients.rasters)
    if (!kMaterialKeys.count(k) || k == "tau") throw ConfigError("models", "raster for unknown parameter '" + k + "'");

  time.integrator.validate();
  if (source.kind == SourceKind::kPointForce || source.kind == SourceKind::kMomentTensor ||
      source.kind == SourceKind::kInjection) {
    if (source.kind != SourceKind::kInjection) {
      const Vec2& x = source.location;
      if (x.x() < mesh.domain.xmin || x.x() > mesh.domain.xmax || x.y() < mesh.domain.ymin ||
          x.y() > mesh.domain.ymax)
        throw ConfigError("models", "source location lies outside the domain");
      if (source.kind == SourceKind::kPointForce && !(source.direction.norm() > 0.0))
        throw ConfigError("models", "point force direction must be nonzero");
    }
  }
  for (const auto& p : output.probes) {
    const Vec2& x = p.x;
    if (x.x() < mesh.domain.xmin || x.x() > mesh.domain.xmax || x.y() < mesh.domain.ymin ||
        x.y() > mesh.domain.ymax)
      throw ConfigError("cli", "probe '" + p.name + "' lies outside the domain");
  }
  for (double t : output.snapshots)
    if (t < 0.0 || t > time.integrator.t_final + 1e-12)
      throw ConfigError("cli", "snapshot time " + std::to_string(t) + " outside [0, t_final]");
  if (output.grid_nx < 0 || output.grid_ny < 0 || (output.grid_nx > 0) != (output.grid_ny > 0))
    throw ConfigError("cli", "output grid must be two positive sizes");
  if (threads < 0) throw ConfigError("cli", "threads must be >= 0");
}

RunConfig parse_run_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ParseError("config", static_cast<int>(std::max<unsigned long>(1, e.line())), e.message());
    }
  }
  const LineIndex idx = index_lines(text);
  static const std::set<std::string> known = {"run",    "mesh", "coefficients", "sources",
                                              "bc",     "penalty", "time",      "output"};
  for (const auto& [name, child] : tree) {
    if (!known.count(name)) {
      auto it = idx.find(name);
      const int line = it != idx.end() && it->second.count("[") ? it->second.at("[") : 1;
      if (child.empty() && !child.data().empty())
        throw ParseError("config", line, "key '" + name + "' outside a section");
      throw ParseError("config", line, "unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    auto c = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
    return Section(name, c ? &*c : nullptr, idx);
  };

  RunConfig c;

  Section run = section("run");
  if (auto v = run.text("name")) c.name = *v;
  if (auto v = run.integer("threads")) c.threads = *v;
  run.check_unused();

  Section m = section("mesh");
  if (auto v = m.text("type")) {
    if (*v == "voronoi") c.mesh.kind = MeshSpec::Kind::kVoronoi;
    else if (*v == "cartesian") c.mesh.kind = MeshSpec::Kind::kCartesian;
    else if (*v == "file") c.mesh.kind = MeshSpec::Kind::kFile;
    else m.fail("type", "expected voronoi, cartesian or file");
  }
  if (auto v = m.parsed("domain", parse_domain)) c.mesh.domain = *v;
  if (auto v = m.integer("elements")) c.mesh.elements = *v;
  if (auto v = m.integer("nx")) c.mesh.nx = *v;
  if (auto v = m.integer("ny")) c.mesh.ny = *v;
  if (auto v = m.integer("lloyd")) c.mesh.lloyd_iters = *v;
  if (auto v = m.number("seed")) {
    if (*v < 0 || std::floor(*v) != *v) m.fail("seed", "expected a nonnegative integer");
    c.mesh.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = m.text("file")) c.mesh.file = *v;
  if (auto v = m.integer("degree")) c.mesh.degree = *v;
  m.check_unused();

  Section co = section("coefficients");
  if (auto v = co.parsed("preset", parse_preset)) c.coefficients.preset = *v;
  for (const auto& [key, value] : co.values()) {
    if (kMaterialKeys.count(key)) {
      c.coefficients.overrides[key] = *co.number(key);
    } else if (key.rfind("raster.", 0) == 0) {
      c.coefficients.rasters[key.substr(7)] = *co.text(key);
    } else if (key.rfind("scale.", 0) == 0) {
      c.coefficients.raster_scale[key.substr(6)] = *co.number(key);
    }
  }
  if (auto v = co.boolean("derive_tau")) c.coefficients.derive_tau = *v;
  if (auto v = co.boolean("channel"); v && *v) {
    ChannelSpec ch;
    if (auto x = co.number("channel.background")) ch.background = *x;
    if (auto x = co.number("channel.value")) ch.channel = *x;
    if (auto x = co.number("channel.width")) ch.width = *x;
    if (auto x = co.parsed("channel.path", parse_points)) ch.path = *x;
    if (auto x = co.parsed("channel.pockets", parse_points)) ch.pockets = *x;
    c.coefficients.channel = ch;
  }
  for (const auto& [key, value] : co.values())
    if (key.rfind("channel.", 0) == 0 && !c.coefficients.channel)
      co.fail(key, "channel options require 'channel = true'");
  for (const auto& [key, s] : c.coefficients.raster_scale)
    if (!c.coefficients.rasters.count(key)) co.fail("scale." + key, "scale without a raster for " + key);
  co.check_unused();
  try {
    (void)preset(c.coefficients.preset, c.coefficients.overrides);
  } catch (const ConfigError& e) {
    co.fail("preset", e.what());
  }

  Section so = section("sources");
  if (auto v = so.parsed("kind", parse_source_kind)) c.source.kind = *v;
  if (auto v = so.parsed("location", parse_point)) c.source.location = *v;
  if (auto v = so.parsed("direction", parse_point)) c.source.direction = *v;
  if (auto v = so.parsed("moment", [](const std::string& s) { return parse_number_list(s, "moment"); })) {
    if (v->size() != 4) so.fail("moment", "expected 'mxx, mxy, myx, myy'");
    c.source.moment << (*v)[0], (*v)[1], (*v)[2], (*v)[3];
  }
  if (auto v = so.number("radius")) c.source.radius = *v;
  if (auto v = so.number("amplitude")) c.source.wavelet.amplitude = *v;
  if (auto v = so.number("f0")) c.source.wavelet.f0 = *v;
  if (auto v = so.number("t0")) c.source.wavelet.t0 = *v;
  if (c.source.kind == SourceKind::kInjection) c.source.injection = InjectionSource::channel_default();
  if (auto v = so.number("injection.scale")) c.source.injection.scale = *v;
  if (auto v = so.number("injection.rate")) c.source.injection.rate = *v;
  if (auto v = so.number("injection.width")) c.source.injection.width = *v;
  if (auto v = so.parsed("injection.centers", parse_points)) c.source.injection.centers = *v;
  if (auto v = so.parsed("injection.signs", [](const std::string& s) { return parse_number_list(s, "signs"); }))
    c.source.injection.signs = *v;
  if (c.source.injection.centers.size() != c.source.injection.signs.size())
    so.fail("injection.signs", "need one sign per injection centre");
  so.check_unused();

  Section bc = section("bc");
  {
    BcType du = BcType::kDirichlet, dp = BcType::kDirichlet;
    if (auto v = bc.parsed("u", parse_bc)) du = *v;
    if (auto v = bc.parsed("phi", parse_bc)) dp = *v;
    for (int t = 1; t <= 4; ++t) {
      c.bcs.u[t] = du;
      c.bcs.phi[t] = dp;
    }
    for (const auto& [key, value] : bc.values()) {
      const auto dot = key.find('.');
      if (dot == std::string::npos) continue;
      const std::string field = key.substr(0, dot);
      if (field != "u" && field != "phi") continue;
      const int tag = *bc.parsed(key, [&](const std::string&) { return parse_boundary_tag(key.substr(dot + 1)); });
      const BcType type = *bc.parsed(key, parse_bc);
      (field == "u" ? c.bcs.u : c.bcs.phi)[tag] = type;
    }
  }
  bc.check_unused();

  Section pe = section("penalty");
  if (auto v = pe.number("alpha")) c.penalties.alpha.fill(*v);
  for (int i = 0; i < 5; ++i)
    if (auto v = pe.number("alpha" + std::to_string(i + 1))) c.penalties.alpha[static_cast<std::size_t>(i)] = *v;
  if (auto v = pe.boolean("inverse_boundary_diffusion")) c.penalties.inverse_boundary_diffusion = *v;
  for (double a : c.penalties.alpha)
    if (!(a > 0.0)) pe.fail("alpha", "penalty constants must be positive");
  pe.check_unused();

  Section ti = section("time");
  auto& ic = c.time.integrator;
  if (auto v = ti.number("dt")) ic.dt = *v;
  if (auto v = ti.number("t_final")) ic.t_final = *v;
  if (auto v = ti.number("beta")) ic.beta = *v;
  if (auto v = ti.number("gamma")) ic.gamma = *v;
  if (auto v = ti.number("theta")) ic.theta = *v;
  if (auto v = ti.text("scheme")) {
    if (*v == "auto") {
      c.time.auto_scheme = true;
    } else {
      c.time.auto_scheme = false;
      ic.scheme = *ti.parsed("scheme", parse_scheme);
    }
  }
  ti.check_unused();
  if (c.time.auto_scheme) {
    const Material mat = preset(c.coefficients.preset, c.coefficients.overrides);
    const bool derived = c.coefficients.derive_tau;
    ic.scheme = (mat.tau1 > 0.0 || derived) ? Scheme::kNewmark : Scheme::kNewmarkTheta;
  } else {
    const Material mat = preset(c.coefficients.preset, c.coefficients.overrides);
    const bool has_tau = mat.tau1 > 0.0 || c.coefficients.derive_tau;
    if (has_tau != (ic.scheme == Scheme::kNewmark))
      ti.fail("scheme", scheme_name(ic.scheme) + " is inconsistent with tau1 = " + std::to_string(mat.tau1));
  }
  try {
    ic.validate();
  } catch (const ConfigError& e) {
    ti.fail("dt", e.what());
  }

  Section ou = section("output");
  if (auto v = ou.text("directory")) c.output.directory = *v;
  if (auto v = ou.parsed("snapshots", [](const std::string& s) { return parse_number_list(s, "snapshots"); }))
    c.output.snapshots = *v;
  if (auto v = ou.parsed("probes", parse_probes)) c.output.probes = *v;
  if (auto v = ou.boolean("energy")) c.output.energy = *v;
  if (auto v = ou.boolean("vtk")) c.output.vtk = *v;
  if (auto v = ou.parsed("grid", [](const std::string& s) { return parse_number_list(s, "grid"); })) {
    if (v->size() != 2 || (*v)[0] < 1 || (*v)[1] < 1) ou.fail("grid", "expected 'nx, ny'");
    c.output.grid_nx = static_cast<int>((*v)[0]);
    c.output.grid_ny = static_cast<int>((*v)[1]);
  }
  ou.check_unused();

  try {
    c.validate();
  } catch (const ConfigError& e) {
    // Attribute cross-field errors to the section that most likely caused them.
    const std::string msg = e.what();
    int line = 1;
    if (msg.rfind("cli:", 0) == 0) line = ou.line("probes");
    else if (msg.rfind("mesh:", 0) == 0 || msg.rfind("basis:", 0) == 0) line = m.line("type");
    else if (msg.rfind("models:", 0) == 0) line = msg.find("source") != std::string::npos ? so.line("location")
                                                                                          : co.line("preset");
    else if (msg.rfind("timestepping:", 0) == 0) line = ti.line("dt");
    throw ParseError("config", line, msg);
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream o;
  o << std::setprecision(17);
  auto pts = [&](const std::vector<Vec2>& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "; " : "") << v[i].x() << ", " << v[i].y();
    return s.str();
  };
  o << "[run]\nname = " << c.name << "\nthreads = " << c.threads << "\n\n";

  const auto& m = c.mesh;
  o << "[mesh]\ntype = "
    << (m.kind == MeshSpec::Kind::kVoronoi ? "voronoi" : m.kind == MeshSpec::Kind::kCartesian ? "cartesian" : "file")
    << "\ndomain = " << m.domain.xmin << ", " << m.domain.ymin << ", " << m.domain.xmax << ", " << m.domain.ymax
    << "\nelements = " << m.elements << "\nnx = " << m.nx << "\nny = " << m.ny << "\nlloyd = " << m.lloyd_iters
    << "\nseed = " << m.seed << "\ndegree = " << m.degree << '\n';
  if (!m.file.empty()) o << "file = " << m.file.string() << '\n';
  o << '\n';

  const auto& co = c.coefficients;
  o << "[coefficients]\npreset = " << preset_name(co.preset) << '\n';
  for (const auto& [k, v] : co.overrides) o << k << " = " << v << '\n';
  for (const auto& [k, p] : co.rasters) o << "raster." << k << " = " << p.string() << '\n';
  for (const auto& [k, v] : co.raster_scale) o << "scale." << k << " = " << v << '\n';
  o << "derive_tau = " << (co.derive_tau ? "true" : "false") << '\n';
  if (co.channel) {
    o << "channel = true\nchannel.background = " << co.channel->background << "\nchannel.value = "
      << co.channel->channel << "\nchannel.width = " << co.channel->width << '\n';
    if (!co.channel->path.empty()) o << "channel.path = " << pts(co.channel->path) << '\n';
    if (!co.channel->pockets.empty()) o << "channel.pockets = " << pts(co.channel->pockets) << '\n';
  }
  o << '\n';

  const auto& s = c.source;
  o << "[sources]\nkind = " << source_kind_name(s.kind) << "\nlocation = " << s.location.x() << ", "
    << s.location.y() << "\ndirection = " << s.direction.x() << ", " << s.direction.y() << "\nmoment = "
    << s.moment(0, 0) << ", " << s.moment(0, 1) << ", " << s.moment(1, 0) << ", " << s.moment(1, 1)
    << "\nradius = " << s.radius << "\namplitude = " << s.wavelet.amplitude << "\nf0 = " << s.wavelet.f0
    << "\nt0 = " << s.wavelet.t0 << "\ninjection.scale = " << s.injection.scale
    << "\ninjection.rate = " << s.injection.rate << "\ninjection.width = " << s.injection.width << '\n';
  if (!s.injection.centers.empty()) {
    o << "injection.centers = " << pts(s.injection.centers) << "\ninjection.signs = ";
    for (std::size_t i = 0; i < s.injection.signs.size(); ++i) o << (i ? ", " : "") << s.injection.signs[i];
    o << '\n';
  }
  o << '\n';

  o << "[bc]\n";
  auto tag_name = [](int t) { return t >= 1 && t <= 4 ? std::string(kTagNames[t]) : std::to_string(t); };
  for (const auto& [t, b] : c.bcs.u) o << "u." << tag_name(t) << " = " << (b == BcType::kDirichlet ? "dirichlet" : "neumann") << '\n';
  for (const auto& [t, b] : c.bcs.phi) o << "phi." << tag_name(t) << " = " << (b == BcType::kDirichlet ? "dirichlet" : "neumann") << '\n';
  o << '\n';

  o << "[penalty]\n";
  for (int i = 0; i < 5; ++i) o << "alpha" << i + 1 << " = " << c.penalties.alpha[static_cast<std::size_t>(i)] << '\n';
  o << "inverse_boundary_diffusion = " << (c.penalties.inverse_boundary_diffusion ? "true" : "false") << "\n\n";

  const auto& ic = c.time.integrator;
  o << "[time]\ndt = " << ic.dt << "\nt_final = " << ic.t_final << "\nbeta = " << ic.beta << "\ngamma = " << ic.gamma
    << "\ntheta = " << ic.theta << "\nscheme = " << (c.time.auto_scheme ? "auto" : scheme_name(ic.scheme)) << "\n\n";

  const auto& ou = c.output;
  o << "[output]\ndirectory = " << ou.directory << "\nsnapshots = ";
  for (std::size_t i = 0; i < ou.snapshots.size(); ++i) o << (i ? ", " : "") << ou.snapshots[i];
  o << '\n';
  if (!ou.probes.empty()) {
    o << "probes = ";
    for (std::size_t i = 0; i < ou.probes.size(); ++i)
      o << (i ? "; " : "") << ou.probes[i].name << ": " << ou.probes[i].x.x() << ", " << ou.probes[i].x.y();
    o << '\n';
  }
  o << "energy = " << (ou.energy ? "true" : "false") << "\nvtk = " << (ou.vtk ? "true" : "false") << '\n';
  if (ou.grid_nx > 0) o << "grid = " << ou.grid_nx << ", " << ou.grid_ny << '\n';
  return o.str();
}

}  // namespace kvdg
