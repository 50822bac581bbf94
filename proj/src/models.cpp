#include "kvdg/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace kvdg {

bool Material::operator==(const Material& o) const {
  return rho == o.rho && mu == o.mu && lambda == o.lambda && delta1 == o.delta1 &&
         delta2 == o.delta2 && gamma == o.gamma && d0 == o.d0 && D == o.D && tau1 == o.tau1 &&
         tau2 == o.tau2 && rho_f == o.rho_f && porosity == o.porosity;
}

bool CoefficientField::has_tau1() const {
  return std::any_of(cells_.begin(), cells_.end(), [](const Material& m) { return m.tau1 > 0.0; });
}

bool CoefficientField::all_tau1_positive() const {
  return !cells_.empty() &&
         std::all_of(cells_.begin(), cells_.end(), [](const Material& m) { return m.tau1 > 0.0; });
}

namespace {

std::string where(int element) {
  return element < 0 ? std::string() : " (element " + std::to_string(element) + ")";
}

void require(bool ok, const std::string& what, int element) {
  if (!ok) throw ConfigError("models", what + where(element));
}

}  // namespace

void validate(const Material& m, int element) {
  const double scalars[] = {m.rho, m.mu, m.lambda, m.delta1, m.delta2, m.gamma,
                            m.d0, m.tau1, m.tau2, m.rho_f, m.porosity};
  for (double v : scalars) require(std::isfinite(v), "non-finite coefficient", element);
  require(m.D.allFinite(), "non-finite D", element);
  require(m.rho > 0.0, "rho must be > 0", element);
  require(m.mu > 0.0, "mu must be > 0", element);
  require(m.lambda >= 0.0, "lambda must be >= 0", element);
  require(m.delta1 >= 0.0, "delta1 must be >= 0", element);
  require(m.delta2 >= 0.0, "delta2 must be >= 0", element);
  require(m.gamma >= 0.0, "gamma must be >= 0", element);
  require(m.d0 >= 0.0, "d0 must be >= 0", element);
  require(m.tau1 >= 0.0, "tau1 must be >= 0", element);
  require(m.tau2 >= 0.0, "tau2 must be >= 0", element);
  require(m.rho_f >= 0.0, "rho_f must be >= 0", element);
  require(m.porosity >= 0.0 && m.porosity < 1.0, "porosity must be in [0, 1)", element);
  const double scale = std::max(1.0, m.D.cwiseAbs().maxCoeff());
  require(std::abs(m.D(0, 1) - m.D(1, 0)) <= 1e-12 * scale, "D must be symmetric", element);
  if (!m.D.isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(m.D);
    require(es.eigenvalues().minCoeff() > 0.0, "D must be positive definite", element);
  }
}

std::vector<std::string> validate(const CoefficientField& field) {
  std::vector<std::string> warnings;
  int tau_violations = 0, first = -1;
  for (int k = 0; k < field.size(); ++k) {
    validate(field[k], k);
    if (field[k].tau2 < field[k].tau1) {
      if (first < 0) first = k;
      ++tau_violations;
    }
  }
  if (tau_violations > 0)
    warnings.push_back("tau2 < tau1 on " + std::to_string(tau_violations) +
                       " element(s), first " + std::to_string(first) +
                       "; the stability estimate assumes tau2 >= tau1");
  return warnings;
}

Preset parse_preset(const std::string& name) {
  if (name == "poroelastic") return Preset::kPoroelastic;
  if (name == "thermoelastic") return Preset::kThermoelastic;
  if (name == "poro-viscoelastic" || name == "poroviscoelastic") return Preset::kPoroViscoelastic;
  if (name == "unified") return Preset::kUnified;
  throw ConfigError("models", "unknown preset '" + name + "'");
}

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::kPoroelastic: return "poroelastic";
    case Preset::kThermoelastic: return "thermoelastic";
    case Preset::kPoroViscoelastic: return "poro-viscoelastic";
    case Preset::kUnified: return "unified";
  }
  return "unified";
}

double derived_tau(double rho_f, double porosity, const Mat2& D) {
  if (!(porosity > 0.0)) throw ConfigError("models", "porosity must be > 0 to derive tau");
  return rho_f * (0.5 * D.trace()) / porosity;
}

double spectral_bar(const Mat2& D) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(D);
  return es.eigenvalues().maxCoeff();
}

Material preset(Preset p, const Overrides& overrides) {
  Material m;
  std::map<std::string, double> pinned;
  switch (p) {
    case Preset::kUnified:
      m.delta1 = m.delta2 = m.tau1 = m.tau2 = 1.0;
      break;
    case Preset::kPoroelastic:
      pinned = {{"delta1", 0.0}, {"delta2", 0.0}, {"tau1", 0.0}, {"tau2", 0.0}, {"tau", 0.0}};
      break;
    case Preset::kPoroViscoelastic:
      m.delta1 = m.delta2 = 1.0;
      pinned = {{"tau1", 0.0}, {"tau2", 0.0}, {"tau", 0.0}};
      break;
    case Preset::kThermoelastic:
      // Homogeneous crustal medium with relaxed heat flux.
      m.rho = 2650.0;
      m.mu = 6e9;
      m.lambda = 4e9;
      m.gamma = 79200.0;
      m.d0 = 117.0;
      m.D = 10.5 * Mat2::Identity();
      m.tau1 = m.tau2 = 1.49e-8;
      pinned = {{"delta1", 0.0}, {"delta2", 0.0}};
      break;
  }

  bool tau_given = false;
  for (const auto& [key, value] : overrides) {
    auto pin = pinned.find(key);
    if (pin != pinned.end() && value != pin->second)
      throw ConfigError("models", "parameter " + key + " is fixed by the " + preset_name(p) +
                                      " preset");
    if (key == "rho") m.rho = value;
    else if (key == "mu") m.mu = value;
    else if (key == "lambda") m.lambda = value;
    else if (key == "delta1") m.delta1 = value;
    else if (key == "delta2") m.delta2 = value;
    else if (key == "gamma") m.gamma = value;
    else if (key == "d0") m.d0 = value;
    else if (key == "D") m.D = value * Mat2::Identity();
    else if (key == "Dxx") m.D(0, 0) = value;
    else if (key == "Dyy") m.D(1, 1) = value;
    else if (key == "Dxy") m.D(0, 1) = m.D(1, 0) = value;
    else if (key == "tau1") { m.tau1 = value; tau_given = true; }
    else if (key == "tau2") { m.tau2 = value; tau_given = true; }
    else if (key == "tau") { m.tau1 = m.tau2 = value; tau_given = true; }
    else if (key == "rho_f") m.rho_f = value;
    else if (key == "porosity") m.porosity = value;
    else throw ConfigError("models", "unknown parameter '" + key + "'");
  }
  if (p == Preset::kThermoelastic && m.tau1 != m.tau2)
    throw ConfigError("models", "the thermoelastic preset requires tau1 == tau2");
  if (!tau_given && m.rho_f > 0.0 && m.porosity > 0.0 && p == Preset::kUnified)
    m.tau1 = m.tau2 = derived_tau(m.rho_f, m.porosity, m.D);
  validate(m);
  return m;
}

// --- Rasters ---------------------------------------------------------------

Raster parse_raster(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  Raster r;
  bool header = false;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (!header) {
        int nx = 0, ny = 0;
        if (tok != "raster" || !(ls >> nx >> ny))
          throw ParseError("models", lineno, "expected header 'raster NX NY'");
        if (nx <= 0 || ny <= 0) throw ParseError("models", lineno, "raster dimensions must be positive");
        r.nx = nx;
        r.ny = ny;
        expected = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
        r.values.reserve(expected);
        header = true;
        continue;
      }
      if (r.values.size() == expected)
        throw ParseError("models", lineno, "more than NX*NY values");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v))
        throw ParseError("models", lineno, "invalid raster value '" + tok + "'");
      r.values.push_back(v);
    }
  }
  if (!header) throw ParseError("models", std::max(1, lineno), "missing raster header");
  if (r.values.size() != expected)
    throw ParseError("models", lineno, "expected " + std::to_string(expected) + " values, found " +
                                           std::to_string(r.values.size()));
  return r;
}

Raster load_raster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("models", "cannot open raster file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_raster(ss.str());
}

std::string serialize_raster(const Raster& r) {
  std::ostringstream out;
  out << "raster " << r.nx << ' ' << r.ny << '\n';
  char buf[32];
  for (int j = 0; j < r.ny; ++j) {
    for (int i = 0; i < r.nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", r.at(i, j));
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<double> raster_to_elements(const Raster& r, int mesh_nx, int mesh_ny,
                                       const std::string& parameter) {
  if (r.nx != mesh_nx || r.ny != mesh_ny)
    throw ConfigError("models", "raster is " + std::to_string(r.nx) + "x" + std::to_string(r.ny) +
                                    " but the mesh is " + std::to_string(mesh_nx) + "x" +
                                    std::to_string(mesh_ny));
  const bool positive = parameter.rfind("D", 0) == 0 || parameter.rfind("perm", 0) == 0;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (positive && !(r.values[i] > 0.0))
      throw ConfigError("models", "nonpositive " + parameter + " in raster cell " +
                                      std::to_string(i));
    if (r.values[i] < 0.0)
      throw ConfigError("models", "negative " + parameter + " in raster cell " + std::to_string(i));
  }
  // Cartesian element (i, j) has index j * nx + i, same as the raster.
  return r.values;
}

std::vector<double> load_raster_field(const std::filesystem::path& path,
                                      const std::string& parameter, int mesh_nx, int mesh_ny) {
  return raster_to_elements(load_raster(path), mesh_nx, mesh_ny, parameter);
}

namespace {

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

}  // namespace

Raster synthetic_channel_raster(const Rect& domain, int nx, int ny, double background,
                                double channel, const std::vector<Vec2>& path, double width,
                                const std::vector<Vec2>& pockets) {
  if (nx <= 0 || ny <= 0) throw ConfigError("models", "raster dimensions must be positive");
  if (!(background > 0.0) || !(channel > 0.0))
    throw ConfigError("models", "raster values must be positive");
  Raster r{nx, ny, std::vector<double>(static_cast<std::size_t>(nx * ny), background)};
  const double dx = domain.width() / nx, dy = domain.height() / ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 c(domain.xmin + (i + 0.5) * dx, domain.ymin + (j + 0.5) * dy);
      bool in = false;
      for (std::size_t s = 0; s + 1 < path.size() && !in; ++s)
        in = segment_distance(c, path[s], path[s + 1]) <= 0.5 * width;
      for (const Vec2& p : pockets)
        in = in || (c - p).norm() <= width;
      if (in) r.values[static_cast<std::size_t>(j * nx + i)] = channel;
    }
  return r;
}

// --- Sources ---------------------------------------------------------------

double RickerWavelet::operator()(double t) const {
  const double s = t - t0;
  return amplitude * std::cos(2.0 * M_PI * s * f0) * std::exp(-2.0 * s * s * f0 * f0);
}

double Mollifier::normalization() const {
  // int_{B_R} (1 - r^2/R^2)^k dx = pi R^2 / (k + 1)
  return (power + 1.0) / (M_PI * radius * radius);
}

double Mollifier::value(const Vec2& x) const {
  const double r2 = (x - center).squaredNorm() / (radius * radius);
  if (r2 >= 1.0) return 0.0;
  return normalization() * std::pow(1.0 - r2, power);
}

Vec2 Mollifier::grad(const Vec2& x) const {
  const Vec2 d = x - center;
  const double r2 = d.squaredNorm() / (radius * radius);
  if (r2 >= 1.0) return Vec2::Zero();
  return normalization() * power * std::pow(1.0 - r2, power - 1) * (-2.0 / (radius * radius)) * d;
}

InjectionSource InjectionSource::channel_default() {
  InjectionSource s;
  s.centers = {Vec2(190.0, 550.0), Vec2(130.0, 120.0), Vec2(175.0, 360.0)};
  s.signs = {1.0, 1.0, -1.0};
  return s;
}

double InjectionSource::time_profile(double t) const { return scale * std::tanh(rate * t); }

double InjectionSource::spatial(const Vec2& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double sign = i < signs.size() ? signs[i] : 1.0;
    s += sign * std::exp(-(x - centers[i]).squaredNorm() / width);
  }
  return s;
}

Vec2 SourceSpec::body_force(const Vec2& x) const {
  switch (kind) {
    case SourceKind::kPointForce: return direction * mollifier().value(x);
    case SourceKind::kMomentTensor: return -(moment * mollifier().grad(x));
    default: return Vec2::Zero();
  }
}

double SourceSpec::source(const Vec2& x) const {
  return kind == SourceKind::kInjection ? injection.spatial(x) : 0.0;
}

double SourceSpec::time_profile(double t) const {
  switch (kind) {
    case SourceKind::kPointForce:
    case SourceKind::kMomentTensor: return wavelet(t);
    case SourceKind::kInjection: return injection.time_profile(t);
    default: return 0.0;
  }
}

SourceValue source_eval(const SourceSpec& spec, const Vec2& x, double t) {
  const double h = spec.time_profile(t);
  return SourceValue{h * spec.body_force(x), h * spec.source(x)};
}

// --- Units ------------------------------------------------------------------

Dimension pascal() { return {1, -1, -2, 0}; }

Dimension parameter_dimension(const std::string& name, Reading reading) {
  const Dimension none{};
  const Dimension second{0, 0, 1, 0};
  const Dimension kelvin{0, 0, 0, 1};
  const Dimension meter{0, 1, 0, 0};
  const bool T = reading == Reading::kTemperature;
  if (name == "rho" || name == "rho_f") return Dimension{1, -3, 0, 0};
  if (name == "mu" || name == "lambda") return pascal();
  if (name == "delta1" || name == "delta2" || name == "tau1" || name == "tau2") return second;
  if (name == "gamma") return T ? pascal() / kelvin : none;
  if (name == "d0") return T ? pascal() / (kelvin * kelvin) : none / pascal();
  if (name == "D")
    return T ? meter * meter * pascal() / (kelvin * kelvin * second)
             : meter * meter / (pascal() * second);
  if (name == "porosity") return none;
  if (name == "u") return meter;
  if (name == "phi") return T ? kelvin : pascal();
  throw ConfigError("models", "no dimension for '" + name + "'");
}

std::vector<std::pair<std::string, Dimension>> stress_term_dimensions(Reading reading) {
  const Dimension inv_m{0, -1, 0, 0};
  const Dimension inv_s{0, 0, -1, 0};
  auto d = [reading](const char* n) { return parameter_dimension(n, reading); };
  const Dimension strain = d("u") * inv_m;  // eps(u), div u
  return {
      {"2 mu eps(u)", d("mu") * strain},
      {"2 mu delta1 eps(du/dt)", d("mu") * d("delta1") * strain * inv_s},
      {"lambda div u", d("lambda") * strain},
      {"lambda delta2 div du/dt", d("lambda") * d("delta2") * strain * inv_s},
      {"gamma phi", d("gamma") * d("phi")},
  };
}

}  // namespace kvdg
