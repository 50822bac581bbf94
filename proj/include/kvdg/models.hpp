#pragma once

#include "kvdg/common.hpp"
#include "kvdg/mesh.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace kvdg {

/// Physical coefficients of one element, SI units.
///
/// gamma is unitless (pore pressure reading) or Pa/K (temperature reading);
/// d0 is 1/Pa or Pa/K^2; D is m^2/(Pa s) or m^2 Pa/(K^2 s).
struct Material {
  double rho = 1.0;
  double mu = 1.0;
  double lambda = 1.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double gamma = 1.0;
  double d0 = 1.0;
  Mat2 D = Mat2::Identity();
  double tau1 = 0.0;
  double tau2 = 0.0;
  // Optional inputs of tau = rho_f * D / porosity; zero when unused.
  double rho_f = 0.0;
  double porosity = 0.0;

  bool operator==(const Material& o) const;
};

/// Element-wise constant coefficients.
class CoefficientField {
 public:
  CoefficientField() = default;
  explicit CoefficientField(std::vector<Material> cells) : cells_(std::move(cells)) {}
  static CoefficientField uniform(int n_elements, const Material& m) {
    return CoefficientField(std::vector<Material>(static_cast<std::size_t>(n_elements), m));
  }

  int size() const { return static_cast<int>(cells_.size()); }
  const Material& operator[](int k) const { return cells_[static_cast<std::size_t>(k)]; }
  Material& operator[](int k) { return cells_[static_cast<std::size_t>(k)]; }
  const std::vector<Material>& cells() const { return cells_; }

  bool has_tau1() const;  // any element with tau1 > 0
  bool all_tau1_positive() const;

 private:
  std::vector<Material> cells_;
};

/// Checks the coefficient invariants; throws ConfigError naming the
/// parameter and element. Returns non-fatal warnings (tau2 < tau1).
std::vector<std::string> validate(const CoefficientField& field);
void validate(const Material& m, int element = -1);

enum class Preset { kPoroelastic, kThermoelastic, kPoroViscoelastic, kUnified };

Preset parse_preset(const std::string& name);
std::string preset_name(Preset p);

/// Parameter overrides by name: rho, mu, lambda, delta1, delta2, gamma, d0,
/// D (isotropic), Dxx, Dxy, Dyy, tau1, tau2, tau (both), rho_f, porosity.
using Overrides = std::map<std::string, double>;

/// Builds a material for a preset. Parameters a preset pins (e.g. the
/// relaxation times of the poroelastic model) cannot be overridden to other
/// values. When rho_f and porosity are given without explicit relaxation
/// times, unified and poroelastic-like presets derive tau1 = tau2 from D.
Material preset(Preset p, const Overrides& overrides = {});

/// tau = rho_f * D / porosity; for anisotropic D the mean eigenvalue is used.
double derived_tau(double rho_f, double porosity, const Mat2& D);

/// |sqrt(D)|_2^2, i.e. the largest eigenvalue of SPD D.
double spectral_bar(const Mat2& D);

// --- Rasters ---------------------------------------------------------------

/// Structured cell values; row-major from the lower-left corner.
struct Raster {
  int nx = 0, ny = 0;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j * nx + i)]; }
};

Raster parse_raster(const std::string& text);
Raster load_raster(const std::filesystem::path& path);
std::string serialize_raster(const Raster& r);

/// Per-element values of a raster on an nx-by-ny Cartesian mesh. Names
/// starting with "D" or "perm" must be strictly positive.
std::vector<double> raster_to_elements(const Raster& r, int mesh_nx, int mesh_ny,
                                       const std::string& parameter);
std::vector<double> load_raster_field(const std::filesystem::path& path,
                                      const std::string& parameter, int mesh_nx, int mesh_ny);

/// Synthetic permeability map: a high-value channel of width `width`
/// following the polyline `path` (domain coordinates) over a low background,
/// plus optional detached pockets of radius `width`.
Raster synthetic_channel_raster(const Rect& domain, int nx, int ny, double background,
                                double channel, const std::vector<Vec2>& path, double width,
                                const std::vector<Vec2>& pockets = {});

// --- Sources ---------------------------------------------------------------

/// h(t) = A0 cos(2 pi (t - t0) f0) exp(-2 (t - t0)^2 f0^2)
struct RickerWavelet {
  double amplitude = 1e4;
  double f0 = 5.0;
  double t0 = 0.3;

  double operator()(double t) const;
};

/// Compactly supported radial bump C (1 - r^2/R^2)^k, unit integral.
struct Mollifier {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  int power = 3;

  double value(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
  double normalization() const;  // C
};

/// g(x, t) = scale tanh(rate t) sum_i s_i exp(-|x - c_i|^2 / width)
struct InjectionSource {
  double scale = 0.1;
  double rate = 5.0;
  double width = 500.0;
  std::vector<Vec2> centers;
  std::vector<double> signs;

  static InjectionSource channel_default();
  double time_profile(double t) const;
  double spatial(const Vec2& x) const;
  double operator()(const Vec2& x, double t) const { return time_profile(t) * spatial(x); }
};

enum class SourceKind { kNone, kPointForce, kMomentTensor, kInjection };

struct SourceSpec {
  SourceKind kind = SourceKind::kNone;
  Vec2 location = Vec2::Zero();
  Vec2 direction = Vec2(0.0, 1.0);  // point force
  Mat2 moment = Mat2::Identity();   // moment tensor
  double radius = 0.0;              // mollifier radius; <= 0 selects 2 h
  RickerWavelet wavelet;
  InjectionSource injection;

  /// Spatial body-force density; multiply by time_profile(t).
  Vec2 body_force(const Vec2& x) const;
  /// Spatial scalar source density; multiply by time_profile(t).
  double source(const Vec2& x) const;
  double time_profile(double t) const;
  Mollifier mollifier() const { return Mollifier{location, radius, 3}; }
};

struct SourceValue {
  Vec2 f = Vec2::Zero();
  double g = 0.0;
};

SourceValue source_eval(const SourceSpec& spec, const Vec2& x, double t);

// --- Units ------------------------------------------------------------------

/// Exponents of kg, m, s, K.
struct Dimension {
  int kg = 0, m = 0, s = 0, K = 0;
  Dimension operator*(const Dimension& o) const { return {kg + o.kg, m + o.m, s + o.s, K + o.K}; }
  Dimension operator/(const Dimension& o) const { return {kg - o.kg, m - o.m, s - o.s, K - o.K}; }
  bool operator==(const Dimension& o) const = default;
};

enum class Reading { kPressure, kTemperature };

Dimension parameter_dimension(const std::string& name, Reading reading);
Dimension pascal();

/// Dimensions of the summands of the total stress for the given reading:
/// 2 mu eps(u), 2 mu delta1 eps(du/dt), lambda div u, lambda delta2 div du/dt,
/// gamma phi.
std::vector<std::pair<std::string, Dimension>> stress_term_dimensions(Reading reading);

}  // namespace kvdg
