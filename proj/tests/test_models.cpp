#include <doctest.h>

#include "kvdg/models.hpp"

#include <cmath>
#include <random>

using namespace kvdg;

namespace {

// Polar Gauss-free quadrature: midpoint rule in r and theta.
double disc_integral(const std::function<double(const Vec2&)>& f, const Vec2& c, double R, int nr = 400,
                     int nt = 256) {
  double s = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * R / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = (j + 0.5) * 2.0 * M_PI / nt;
      s += f(c + r * Vec2(std::cos(t), std::sin(t))) * r;
    }
  }
  return s * (R / nr) * (2.0 * M_PI / nt);
}

}  // namespace

TEST_CASE("thermoelastic preset values") {
  const Material m = preset(Preset::kThermoelastic);
  CHECK(m.rho == 2650.0);
  CHECK(m.mu == 6e9);
  CHECK(m.lambda == 4e9);
  CHECK(m.gamma == 79200.0);
  CHECK(m.d0 == 117.0);
  CHECK(m.D == 10.5 * Mat2::Identity());
  CHECK(m.tau1 == 1.49e-8);
  CHECK(m.tau2 == 1.49e-8);
  CHECK(m.delta1 == 0.0);
  CHECK_THROWS_AS(preset(Preset::kThermoelastic, {{"delta1", 1.0}}), ConfigError);
  CHECK_THROWS_AS(preset(Preset::kThermoelastic, {{"tau1", 1.0}}), ConfigError);
}

TEST_CASE("preset pins and overrides") {
  CHECK_THROWS_AS(preset(Preset::kPoroelastic, {{"tau1", 0.5}}), ConfigError);
  CHECK_NOTHROW(preset(Preset::kPoroelastic, {{"tau1", 0.0}}));
  CHECK_THROWS_AS(preset(Preset::kPoroViscoelastic, {{"tau", 1.0}}), ConfigError);
  CHECK(preset(Preset::kPoroViscoelastic).delta1 > 0.0);
  CHECK_THROWS_AS(preset(Preset::kUnified, {{"viscosity", 1.0}}), ConfigError);
  CHECK_THROWS_AS(preset(Preset::kUnified, {{"rho", -1.0}}), ConfigError);
  const Material m = preset(Preset::kUnified, {{"Dxx", 2.0}, {"Dyy", 3.0}, {"Dxy", 0.5}});
  CHECK(m.D(0, 1) == 0.5);
  CHECK(m.D(1, 0) == 0.5);
  CHECK(parse_preset("thermoelastic") == Preset::kThermoelastic);
  CHECK(parse_preset(preset_name(Preset::kPoroViscoelastic)) == Preset::kPoroViscoelastic);
  CHECK_THROWS_AS(parse_preset("elastic"), ConfigError);
}

TEST_CASE("relaxation time derived from fluid density and porosity") {
  CHECK(derived_tau(1025.0, 0.1, 1e-5 * Mat2::Identity()) == doctest::Approx(0.1025).epsilon(1e-14));
  Mat2 D;
  D << 2.0, 0.0, 0.0, 4.0;
  CHECK(derived_tau(1.0, 0.5, D) == doctest::Approx(6.0));  // mean eigenvalue 3
  CHECK_THROWS_AS(derived_tau(1.0, 0.0, D), ConfigError);
  const Material m = preset(Preset::kUnified, {{"rho_f", 1025.0}, {"porosity", 0.1}, {"D", 1e-5}});
  CHECK(m.tau1 == doctest::Approx(0.1025));
  CHECK(m.tau2 == m.tau1);
}

TEST_CASE("spectral bar is the largest eigenvalue") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.1, 5.0), A(0.0, M_PI);
  for (int i = 0; i < 50; ++i) {
    const double a = U(rng), b = U(rng), t = A(rng);
    Mat2 R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Mat2 D = R * Vec2(a, b).asDiagonal() * R.transpose();
    CHECK(spectral_bar(D) == doctest::Approx(std::max(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("coefficient validation") {
  Material m = preset(Preset::kUnified);
  CHECK_NOTHROW(validate(m));
  m.D << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = preset(Preset::kUnified);
  m.tau1 = 2.0;
  m.tau2 = 1.0;
  auto field = CoefficientField::uniform(3, m);
  CHECK_FALSE(validate(field).empty());  // tau2 < tau1 warns
  field[1].mu = 0.0;
  try {
    validate(field);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mu") != std::string::npos);
  }
}

TEST_CASE("raster parsing") {
  const Raster r = parse_raster("# permeability\nraster 3 2\n1 2 3\n4 5 6 # row two\n");
  CHECK(r.nx == 3);
  CHECK(r.ny == 2);
  CHECK(r.at(0, 1) == 4.0);
  CHECK(r.at(2, 0) == 3.0);
  CHECK(parse_raster(serialize_raster(r)).values == r.values);

  auto line_of = [](const std::string& text) {
    try {
      parse_raster(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("grid 3 2\n") == 1);
  CHECK(line_of("raster 2 2\n1 2\n3 x\n") == 3);
  CHECK(line_of("raster 1 1\n1\n2\n") == 3);
  CHECK(line_of("raster 2 2\n1 2\n") == 2);
  CHECK(line_of("raster 0 2\n") == 1);

  CHECK_THROWS_AS(raster_to_elements(r, 2, 3, "D"), ConfigError);
  CHECK(raster_to_elements(r, 3, 2, "D") == r.values);
  const Raster z = parse_raster("raster 1 2\n0 1\n");
  CHECK_THROWS_AS(raster_to_elements(z, 1, 2, "D"), ConfigError);
  CHECK_NOTHROW(raster_to_elements(z, 1, 2, "rho"));
}

TEST_CASE("synthetic channel raster") {
  const Rect dom{0.0, 0.0, 100.0, 100.0};
  const Raster r = synthetic_channel_raster(dom, 10, 10, 1.0, 50.0, {Vec2(0.0, 55.0), Vec2(100.0, 55.0)}, 10.0,
                                            {Vec2(15.0, 15.0)});
  for (int i = 0; i < 10; ++i) {
    CHECK(r.at(i, 5) == 50.0);  // centre y = 55 on the line
    CHECK(r.at(i, 9) == 1.0);
  }
  CHECK(r.at(1, 1) == 50.0);  // pocket
  CHECK(r.at(8, 1) == 1.0);
  CHECK_THROWS_AS(synthetic_channel_raster(dom, 10, 10, 0.0, 1.0, {}, 1.0), ConfigError);
}

TEST_CASE("Ricker wavelet") {
  const RickerWavelet h{1e4, 5.0, 0.3};
  CHECK(h(0.3) == doctest::Approx(1e4));
  CHECK(h(0.3 + 0.1) == doctest::Approx(-1e4 * std::exp(-0.5)));
  CHECK(h(0.3 + 0.05) == doctest::Approx(0.0).epsilon(1e-12).scale(1e4));
  CHECK(h(0.25) == doctest::Approx(h(0.35)));
}

TEST_CASE("mollifier has unit mass, compact support and a consistent gradient") {
  for (int power : {2, 3, 4}) {
    const Mollifier m{Vec2(0.3, -0.2), 0.7, power};
    CHECK(disc_integral([&](const Vec2& x) { return m.value(x); }, m.center, m.radius) ==
          doctest::Approx(1.0).epsilon(1e-4));
    CHECK(m.value(m.center + Vec2(0.71, 0.0)) == 0.0);
    CHECK(m.grad(m.center + Vec2(0.0, 0.8)).norm() == 0.0);
    const Vec2 x = m.center + Vec2(0.21, 0.33);
    const double e = 1e-6;
    const Vec2 fd((m.value(x + Vec2(e, 0)) - m.value(x - Vec2(e, 0))) / (2 * e),
                  (m.value(x + Vec2(0, e)) - m.value(x - Vec2(0, e))) / (2 * e));
    CHECK((m.grad(x) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("source specifications") {
  SourceSpec s;
  s.kind = SourceKind::kPointForce;
  s.location = Vec2(1.0, 1.0);
  s.radius = 0.5;
  s.direction = Vec2(0.0, 2.0);
  const Vec2 x(1.1, 0.9);
  CHECK((s.body_force(x) - Vec2(0.0, 2.0) * s.mollifier().value(x)).norm() < 1e-15);
  CHECK(s.source(x) == 0.0);
  CHECK(s.time_profile(0.3) == doctest::Approx(1e4));

  s.kind = SourceKind::kMomentTensor;
  s.moment << 0.0, 1.0, 1.0, 0.0;
  const Vec2 g = s.mollifier().grad(x);
  CHECK((s.body_force(x) - Vec2(-g.y(), -g.x())).norm() < 1e-12);
  // A symmetric moment tensor exerts no net force.
  const double fx = disc_integral([&](const Vec2& p) { return s.body_force(p).x(); }, s.location, s.radius);
  CHECK(std::abs(fx) < 1e-8);

  s.kind = SourceKind::kInjection;
  s.injection = InjectionSource::channel_default();
  CHECK(s.time_profile(1.0) == doctest::Approx(0.1 * std::tanh(5.0)));
  const Vec2 c(175.0, 360.0);
  const double expect = std::exp(-(15.0 * 15.0 + 190.0 * 190.0) / 500.0) + std::exp(-(45.0 * 45.0 + 240.0 * 240.0) / 500.0) - 1.0;
  CHECK(s.source(c) == doctest::Approx(expect));
  CHECK(source_eval(s, c, 1.0).g == doctest::Approx(expect * 0.1 * std::tanh(5.0)));
  CHECK(source_eval(s, c, 1.0).f.norm() == 0.0);
}

TEST_CASE("stress summands have pressure units in both readings") {
  for (Reading r : {Reading::kPressure, Reading::kTemperature})
    for (const auto& [name, dim] : stress_term_dimensions(r)) {
      CAPTURE(name);
      CHECK(dim == pascal());
    }
  CHECK(parameter_dimension("D", Reading::kPressure) == Dimension{-1, 3, 1, 0});
  CHECK_THROWS_AS(parameter_dimension("viscosity", Reading::kPressure), ConfigError);
}
