#include <doctest.h>

#include "kvdg/config.hpp"

using namespace kvdg;

namespace {

const char* kFull = R"(# channel injection
[run]
name = demo
threads = 1

[mesh]
type = cartesian
domain = 366, 671
nx = 6
ny = 11
degree = 2

[coefficients]
preset = unified
mu = 1e9
lambda = 4e8
gamma = 1
d0 = 1e-9
rho_f = 1025
porosity = 0.1
derive_tau = true
channel = true
channel.background = 1e-8
channel.value = 1e-5
channel.width = 60
channel.path = 100, 0; 220, 671

[sources]
kind = injection

[bc]
u = dirichlet
phi = neumann
u.top = neumann

[penalty]
alpha = 12
alpha5 = 20

[time]
dt = 4e-4
t_final = 0.01
scheme = auto

[output]
directory = demo
snapshots = 0.004, 0.008
probes = P1: 146.30, 236.22; P2: 207.26, 452.63
grid = 10, 20
)";

int error_line(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("full configuration") {
  const RunConfig c = parse_run_config(kFull);
  CHECK(c.name == "demo");
  CHECK(c.threads == 1);
  CHECK(c.mesh.kind == MeshSpec::Kind::kCartesian);
  CHECK(c.mesh.domain.xmax == 366.0);
  CHECK(c.mesh.ny == 11);
  CHECK(c.coefficients.overrides.at("mu") == 1e9);
  CHECK(c.coefficients.derive_tau);
  REQUIRE(c.coefficients.channel.has_value());
  CHECK(c.coefficients.channel->path.size() == 2);
  CHECK(c.source.kind == SourceKind::kInjection);
  CHECK(c.source.injection.centers.size() == 3);
  CHECK(c.bcs.u.at(kTop) == BcType::kNeumann);
  CHECK(c.bcs.u.at(kLeft) == BcType::kDirichlet);
  CHECK(c.bcs.phi.at(kBottom) == BcType::kNeumann);
  CHECK(c.penalties.alpha[0] == 12.0);
  CHECK(c.penalties.alpha[4] == 20.0);
  CHECK(c.time.integrator.scheme == Scheme::kNewmark);
  CHECK(c.output.probes.size() == 2);
  CHECK(c.output.probes[1].name == "P2");
  CHECK(c.output.grid_nx == 10);
  CHECK(c.output.snapshots == std::vector<double>{0.004, 0.008});
}

TEST_CASE("canonical rendering round-trips") {
  const RunConfig c = parse_run_config(kFull);
  const std::string a = to_ini(c);
  const RunConfig d = parse_run_config(a);
  CHECK(to_ini(d) == a);
  const RunConfig e = parse_run_config("");
  CHECK(to_ini(parse_run_config(to_ini(e))) == to_ini(e));
}

TEST_CASE("defaults select the scheme from tau1") {
  CHECK(parse_run_config("").time.integrator.scheme == Scheme::kNewmark);  // unified preset has tau1 = 1
  CHECK(parse_run_config("[coefficients]\ntau = 0\n").time.integrator.scheme == Scheme::kNewmarkTheta);
  CHECK(parse_run_config("[coefficients]\npreset = poroelastic\n").time.integrator.scheme == Scheme::kNewmarkTheta);
}

TEST_CASE("errors carry the offending line") {
  CHECK(error_line("[mesh]\nelements = 10\n[bogus]\nx = 1\n") == 3);
  CHECK(error_line("[mesh]\nelements = 10\ncolour = red\n") == 3);
  CHECK(error_line("[time]\n\ndt = fast\n") == 3);
  CHECK(error_line("[time]\ndt = 1e-3\nnot a key value pair\n") == 3);
  CHECK(error_line("[mesh]\nnx = 2\nnx = 3\n") == 3);
  CHECK(error_line("[coefficients]\ntau = 0\n[time]\nscheme = newmark\n") == 4);
  CHECK(error_line("[mesh]\ndomain = 1, 1\n[output]\nprobes = A: 2, 2\n") == 4);
  CHECK(error_line("[sources]\nkind = point\nlocation = 5, 5\n") == 3);
  CHECK(error_line("[bc]\nu.front = neumann\n") == 2);
  CHECK(error_line("[bc]\nphi.left = robin\n") == 2);
  CHECK(error_line("[coefficients]\npreset = poroelastic\ntau1 = 1\n") > 0);
  CHECK(error_line("[time]\ndt = 0.3\nt_final = 1\n") == 2);
}

TEST_CASE("messages name the module") {
  CHECK(error_text("[mesh]\ndomain = 1, 1\n[output]\nprobes = A: 2, 2\n").find("cli") != std::string::npos);
  CHECK(error_text("[mesh]\ntype = voronoi\n[coefficients]\nraster.D = k.txt\n").find("models") !=
        std::string::npos);
  CHECK(error_text("[mesh]\ndegree = 0\n").find("basis") != std::string::npos);
  CHECK(error_text("[coefficients]\ntau = 0\n[time]\nbeta = 0\n").find("timestepping") != std::string::npos);
  CHECK(error_text("[coefficients]\ntau = 0\n[time]\nscheme = newmark\n").find("inconsistent") != std::string::npos);
}

TEST_CASE("helpers") {
  CHECK(parse_number_list("1, 2 3", "x") == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(parse_number_list("1, two", "x"), ConfigError);
  const Rect r = parse_domain("-1, 0, 1, 2");
  CHECK(r.xmin == -1.0);
  CHECK(r.ymax == 2.0);
  CHECK_THROWS_AS(parse_domain("1, 1, 0, 0"), ConfigError);
  CHECK_THROWS_AS(parse_domain("1"), ConfigError);
  CHECK(parse_boundary_tag("left") == kLeft);
  CHECK(parse_boundary_tag("7") == 7);
  CHECK_THROWS_AS(parse_boundary_tag("north"), ConfigError);
}
