#include "kvdg/scenario.hpp"

#include "kvdg/output.hpp"
#include "kvdg/parallel.hpp"
#include "kvdg/verification.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace kvdg {

namespace {

void set_parameter(Material& m, const std::string& key, double v) {
  if (key == "rho") m.rho = v;
  else if (key == "mu") m.mu = v;
  else if (key == "lambda") m.lambda = v;
  else if (key == "delta1") m.delta1 = v;
  else if (key == "delta2") m.delta2 = v;
  else if (key == "gamma") m.gamma = v;
  else if (key == "d0") m.d0 = v;
  else if (key == "D") m.D = v * Mat2::Identity();
  else if (key == "Dxx") m.D(0, 0) = v;
  else if (key == "Dyy") m.D(1, 1) = v;
  else if (key == "Dxy") m.D(0, 1) = m.D(1, 0) = v;
  else if (key == "tau1") m.tau1 = v;
  else if (key == "tau2") m.tau2 = v;
  else if (key == "rho_f") m.rho_f = v;
  else if (key == "porosity") m.porosity = v;
  else throw ConfigError("models", "unknown raster parameter '" + key + "'");
}

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

}  // namespace

PolyMesh build_mesh(const MeshSpec& spec) {
  switch (spec.kind) {
    case MeshSpec::Kind::kCartesian: return cartesian_mesh(spec.domain, spec.nx, spec.ny);
    case MeshSpec::Kind::kFile: return load_mesh(spec.file);
    case MeshSpec::Kind::kVoronoi:
    default: return generate_voronoi(spec.domain, spec.elements, spec.lloyd_iters, spec.seed).mesh;
  }
}

CoefficientField build_coefficients(const CoefficientSpec& spec, const MeshSpec& mesh, int n_elements) {
  const Material base = preset(spec.preset, spec.overrides);
  CoefficientField field = CoefficientField::uniform(n_elements, base);
  const bool rasters = !spec.rasters.empty() || spec.channel.has_value();
  if (rasters && (mesh.kind != MeshSpec::Kind::kCartesian || mesh.nx * mesh.ny != n_elements))
    throw ConfigError("models", "raster coefficient fields require the configured cartesian mesh");
  for (const auto& [key, path] : spec.rasters) {
    auto values = load_raster_field(path, key, mesh.nx, mesh.ny);
    const auto sc = spec.raster_scale.find(key);
    const double scale = sc == spec.raster_scale.end() ? 1.0 : sc->second;
    for (int k = 0; k < n_elements; ++k) set_parameter(field[k], key, scale * values[static_cast<std::size_t>(k)]);
  }
  if (spec.channel) {
    const ChannelSpec& c = *spec.channel;
    const Raster r = synthetic_channel_raster(mesh.domain, mesh.nx, mesh.ny, c.background, c.channel, c.path,
                                              c.width, c.pockets);
    const auto values = raster_to_elements(r, mesh.nx, mesh.ny, "D");
    for (int k = 0; k < n_elements; ++k) field[k].D = values[static_cast<std::size_t>(k)] * Mat2::Identity();
  }
  if (spec.derive_tau)
    for (int k = 0; k < n_elements; ++k) {
      Material& m = field[k];
      m.tau1 = m.tau2 = derived_tau(m.rho_f, m.porosity, m.D);
    }
  return field;
}

LoadSeries build_loads(const DgSpace& space, const SourceSpec& source) {
  LoadSeries loads(space.vector_dofs(), space.scalar_dofs());
  if (source.kind == SourceKind::kNone) return loads;
  SourceSpec s = source;
  LoadTerm term;
  term.profile = [s](double t) { return s.time_profile(t); };
  if (s.kind == SourceKind::kInjection) {
    term.label = "injection";
    term.G = load_vector(space, ScalarFn([s](const Vec2& x) { return s.source(x); }));
  } else {
    if (!(s.radius > 0.0)) s.radius = 2.0 * space.mesh().mesh_size();
    term.label = s.kind == SourceKind::kPointForce ? "point force" : "moment tensor";
    term.profile = [s](double t) { return s.time_profile(t); };
    term.F = load_vector_supported(space, VectorFn([s](const Vec2& x) { return s.body_force(x); }), s.location,
                                   s.radius);
  }
  loads.add(std::move(term));
  return loads;
}

Scenario build_scenario(const RunConfig& config) {
  config.validate();
  Scenario sc;
  PolyMesh mesh = build_mesh(config.mesh);
  CoefficientField coeffs = build_coefficients(config.coefficients, config.mesh, mesh.num_elements());
  auto space = std::make_shared<const DgSpace>(std::move(mesh), config.mesh.degree);
  for (const auto& p : config.output.probes)
    if (space->mesh().locate(p.x) < 0) throw ConfigError("cli", "probe '" + p.name + "' lies outside the domain");
  sc.integrator = config.time.integrator;
  if (config.time.auto_scheme) sc.integrator.scheme = select_scheme(coeffs);
  sc.disc = discretize(space, std::move(coeffs), config.bcs, config.penalties, &sc.warnings);
  sc.loads = build_loads(*space, config.source);
  sc.initial = zero_state(sc.disc.ops);
  return sc;
}

std::vector<std::string> scenario_names() {
  return {"thermoelastic-vertical", "thermoelastic-shear", "flow-D", "flow-P", "flow-PVE"};
}

std::vector<Probe> flow_probes() {
  return {{"P1", Vec2(146.30, 236.22)}, {"P2", Vec2(207.26, 452.63)}, {"P3", Vec2(67.05, 441.69)},
          {"P4", Vec2(60.96, 661.42)}};
}

ChannelSpec flow_channel() {
  ChannelSpec c;
  c.background = 1e-8;
  c.channel = 1e-5;
  c.width = 60.0;
  // Through the injection and absorption centres, edge to edge.
  c.path = {Vec2(100.0, 0.0), Vec2(130.0, 120.0), Vec2(175.0, 360.0), Vec2(200.0, 450.0), Vec2(190.0, 550.0),
            Vec2(220.0, 671.0)};
  c.pockets = {Vec2(300.0, 200.0), Vec2(290.0, 610.0)};
  return c;
}

RunConfig scenario_config(const std::string& name) {
  RunConfig c;
  c.name = name;
  if (name == "thermoelastic-vertical" || name == "thermoelastic-shear") {
    c.mesh.kind = MeshSpec::Kind::kCartesian;
    c.mesh.domain = Rect{0.0, 0.0, 2310.0, 2310.0};
    c.mesh.nx = c.mesh.ny = 22;  // even, so the centre is a mesh vertex
    c.mesh.degree = 3;
    c.coefficients.preset = Preset::kThermoelastic;
    c.source.location = Vec2(1155.0, 1155.0);
    c.source.wavelet = RickerWavelet{1e4, 5.0, 0.3};
    if (name == "thermoelastic-vertical") {
      c.source.kind = SourceKind::kPointForce;
      c.source.direction = Vec2(0.0, 1.0);
    } else {
      c.source.kind = SourceKind::kMomentTensor;
      c.source.moment << 0.0, 1.0, 1.0, 0.0;
    }
    c.time.integrator.dt = 5e-4;
    c.time.integrator.t_final = 0.5;
    c.time.integrator.scheme = Scheme::kNewmark;
    c.output.snapshots = {0.1, 0.3, 0.5};
    c.output.probes = {{"centre", Vec2(1155.0, 1155.0)},
                       {"north", Vec2(1155.0, 1655.0)},
                       {"south", Vec2(1155.0, 655.0)},
                       {"east", Vec2(1655.0, 1155.0)}};
  } else if (name == "flow-D" || name == "flow-P" || name == "flow-PVE") {
    c.mesh.kind = MeshSpec::Kind::kCartesian;
    c.mesh.domain = Rect{0.0, 0.0, 366.0, 671.0};
    c.mesh.nx = 15;
    c.mesh.ny = 55;
    c.mesh.degree = 2;
    c.coefficients.preset = Preset::kUnified;
    auto& o = c.coefficients.overrides;
    o = {{"mu", 1e9}, {"lambda", 4e8}, {"d0", 1e-9}, {"rho_f", 1025.0}, {"porosity", 0.1}, {"rho", 2487.5}};
    if (name == "flow-PVE") {
      o["delta1"] = o["delta2"] = 8e-5;
      o["gamma"] = 1.0;
    } else {
      o["delta1"] = o["delta2"] = 0.0;
      o["gamma"] = 0.0;
    }
    if (name == "flow-D") o["tau"] = 0.0;
    c.coefficients.channel = flow_channel();
    c.coefficients.derive_tau = name != "flow-D";
    c.source.kind = SourceKind::kInjection;
    c.source.injection = InjectionSource::channel_default();
    for (int t : {kBottom, kRight, kTop, kLeft}) {
      c.bcs.u[t] = BcType::kDirichlet;
      c.bcs.phi[t] = BcType::kNeumann;
    }
    c.time.integrator.dt = 4e-4;
    c.time.integrator.t_final = 1.0;
    c.time.integrator.scheme = name == "flow-D" ? Scheme::kNewmarkTheta : Scheme::kNewmark;
    c.output.snapshots = {0.2, 0.5, 1.0};
    c.output.probes = flow_probes();
  } else {
    std::string known;
    for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("cli", "unknown scenario '" + name + "' (known: " + known + ")");
  }
  c.output.directory = name;
  return c;
}

RunResult execute_run(const RunConfig& config, const std::filesystem::path& dir, std::ostream* log) {
  if (config.threads > 0) set_num_threads(config.threads);
  Scenario sc = build_scenario(config);
  RunResult res;
  res.directory = dir;
  res.warnings = sc.warnings;
  if (log)
    for (const auto& w : sc.warnings) *log << "warning: " << w << '\n';

  const Discretization& d = sc.disc;
  const PolyMesh& mesh = d.sp().mesh();
  auto write = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    res.files.push_back(dir / name);
  };
  write("config.ini", to_ini(config));

  ProbeRecorder probes(d, config.output.probes);
  std::optional<EnergyTrace> energy;
  if (config.output.energy) energy.emplace(d);

  const double dt = sc.integrator.dt;
  const int n_steps = sc.integrator.num_steps();
  std::vector<std::pair<int, double>> snaps;
  for (double t : config.output.snapshots) snaps.emplace_back(static_cast<int>(std::lround(t / dt)), t);

  auto observer = [&](int step, const State& s) {
    if (!config.output.probes.empty()) probes.record(s);
    if (energy) energy->record(s);
    for (const auto& [k, t] : snaps) {
      if (k != step) continue;
      const std::string tag = time_tag(t);
      const ElementFields f = element_means(d, s);
      write("fields_t" + tag + ".csv", element_csv(mesh, f));
      if (config.output.vtk) write("fields_t" + tag + ".vtk", vtk_snapshot(mesh, f, s.t));
      if (config.output.grid_nx > 0)
        write("grid_t" + tag + ".csv", grid_csv(d, s, config.output.grid_nx, config.output.grid_ny));
    }
    if (log && n_steps >= 10 && step > 0 && step % (n_steps / 10) == 0)
      *log << "  step " << step << "/" << n_steps << "  t = " << s.t << '\n';
  };
  res.summary = run_simulation(d, sc.loads, sc.integrator, sc.initial, observer);

  if (!config.output.probes.empty()) write("probes.csv", probes.to_csv());
  if (energy) write("energy.csv", energy->to_csv());

  nlohmann::ordered_json j;
  j["name"] = config.name;
  j["elements"] = mesh.num_elements();
  j["mesh_size"] = mesh.mesh_size();
  j["degree"] = config.mesh.degree;
  j["displacement_dofs"] = d.ops.nu;
  j["pressure_dofs"] = d.ops.nphi;
  j["scheme"] = scheme_name(sc.integrator.scheme);
  j["dt"] = dt;
  j["steps"] = res.summary.steps;
  j["t_final"] = res.summary.final_state.t;
  j["warnings"] = sc.warnings;
  write("summary.json", j.dump(2) + "\n");
  return res;
}

}  // namespace kvdg
