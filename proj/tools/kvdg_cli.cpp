#include "kvdg/config.hpp"
#include "kvdg/mesh.hpp"
#include "kvdg/parallel.hpp"
#include "kvdg/scenario.hpp"
#include "kvdg/verification.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace kvdg;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

fs::path output_root() {
  const char* env = std::getenv("KVDG_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("kvdg-output");
}

fs::path resolve(const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : output_root() / path;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygonal discontinuous Galerkin solver for coupled poro/thermo-viscoelastic problems"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--seed", seed, "Random seed for mesh generation");
  app.add_option("--threads", threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate a mesh file");
  int voronoi_n = 0;
  std::vector<int> cart;
  std::string domain_text = "0,0,1,1", mesh_out;
  int lloyd = 200;
  auto* vopt = mesh_cmd->add_option("--voronoi", voronoi_n, "Number of Voronoi elements");
  auto* copt = mesh_cmd->add_option("--cartesian", cart, "Cartesian grid NX NY")->expected(2);
  vopt->excludes(copt);
  mesh_cmd->add_option("--domain", domain_text, "xmin,ymin,xmax,ymax or W,H");
  mesh_cmd->add_option("--lloyd", lloyd, "Lloyd iterations")->check(CLI::NonNegativeNumber);
  mesh_cmd->add_option("-o,--output", mesh_out, "Output file (relative paths go under the output root)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a configured or built-in scenario");
  std::string config_file, scenario, run_out;
  std::optional<int> degree;
  std::optional<double> dt, t_final;
  auto* cfg_opt = run_cmd->add_option("-c,--config", config_file, "INI configuration file");
  auto* scn_opt = run_cmd->add_option("-s,--scenario", scenario, "Built-in scenario name");
  cfg_opt->excludes(scn_opt);
  run_cmd->add_option("-o,--output", run_out, "Output directory (relative paths go under the output root)");
  run_cmd->add_option("--degree", degree, "Override the polynomial degree");
  run_cmd->add_option("--dt", dt, "Override the time step");
  run_cmd->add_option("--t-final", t_final, "Override the final time");
  bool list_scenarios = false;
  run_cmd->add_flag("--list", list_scenarios, "List built-in scenarios");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Manufactured-solution convergence sweep");
  std::string sweep_kind, scheme_text, case_name = "trig", sweep_out;
  std::vector<int> sweep_elements, sweep_degrees;
  std::vector<double> sweep_dts, sweep_nus;
  std::optional<int> sw_degree, sw_n, sw_lloyd;
  std::optional<double> sw_dt, sw_tf, sw_nu_u, sw_nu_phi, sw_tau;
  sweep_cmd->add_option("kind", sweep_kind, "h, p, dt or nu")->required()->check(CLI::IsMember({"h", "p", "l", "dt", "nu"}));
  sweep_cmd->add_option("--scheme", scheme_text, "newmark (tau1 = 1) or newmark-theta (tau1 = 0)")
      ->check(CLI::IsMember({"newmark", "newmark-theta"}));
  sweep_cmd->add_option("--tau", sw_tau, "Relaxation time tau1 = tau2");
  sweep_cmd->add_option("--degree", sw_degree, "Fixed degree");
  sweep_cmd->add_option("--n-elements", sw_n, "Fixed element count");
  sweep_cmd->add_option("--dt", sw_dt, "Fixed time step");
  sweep_cmd->add_option("--t-final", sw_tf, "Final time");
  sweep_cmd->add_option("--case", case_name, "Manufactured case (trig, linear, scaled)");
  sweep_cmd->add_option("--nu-u", sw_nu_u, "Displacement scaling");
  sweep_cmd->add_option("--nu-phi", sw_nu_phi, "Pressure scaling");
  sweep_cmd->add_option("--elements", sweep_elements, "Element counts of an h sweep")->delimiter(',');
  sweep_cmd->add_option("--degrees", sweep_degrees, "Degrees of a p sweep")->delimiter(',');
  sweep_cmd->add_option("--dts", sweep_dts, "Time steps of a dt sweep")->delimiter(',');
  sweep_cmd->add_option("--nus", sweep_nus, "nu_phi values of a nu sweep")->delimiter(',');
  sweep_cmd->add_option("--lloyd", sw_lloyd, "Lloyd iterations");
  sweep_cmd->add_option("-o,--output", sweep_out, "CSV file (relative paths go under the output root)");

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Extract probe series from a finished run");
  std::string probe_dir, probe_name, probe_field = "all";
  probe_cmd->add_option("run", probe_dir, "Run directory (relative paths go under the output root)")->required();
  probe_cmd->add_option("-n,--name", probe_name, "Probe name (default: all)");
  probe_cmd->add_option("-f,--field", probe_field, "ux, uy, vx, vy, phi, w or all")
      ->check(CLI::IsMember({"all", "ux", "uy", "vx", "vy", "phi", "w"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads > 0) set_num_threads(threads);

    if (mesh_cmd->parsed()) {
      const Rect dom = parse_domain(domain_text);
      PolyMesh mesh = [&] {
        if (!cart.empty()) {
          if (cart[0] < 1 || cart[1] < 1) throw ConfigError("cli", "cartesian sizes must be positive");
          return cartesian_mesh(dom, cart[0], cart[1]);
        }
        if (voronoi_n < 2) throw ConfigError("cli", "give --voronoi N (N >= 2) or --cartesian NX NY");
        return generate_voronoi(dom, voronoi_n, lloyd, seed.value_or(1)).mesh;
      }();
      const fs::path out = resolve(mesh_out.empty() ? "mesh.txt" : mesh_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      save_mesh(mesh, out);
      const auto q = quality_report(mesh);
      std::cout << "elements " << mesh.num_elements() << "\nfaces " << mesh.num_faces() << "\nh " << mesh.mesh_size()
                << "\nmin_shape_ratio " << q.min_shape_ratio << "\nfile " << out.string() << '\n';
      return 0;
    }

    if (run_cmd->parsed()) {
      if (list_scenarios) {
        for (const auto& n : scenario_names()) std::cout << n << '\n';
        return 0;
      }
      RunConfig cfg;
      if (!config_file.empty()) cfg = load_run_config(config_file);
      else if (!scenario.empty()) cfg = scenario_config(scenario);
      else throw ConfigError("cli", "give --config FILE or --scenario NAME");
      if (seed) cfg.mesh.seed = *seed;
      if (degree) cfg.mesh.degree = *degree;
      if (dt) cfg.time.integrator.dt = *dt;
      if (t_final) {
        cfg.time.integrator.t_final = *t_final;
        std::erase_if(cfg.output.snapshots, [&](double t) { return t > *t_final + 1e-12; });
      }
      if (threads > 0) cfg.threads = threads;
      const fs::path dir = resolve(run_out.empty() ? cfg.output.directory : run_out);
      std::cerr << "running " << cfg.name << " -> " << dir.string() << '\n';
      const RunResult r = execute_run(cfg, dir, &std::cerr);
      std::cout << "steps " << r.summary.steps << '\n';
      for (const auto& f : r.files) std::cout << f.string() << '\n';
      return 0;
    }

    if (sweep_cmd->parsed()) {
      SweepConfig sc;
      sc.kind = parse_sweep_kind(sweep_kind);
      double tau = scheme_text == "newmark-theta" ? 0.0 : 1.0;
      if (sw_tau) tau = *sw_tau;
      if (!scheme_text.empty() && (tau > 0.0) != (scheme_text == "newmark"))
        throw ConfigError("cli", "--scheme " + scheme_text + " is inconsistent with --tau");
      sc.material = convergence_material(tau);
      sc.case_name = case_name;
      if (sw_degree) sc.degree = *sw_degree;
      if (sw_n) sc.n_elements = *sw_n;
      if (sw_dt) sc.dt = *sw_dt;
      if (sw_tf) sc.t_final = *sw_tf;
      if (sw_nu_u) sc.nu_u = *sw_nu_u;
      if (sw_nu_phi) sc.nu_phi = *sw_nu_phi;
      if (sw_lloyd) sc.lloyd_iters = *sw_lloyd;
      if (seed) sc.seed = *seed;
      if (!sweep_elements.empty()) sc.elements = sweep_elements;
      if (!sweep_degrees.empty()) sc.degrees = sweep_degrees;
      if (!sweep_dts.empty()) sc.dts = sweep_dts;
      if (!sweep_nus.empty()) sc.nu_phis = sweep_nus;
      sc.progress = [](const ErrorRow& r) {
        std::cerr << "  level done: elements " << r.elements << " degree " << r.degree << " dt " << r.dt
                  << " e_u " << r.err.u_l2 << " e_phi " << r.err.phi_l2 << '\n';
      };
      const ErrorReport rep = convergence_sweep(sc);
      const std::string csv = rep.to_csv();
      std::cout << csv;
      if (!sweep_out.empty()) {
        const fs::path out = resolve(sweep_out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        std::ofstream(out) << csv;
      }
      if (!rep.failure.empty()) {
        std::cerr << "sweep stopped: " << rep.failure << '\n';
        return kExitNumerical;
      }
      return 0;
    }

    if (probe_cmd->parsed()) {
      const fs::path file = resolve(probe_dir) / "probes.csv";
      std::ifstream in(file);
      if (!in) throw ConfigError("cli", "no probe series at " + file.string());
      std::string line;
      std::getline(in, line);
      const auto header = split_csv_line(line);
      int col = -1;
      for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == probe_field) col = static_cast<int>(i);
      std::cout << (probe_field == "all" ? line : "t,probe," + probe_field) << '\n';
      bool found = false;
      while (std::getline(in, line)) {
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw ConfigError("cli", "malformed probe row: " + line);
        if (!probe_name.empty() && cells[1] != probe_name) continue;
        found = true;
        if (col < 0) std::cout << line << '\n';
        else std::cout << cells[0] << ',' << cells[1] << ',' << cells[static_cast<std::size_t>(col)] << '\n';
      }
      if (!found) throw ConfigError("cli", "no samples for probe '" + probe_name + "'");
      return 0;
    }
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TopologyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
