// perron-lab: weighted p-Dirichlet / obstacle / capacity laboratory CLI.
//
// Subcommands: solve, obstacle, capacity, perron, oracle, experiment, mesh.
// All take a JSON config; tables come out as CSV, summaries as JSON.
// Exit codes: 0 ok, 2 assertion failure, 3 solver failure, 4 config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "perronlab/boundary_data.hpp"
#include "perronlab/capacity.hpp"
#include "perronlab/dirichlet.hpp"
#include "perronlab/domain.hpp"
#include "perronlab/experiments.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/obstacle.hpp"
#include "perronlab/operator.hpp"
#include "perronlab/oracle.hpp"
#include "perronlab/perron.hpp"

using nlohmann::json;
using namespace perronlab;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

DomainMesh mesh_from_config(const json& cfg, double default_h = 0.1) {
  const DomainDescriptor domain =
      cfg.contains("domain") ? domain_from_json(cfg["domain"]) : DomainDescriptor::unit_square();
  if (cfg.contains("mesh_file")) return load_mesh(cfg["mesh_file"].get<std::string>(), domain);
  return build_mesh(domain, cfg.value("h", default_h));
}

void write_solution_csv(const std::string& path, const DomainMesh& mesh, const Vec& u) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file " + path);
  f << "node_id,x,y,u\n";
  for (int i = 0; i < mesh.node_count(); ++i)
    f << i << "," << fmt(mesh.nodes(i, 0)) << "," << fmt(mesh.nodes(i, 1)) << "," << fmt(u[i])
      << "\n";
}

int cmd_solve(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  const DomainMesh mesh = mesh_from_config(cfg);
  const OperatorSpec op = operator_from_json(cfg.at("operator"));
  const Vec f = sample_boundary(mesh, make_scalar_field(cfg.at("boundary")));
  const auto report = solve_dirichlet(mesh, op, f, cfg.value("tol", 0.0));
  write_solution_csv(out, mesh, report.solution);
  std::cout << "solve: nodes=" << mesh.node_count() << " iters=" << report.iterations
            << " residual=" << fmt(report.final_residual_norm)
            << " energy=" << fmt(report.energy_value) << "\n";
  return kExitPass;
}

Vec obstacle_from_config(const json& cfg, const DomainMesh& mesh, std::vector<char>* mask) {
  mask->assign(mesh.node_count(), 0);
  Vec psi = Vec::Zero(mesh.node_count());
  if (cfg.contains("csv")) {
    std::ifstream f(cfg["csv"].get<std::string>());
    if (!f) throw ConfigError("cannot open obstacle csv");
    std::string line;
    std::getline(f, line);  // header: node_id,value
    int id;
    double v;
    char comma;
    while (f >> id >> comma >> v) {
      if (id < 0 || id >= mesh.node_count()) throw ConfigError("obstacle csv node out of range");
      psi[id] = v;
    }
    return psi;
  }
  if (cfg.value("id", std::string()) == "none") {
    mask->assign(mesh.node_count(), 1);
    return psi;
  }
  const ScalarField field = make_scalar_field(cfg);
  for (int i = 0; i < mesh.node_count(); ++i) psi[i] = field(mesh.nodes.row(i));
  return psi;
}

int cmd_obstacle(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  const DomainMesh mesh = mesh_from_config(cfg);
  const OperatorSpec op = operator_from_json(cfg.at("operator"));
  const Vec f = sample_boundary(mesh, make_scalar_field(cfg.at("boundary")));
  ObstacleSpec ob;
  ob.boundary_values = f;
  ob.psi = obstacle_from_config(cfg.at("obstacle"), mesh, &ob.unconstrained);
  const auto report = solve_obstacle(mesh, op, ob, cfg.value("tol", 0.0));
  write_solution_csv(out, mesh, report.solution);
  std::cout << "obstacle: nodes=" << mesh.node_count() << " iters=" << report.iterations
            << " kkt_violation=" << fmt(report.final_residual_norm) << "\n";
  return kExitPass;
}

int cmd_capacity(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  const OperatorSpec op = operator_from_json(cfg.at("operator"));
  const double side = cfg.value("box_side", 4.0);
  int cells = cfg.value("box_cells", 64);
  const int levels = cfg.value("levels", 1);
  const json set = cfg.at("set");
  const std::string set_id = set.value("id", set.at("kind").get<std::string>());

  std::ofstream f(out);
  if (!f) throw ConfigError("cannot open output file " + out);
  f << "set_id,h,box_side,value\n";
  for (int l = 0; l < levels; ++l, cells *= 2) {
    const DomainMesh box = build_square_mesh(Vec2(-side / 2, -side / 2), side, cells);
    std::vector<int> E;
    const std::string kind = set.at("kind").get<std::string>();
    if (kind == "point") {
      E.push_back(box.nearest_node(Vec2(set.at("at")[0].get<double>(),
                                        set.at("at")[1].get<double>())));
    } else if (kind == "segment") {
      const Vec2 a(set.at("from")[0].get<double>(), set.at("from")[1].get<double>());
      const Vec2 b(set.at("to")[0].get<double>(), set.at("to")[1].get<double>());
      const Vec2 d = b - a;
      const double len2 = d.squaredNorm();
      for (int i = 0; i < box.node_count(); ++i) {
        const Vec2 x = box.nodes.row(i);
        const double t = len2 > 0 ? std::clamp((x - a).dot(d) / len2, 0.0, 1.0) : 0.0;
        if ((x - (a + t * d)).norm() <= 1e-9) E.push_back(i);
      }
    } else if (kind == "nodes") {
      E = set.at("ids").get<std::vector<int>>();
    } else {
      throw ConfigError("unknown capacity set kind: " + kind);
    }
    const auto est = estimate_capacity(box, op, E);
    f << set_id << "," << fmt(est.h) << "," << fmt(est.box_side) << "," << fmt(est.value)
      << "\n";
  }
  return kExitPass;
}

int cmd_perron(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  const DomainDescriptor domain =
      cfg.contains("domain") ? domain_from_json(cfg["domain"]) : DomainDescriptor::unit_square();
  const OperatorSpec op = operator_from_json(cfg.at("operator"));
  const ScalarField fb = make_scalar_field(cfg.at("boundary"));
  const PerturbationSpec pert = perturbation_from_json(cfg.at("perturbation"));
  const int mesh_levels = cfg.value("mesh_levels", 1);

  PerronOptions opt;
  opt.depth = cfg.value("depth", 4);
  opt.tol = cfg.value("tol", 0.0);

  std::ofstream f(out);
  if (!f) throw ConfigError("cannot open output file " + out);
  f << "mesh_level,j,gap,dist,psi_norm,capacity_of_E\n";
  DomainMesh mesh = build_mesh(domain, cfg.value("h0", 0.1));
  for (int l = 0; l < mesh_levels; ++l) {
    if (l > 0) mesh = refine(mesh);
    const auto rep = perron_sandwich(mesh, op, sample_boundary(mesh, fb), pert, opt);
    for (const auto& row : rep.levels)
      f << l << "," << row.j << "," << fmt(row.gap) << "," << fmt(row.dist) << ","
        << fmt(row.psi_norm) << "," << fmt(rep.capacity_of_e) << "\n";
  }
  return kExitPass;
}

int cmd_oracle(const std::string& mode, const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot open output file " + out);

  if (mode == "wos") {
    if (cfg.contains("operator")) {
      const OperatorSpec op = operator_from_json(cfg["operator"]);
      if (op.p != 2.0 || !op.weight.is_unit() || !op.is_isotropic())
        throw ConfigError("walk on spheres covers only p = 2 with unit weight");
    }
    const DomainDescriptor domain = domain_from_json(cfg.at("domain"));
    const ScalarField fb = make_scalar_field(cfg.at("boundary"));
    const int samples = cfg.value("samples", 100000);
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    f << "x,y,estimate,stderr,samples\n";
    for (const auto& pt : cfg.at("points")) {
      const Vec2 x(pt[0].get<double>(), pt[1].get<double>());
      const auto est = walk_on_spheres(domain, fb, x, samples, seed);
      f << fmt(x.x()) << "," << fmt(x.y()) << "," << fmt(est.estimate) << ","
        << fmt(est.stderr_) << "," << est.samples << "\n";
    }
    return kExitPass;
  }
  if (mode == "closed-form") {
    const ClosedForm form = closed_form_from_json(cfg.at("form"));
    f << "x,y,value\n";
    for (const auto& pt : cfg.at("points")) {
      const Vec2 x(pt[0].get<double>(), pt[1].get<double>());
      f << fmt(x.x()) << "," << fmt(x.y()) << "," << fmt(eval_closed_form(form, x)) << "\n";
    }
    return kExitPass;
  }
  if (mode == "bf-obstacle") {
    const json mesh_cfg = cfg;
    const DomainMesh mesh = mesh_from_config(mesh_cfg, 0.5);
    const OperatorSpec op = operator_from_json(cfg.at("operator"));
    ObstacleSpec ob;
    ob.boundary_values = sample_boundary(mesh, make_scalar_field(cfg.at("boundary")));
    ob.psi = obstacle_from_config(cfg.at("obstacle"), mesh, &ob.unconstrained);
    const Vec u = brute_force_obstacle(mesh, op, ob);
    f.close();
    write_solution_csv(out, mesh, u);
    return kExitPass;
  }
  throw ConfigError("unknown oracle mode: " + mode);
}

int cmd_mesh(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  const DomainMesh mesh = mesh_from_config(cfg);
  save_mesh(mesh, out);
  std::cout << "mesh: nodes=" << mesh.node_count() << " triangles=" << mesh.triangle_count()
            << " h=" << fmt(mesh.h) << "\n";
  return kExitPass;
}

int cmd_experiment(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  ExperimentConfig config = experiment_config_from_json(cfg);
  if (!out.empty()) config.out_dir = out;
  const auto result = run_experiment(config);
  for (const auto& a : result.assertions)
    std::cout << (a.pass ? "[pass] " : "[FAIL] ") << a.name << " (" << a.invariant
              << "): value=" << fmt(a.value) << " threshold=" << fmt(a.threshold) << "\n";
  std::cout << "experiment " << config.experiment << ": exit " << result.exit_code << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perron-lab: numerical laboratory for the weighted p-Dirichlet problem"};
  app.require_subcommand(1);

  std::string config, out, oracle_mode;

  auto add_common = [&](CLI::App* sub, bool need_out) {
    sub->add_option("--config", config, "JSON config file")->required();
    auto* o = sub->add_option("--out", out, "output path");
    if (need_out) o->required();
  };

  auto* solve = app.add_subcommand("solve", "A-harmonic extension of boundary data");
  add_common(solve, true);
  auto* obstacle = app.add_subcommand("obstacle", "obstacle problem solve");
  add_common(obstacle, true);
  auto* capacity = app.add_subcommand("capacity", "Sobolev (p,w)-capacity estimates");
  add_common(capacity, true);
  auto* perron = app.add_subcommand("perron", "Perron sandwich trajectories");
  add_common(perron, true);
  auto* oracle = app.add_subcommand("oracle", "independent reference computations");
  oracle->add_option("mode", oracle_mode, "wos | closed-form | bf-obstacle")->required();
  add_common(oracle, true);
  auto* experiment = app.add_subcommand("experiment", "batch experiment with assertions");
  add_common(experiment, false);
  auto* mesh = app.add_subcommand("mesh", "build and export a mesh as JSON");
  add_common(mesh, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config, out);
    if (obstacle->parsed()) return cmd_obstacle(config, out);
    if (capacity->parsed()) return cmd_capacity(config, out);
    if (perron->parsed()) return cmd_perron(config, out);
    if (oracle->parsed()) return cmd_oracle(oracle_mode, config, out);
    if (experiment->parsed()) return cmd_experiment(config, out);
    if (mesh->parsed()) return cmd_mesh(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible problem: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
