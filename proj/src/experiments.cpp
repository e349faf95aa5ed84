#include "perronlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

#include "perronlab/boundary_data.hpp"
#include "perronlab/capacity.hpp"
#include "perronlab/dirichlet.hpp"
#include "perronlab/domain.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/obstacle.hpp"
#include "perronlab/operator.hpp"
#include "perronlab/oracle.hpp"
#include "perronlab/perron.hpp"

namespace perronlab {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// CSV cell: either a number (formatted with %.12g) or a literal string.
struct Cell {
  std::string text;
  Cell(double v) : text(fmt(v)) {}
  Cell(int v) : text(std::to_string(v)) {}
  Cell(const char* s) : text(s) {}
  Cell(std::string s) : text(std::move(s)) {}
};

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<Cell>>& rows) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file " + path);
  for (size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i].text;
    f << "\n";
  }
}

struct Parsed {
  DomainDescriptor domain;
  OperatorSpec op;
  ScalarField boundary;
  PerturbationSpec pert;
};

Parsed parse(const ExperimentConfig& c) {
  Parsed p;
  p.domain = c.domain.is_null() ? DomainDescriptor::unit_square() : domain_from_json(c.domain);
  p.op = c.op.is_null() ? OperatorSpec{} : operator_from_json(c.op);
  p.boundary = c.boundary.is_null()
                   ? make_scalar_field({{"id", "affine"}, {"a", 1.0}})
                   : make_scalar_field(c.boundary);
  p.pert = c.perturbation.is_null() ? PerturbationSpec::none()
                                    : perturbation_from_json(c.perturbation);
  return p;
}

std::vector<DomainMesh> mesh_chain(const DomainDescriptor& d, double h0, int levels) {
  std::vector<DomainMesh> chain;
  chain.push_back(build_mesh(d, h0));
  for (int l = 1; l < levels; ++l) chain.push_back(refine(chain.back()));
  return chain;
}

void add(std::vector<Assertion>& as, const std::string& name, const std::string& invariant,
         bool pass, double value, double threshold, const std::string& detail = "") {
  as.push_back({name, invariant, pass, value, threshold, detail});
}

double boundary_oscillation(const DomainMesh& mesh, const Vec& f) {
  double lo = f[mesh.boundary_nodes[0]], hi = lo;
  for (int i : mesh.boundary_nodes) {
    lo = std::min(lo, f[i]);
    hi = std::max(hi, f[i]);
  }
  return hi - lo;
}

// ---------------------------------------------------------------------------
// invariance (and the sobolev-data variant, which feeds nodal data in)

struct LevelOutcome {
  bool psi_failed = false;
  double capacity_value = 0.0;
  PerronSandwichReport report;
  std::vector<double> direct;  // per cap (fallback route when psi failed)
};

std::vector<Assertion> run_invariance_core(const ExperimentConfig& c, const Parsed& p,
                                           const std::vector<DomainMesh>& meshes,
                                           const std::vector<Vec>& boundary_per_level,
                                           const std::string& tag,
                                           std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  const int levels = static_cast<int>(meshes.size());
  std::vector<LevelOutcome> out(levels);

  auto run_level = [&](int l) {
    PerronOptions opt;
    opt.depth = c.depth;
    opt.tol = c.tol;
    LevelOutcome& o = out[l];
    try {
      o.report = perron_sandwich(meshes[l], p.op, boundary_per_level[l], p.pert, opt);
      o.direct = o.report.direct_dist;
      o.capacity_value = o.report.capacity_of_e;
    } catch (const PsiConstructionError& e) {
      o.psi_failed = true;
      o.capacity_value = e.observed_values.empty() ? 0.0 : e.observed_values[0];
      for (double cap : p.pert.caps)
        o.direct.push_back(direct_perturbation_distance(meshes[l], p.op,
                                                        boundary_per_level[l], p.pert, cap,
                                                        0.0, c.tol));
    }
  };
  const int jobs = std::min(thread_cap(), levels);
  if (jobs > 1) {
    std::vector<std::future<void>> fut;
    for (int l = 0; l < levels; ++l)
      fut.push_back(std::async(std::launch::async, run_level, l));
    for (auto& f : fut) f.get();
  } else {
    for (int l = 0; l < levels; ++l) run_level(l);
  }

  // Tables: the sandwich trajectories and the direct distances.
  std::vector<std::vector<Cell>> sandwich_rows, direct_rows;
  for (int l = 0; l < levels; ++l) {
    if (!out[l].psi_failed)
      for (const auto& row : out[l].report.levels)
        sandwich_rows.push_back({l, row.j, row.gap, row.dist, row.psi_norm,
                                 out[l].capacity_value});
    for (size_t k = 0; k < p.pert.caps.size(); ++k)
      direct_rows.push_back({l, p.pert.caps[k], out[l].direct[k], out[l].capacity_value,
                             out[l].psi_failed ? 1 : 0});
  }
  const std::string sandwich_path = c.out_dir + "/" + tag + "_sandwich.csv";
  const std::string direct_path = c.out_dir + "/" + tag + "_direct.csv";
  write_csv(sandwich_path, {"mesh_level", "j", "gap", "dist", "psi_norm", "capacity_of_E"},
            sandwich_rows);
  write_csv(direct_path, {"mesh_level", "cap", "direct_dist", "capacity_of_E", "psi_failed"},
            direct_rows);
  artifacts.push_back(sandwich_path);
  artifacts.push_back(direct_path);

  const bool point_like = p.pert.kind == PerturbationSpec::Kind::Point ||
                          (p.pert.kind == PerturbationSpec::Kind::Nodes &&
                           p.pert.node_ids.size() <= 2);

  if (point_like) {
    for (int l = 0; l < levels; ++l) {
      if (out[l].psi_failed) {
        add(as, "psi-construction-level-" + std::to_string(l),
            "capacity.small-set-constructibility", false, out[l].capacity_value, 0.0,
            "psi sequence unexpectedly failed for a point support");
        continue;
      }
      const auto& r = out[l].report;
      add(as, "sandwich-ordering-level-" + std::to_string(l), "perron.sandwich-ordering",
          r.sandwich_ok, 0.0, 0.0);
      add(as, "monotone-levels-level-" + std::to_string(l), "perron.monotone-convergence",
          r.monotone_ok, 0.0, 0.0);
      add(as, "boundary-domination-level-" + std::to_string(l), "perron.upper-class-membership",
          r.domination_ok, 0.0, 0.0);
    }
    // Headline decay, at every cap of the sweep.
    for (size_t k = 0; k < p.pert.caps.size(); ++k) {
      bool decays = true;
      double worst = 0.0;
      for (int l = 0; l + 1 < levels; ++l) {
        const double ratio = out[l + 1].direct[k] / std::max(out[l].direct[k], 1e-300);
        worst = std::max(worst, ratio);
        if (ratio > 0.7) decays = false;
      }
      add(as, "point-invariance-decay-cap-" + fmt(p.pert.caps[k]),
          "perron.capacity-zero-invariance", decays, worst, 0.7,
          "max per-level ratio of |H(f+h)-Hf| away from E");
    }
  } else {
    // Positive-capacity support: the psi construction must fail and the
    // direct distance must persist under refinement.
    bool all_failed = true;
    double cap_lo = std::numeric_limits<double>::max(), cap_hi = 0.0;
    for (int l = 0; l < levels; ++l) {
      all_failed = all_failed && out[l].psi_failed;
      cap_lo = std::min(cap_lo, out[l].capacity_value);
      cap_hi = std::max(cap_hi, out[l].capacity_value);
    }
    add(as, "psi-failure-signature", "capacity.positive-capacity-signature", all_failed,
        cap_lo, 0.0, "construction must fail on every level for an edge support");
    add(as, "edge-capacity-floor", "capacity.mesh-independent-floor",
        cap_lo >= 0.8 * cap_hi && cap_hi > 0.0, cap_lo / std::max(cap_hi, 1e-300), 0.8);
    for (size_t k = 0; k < p.pert.caps.size(); ++k) {
      bool persists = true;
      double worst = 1.0;
      for (int l = 1; l < levels; ++l) {
        const double ratio = out[l].direct[k] / std::max(out[0].direct[k], 1e-300);
        worst = std::min(worst, ratio);
        if (ratio < 0.8) persists = false;
      }
      add(as, "edge-persistence-cap-" + fmt(p.pert.caps[k]),
          "perron.positive-capacity-persistence", persists, worst, 0.8,
          "min ratio of |H(f+h)-Hf| vs the coarsest level");
    }
  }
  return as;
}

std::vector<Assertion> run_invariance(const ExperimentConfig& c, const Parsed& p,
                                      std::vector<std::string>& artifacts) {
  auto meshes = mesh_chain(p.domain, c.h0, c.mesh_levels);
  std::vector<Vec> fb;
  for (const auto& m : meshes) fb.push_back(sample_boundary(m, p.boundary));
  return run_invariance_core(c, p, meshes, fb, "invariance", artifacts);
}

std::vector<Assertion> run_sobolev_data(const ExperimentConfig& c, const Parsed& p,
                                        std::vector<std::string>& artifacts) {
  // Nodal Sobolev boundary data: continuous part plus the restriction of a
  // small-capacity minimizer spiking at the perturbation support.
  auto meshes = mesh_chain(p.domain, c.h0, c.mesh_levels);
  std::vector<Vec> fb;
  for (const auto& m : meshes) {
    Vec f = sample_boundary(m, p.boundary);
    const auto E = p.pert.resolve(m);
    if (!E.empty()) {
      auto box = build_ambient_box(m, E);
      const auto est = estimate_capacity(box.mesh, p.op, box.set_ids);
      for (int i : m.boundary_nodes)
        f[i] += std::max(0.0, interpolate(box.mesh, est.minimizer, m.nodes.row(i)));
    }
    fb.push_back(f);
  }
  return run_invariance_core(c, p, meshes, fb, "sobolev_data", artifacts);
}

// ---------------------------------------------------------------------------
// resolutivity: Lipschitz approximations f_k of a continuous f; the
// sandwich gap plus the 2^{1-k} envelope must collapse.

std::vector<Assertion> run_resolutivity(const ExperimentConfig& c, const Parsed& p,
                                        std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  const DomainMesh mesh = build_mesh(p.domain, c.h0);
  const Vec f = sample_boundary(mesh, p.boundary);

  const int kmax = 5;
  std::vector<std::vector<Cell>> rows;
  std::vector<double> bounds;
  for (int k = 1; k <= kmax; ++k) {
    // Pasch-Hausdorff envelope over the boundary nodes: the largest
    // L-Lipschitz minorant; L doubles until the uniform error fits 2^{-k}.
    double L = std::ldexp(1.0, k);
    Vec fk(mesh.node_count());
    double eps = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
      eps = 0.0;
      for (int i : mesh.boundary_nodes) {
        double v = std::numeric_limits<double>::max();
        for (int j : mesh.boundary_nodes)
          v = std::min(v, f[j] + L * (Vec2(mesh.nodes.row(i)) - Vec2(mesh.nodes.row(j))).norm());
        fk[i] = v;
        eps = std::max(eps, f[i] - v);
      }
      if (eps <= std::ldexp(1.0, -k)) break;
      L *= 2.0;
    }

    PerronOptions opt;
    opt.depth = c.depth;
    opt.tol = c.tol;
    const auto rep = perron_sandwich(mesh, p.op, fk, p.pert, opt);
    const double gap_far = rep.levels.back().gap_far;
    const double bound = gap_far + std::ldexp(2.0, -k);
    bounds.push_back(bound);
    rows.push_back({k, L, eps, gap_far, bound});

    add(as, "lipschitz-error-k" + std::to_string(k), "perron.uniform-approximation",
        eps <= std::ldexp(1.0, -k), eps, std::ldexp(1.0, -k));
    add(as, "sandwich-ordering-k" + std::to_string(k), "perron.sandwich-ordering",
        rep.sandwich_ok, 0.0, 0.0);
  }
  const std::string path = c.out_dir + "/resolutivity.csv";
  write_csv(path, {"k", "lipschitz_L", "uniform_error", "gap_far", "resolutive_bound"}, rows);
  artifacts.push_back(path);

  add(as, "gap-collapse", "perron.resolutivity-bound-collapse",
      bounds.back() <= 0.5 * bounds.front() && bounds.back() <= 0.15,
      bounds.back(), 0.15, "upper-lower bracket width plus 2^{1-k} envelope");
  return as;
}

// ---------------------------------------------------------------------------
// uniqueness

std::vector<Assertion> run_uniqueness(const ExperimentConfig& c, const Parsed& p,
                                      std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  if (p.domain.shape != DomainDescriptor::Shape::Disc)
    throw ConfigError("uniqueness experiment runs on the disc (Poisson kernel part)");
  auto meshes = mesh_chain(p.domain, c.h0, 3);
  const DomainMesh& mesh = meshes.front();
  const Vec f = sample_boundary(mesh, p.boundary);
  const Vec hf = solve_dirichlet(mesh, p.op, f, c.tol).solution;

  std::vector<std::vector<Cell>> rows;

  // The Sobolev solution itself passes with empty exceptional set.
  {
    const auto v = uniqueness_check(mesh, p.op, f, hf, {});
    add(as, "accepts-Hf", "perron.uniqueness-of-bounded-solutions", !v.rejected && v.pass,
        v.distance, 1e-6);
    rows.push_back({"Hf", v.distance, v.pass ? 1 : 0, v.rejection});
  }

  // A solution with different data on a positive-capacity arc must be far.
  {
    const auto E = p.pert.resolve(mesh);
    if (E.empty()) throw ConfigError("uniqueness experiment needs an arc perturbation");
    Vec g = f;
    for (int i : E) g[i] += 1.0;
    const Vec hg = solve_dirichlet(mesh, p.op, g, c.tol).solution;
    const auto v = uniqueness_check(mesh, p.op, f, hg, E);
    add(as, "rejects-Hg-margin", "perron.uniqueness-margin-on-arcs", !v.rejected && !v.pass &&
            v.distance >= 0.05,
        v.distance, 0.05, "capacity of E = " + fmt(v.capacity_of_e));
    rows.push_back({"Hg", v.distance, v.pass ? 1 : 0, v.rejection});
  }

  // Unbounded competitor: Hf plus the Poisson kernel, capped ever higher.
  const double pole_angle = 0.0;
  const Vec2 pole(std::cos(pole_angle), std::sin(pole_angle));
  {
    const int pole_node = mesh.nearest_boundary_node(pole);
    for (double cap : {100.0, 1000.0}) {
      const ScalarField kernel =
          make_scalar_field({{"id", "poisson-kernel"}, {"pole_angle", pole_angle}, {"cap", cap}});
      const Vec cand = hf + sample_all(mesh, kernel);
      const auto v = uniqueness_check(mesh, p.op, f, cand, {pole_node});
      add(as, "poisson-rejected-cap-" + fmt(cap), "perron.boundedness-requirement",
          v.rejected && v.rejection.find("boundedness") != std::string::npos, cap, 0.0,
          v.rejection);
      rows.push_back({"Hf+poisson@" + fmt(cap), v.distance, 0, v.rejection});
    }
  }
  const std::string upath = c.out_dir + "/uniqueness.csv";
  write_csv(upath, {"candidate", "distance", "pass", "rejection"}, rows);
  artifacts.push_back(upath);

  // Interior consistency of the kernel itself, away from the pole.
  std::vector<std::vector<Cell>> krows;
  std::vector<double> res_far, umax;
  for (size_t l = 0; l < meshes.size(); ++l) {
    const DomainMesh& m = meshes[l];
    const double cap = 2.0 / m.h;
    const ScalarField kernel =
        make_scalar_field({{"id", "poisson-kernel"}, {"pole_angle", pole_angle}, {"cap", cap}});
    const Vec u = sample_all(m, kernel);
    const Vec r = residual(m, p.op, u);
    double rfar = 0.0, un = 0.0;
    for (int i : m.interior_nodes) {
      if ((Vec2(m.nodes.row(i)) - pole).norm() >= 0.5) rfar = std::max(rfar, std::abs(r[i]));
      un = std::max(un, std::abs(u[i]));
    }
    res_far.push_back(rfar);
    umax.push_back(un);
    krows.push_back({static_cast<int>(l), m.h, rfar, un});
  }
  const std::string kpath = c.out_dir + "/poisson_kernel.csv";
  write_csv(kpath, {"mesh_level", "h", "residual_far_from_pole", "max_u_interior"}, krows);
  artifacts.push_back(kpath);

  bool decay = true, growth = true;
  for (size_t l = 0; l + 1 < res_far.size(); ++l) {
    if (res_far[l + 1] > 0.7 * res_far[l]) decay = false;
    if (umax[l + 1] < 1.5 * umax[l]) growth = false;
  }
  add(as, "kernel-residual-decay", "oracle.closed-form-consistency", decay,
      res_far.back() / std::max(res_far.front(), 1e-300), 0.7);
  add(as, "kernel-pole-growth", "oracle.kernel-unboundedness", growth,
      umax.back() / std::max(umax.front(), 1e-300), 1.5);
  return as;
}

// ---------------------------------------------------------------------------
// monotone-convergence: u_j decreases to Hf at the finest mesh.

std::vector<Assertion> run_monotone_convergence(const ExperimentConfig& c, const Parsed& p,
                                                std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  auto meshes = mesh_chain(p.domain, c.h0, c.mesh_levels);
  const DomainMesh& mesh = meshes.back();
  const Vec f = sample_boundary(mesh, p.boundary);

  PerronOptions opt;
  opt.depth = c.depth;
  opt.tol = c.tol;
  const auto rep = perron_sandwich(mesh, p.op, f, p.pert, opt);

  std::vector<std::vector<Cell>> rows;
  for (const auto& row : rep.levels)
    rows.push_back({row.j, row.gap, row.dist, row.psi_norm});
  const std::string path = c.out_dir + "/monotone_convergence.csv";
  write_csv(path, {"j", "gap", "dist", "psi_norm"}, rows);
  artifacts.push_back(path);

  // Nodewise decrease across levels.
  double worst_increase = 0.0;
  for (size_t j = 1; j < rep.upper.size(); ++j)
    worst_increase = std::max(worst_increase, (rep.upper[j] - rep.upper[j - 1]).maxCoeff());
  add(as, "nodewise-monotone", "perron.monotone-convergence", worst_increase <= 1e-8,
      worst_increase, 1e-8);

  bool dist_monotone = true;
  for (size_t j = 1; j < rep.levels.size(); ++j)
    if (rep.levels[j].dist > rep.levels[j - 1].dist + 1e-9) dist_monotone = false;
  add(as, "distance-nonincreasing", "perron.monotone-convergence", dist_monotone, 0.0, 0.0);

  const double osc = boundary_oscillation(mesh, f);
  add(as, "final-distance", "perron.obstacle-iterates-reach-Hf",
      rep.levels.back().dist <= 0.05 * osc, rep.levels.back().dist, 0.05 * osc);
  add(as, "sandwich-ordering", "perron.sandwich-ordering", rep.sandwich_ok, 0.0, 0.0);
  return as;
}

// ---------------------------------------------------------------------------
// monotone-data: H(f + 2^{-j} psi) decreases to Hf.

std::vector<Assertion> run_monotone_data(const ExperimentConfig& c, const Parsed& p,
                                         std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  const DomainMesh mesh = build_mesh(p.domain, c.h0);
  const Vec f = sample_boundary(mesh, p.boundary);
  const Vec psi = sample_boundary(mesh, make_scalar_field({{"id", "pos-sin-pi-x"}}));

  const int levels = std::max(4, c.depth);
  const double tol = c.tol > 0.0 ? c.tol : 1e-11;
  const auto table = monotone_data_study(mesh, p.op, f, psi, levels, tol);

  std::vector<std::vector<Cell>> rows;
  for (const auto& r : table.rows)
    rows.push_back({r.level, r.delta, r.max_gap, r.monotone_violation});
  const std::string path = c.out_dir + "/monotone_data.csv";
  write_csv(path, {"j", "delta", "max_gap", "monotone_violation"}, rows);
  artifacts.push_back(path);

  add(as, "pointwise-monotone", "dirichlet.monotone-data-decrease", table.monotone, 0.0, 0.0);
  bool halving = true;
  double worst = 0.5;
  for (size_t j = 1; j < table.rows.size(); ++j) {
    const double ratio = table.rows[j].max_gap / std::max(table.rows[j - 1].max_gap, 1e-300);
    worst = ratio;
    if (ratio < 0.375 || ratio > 0.625) halving = false;
  }
  add(as, "gap-halving", "dirichlet.monotone-data-halving", halving, worst, 0.625,
      "per-level gap ratio must stay within 0.5 +- 25%");
  return as;
}

// ---------------------------------------------------------------------------
// capacity-scaling

std::vector<Assertion> run_capacity_scaling(const ExperimentConfig& c, const Parsed& p,
                                            std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  OperatorSpec op = p.op;

  std::vector<std::vector<Cell>> rows;

  // Point set in a box of side 4; the value must decay with ratio in (0.5,1).
  std::vector<double> point_values;
  for (int n : {16, 32, 64, 128}) {
    const DomainMesh box = build_square_mesh(Vec2(-2.0, -2.0), 4.0, n);
    const std::vector<int> E = {box.nearest_node(Vec2::Zero())};
    const auto est = estimate_capacity(box, op, E);
    point_values.push_back(est.value);
    rows.push_back({"point", est.h, est.box_side, est.value});
  }
  bool decays = true, ratios_ok = true;
  for (size_t i = 1; i < point_values.size(); ++i) {
    if (!(point_values[i] < point_values[i - 1])) decays = false;
    const double r = point_values[i] / point_values[i - 1];
    if (!(r > 0.5 && r < 1.0)) ratios_ok = false;
  }
  add(as, "point-strict-decrease", "capacity.point-refinement-decay", decays,
      point_values.back(), 0.0);
  add(as, "point-decay-ratios", "capacity.point-refinement-decay", ratios_ok,
      point_values.back() / point_values[point_values.size() - 2], 1.0,
      "successive ratios must lie in (0.5, 1)");

  // Unit boundary edge in a box of side 8; the value must keep a floor.
  std::vector<double> edge_values;
  for (int n : {32, 64, 128}) {
    const DomainMesh box = build_square_mesh(Vec2(-3.5, -4.0), 8.0, n);
    // Lattice nodes on the segment [(0,0),(1,0)], interior to the box.
    std::vector<int> ids;
    for (int i = 0; i < box.node_count(); ++i) {
      const Vec2 x = box.nodes.row(i);
      if (std::abs(x.y()) < 1e-12 && x.x() > -1e-12 && x.x() < 1.0 + 1e-12) ids.push_back(i);
    }
    const auto est = estimate_capacity(box, op, ids);
    edge_values.push_back(est.value);
    rows.push_back({"edge", est.h, est.box_side, est.value});
  }
  const double lo = *std::min_element(edge_values.begin(), edge_values.end());
  const double hi = *std::max_element(edge_values.begin(), edge_values.end());
  add(as, "edge-floor", "capacity.mesh-independent-floor", lo >= 0.8 * hi, lo / hi, 0.8,
      "edge capacity varies by at most 20% across refinements");

  const std::string path = c.out_dir + "/capacity.csv";
  write_csv(path, {"set_id", "h", "box_side", "value"}, rows);
  artifacts.push_back(path);
  return as;
}

// ---------------------------------------------------------------------------
// poisson-counterexample

std::vector<Assertion> run_poisson_counterexample(const ExperimentConfig& c, const Parsed& p,
                                                  std::vector<std::string>& artifacts) {
  std::vector<Assertion> as;
  if (p.domain.shape != DomainDescriptor::Shape::Disc)
    throw ConfigError("poisson-counterexample runs on the unit disc");
  auto meshes = mesh_chain(p.domain, c.h0, c.mesh_levels);

  std::vector<std::vector<Cell>> rows;
  std::vector<double> res_far, umax, res_orders;
  const Vec2 pole(1.0, 0.0);
  for (size_t l = 0; l < meshes.size(); ++l) {
    const DomainMesh& m = meshes[l];
    const double cap = 2.0 / m.h;
    const ScalarField kernel =
        make_scalar_field({{"id", "poisson-kernel"}, {"pole_angle", 0.0}, {"cap", cap}});
    const Vec u = sample_all(m, kernel);
    const Vec r = residual(m, p.op, u);
    double rfar = 0.0, un = 0.0;
    for (int i : m.interior_nodes) {
      if ((Vec2(m.nodes.row(i)) - pole).norm() >= 0.5) rfar = std::max(rfar, std::abs(r[i]));
      un = std::max(un, std::abs(u[i]));
    }
    res_far.push_back(rfar);
    umax.push_back(un);
    rows.push_back({static_cast<int>(l), m.h, rfar, un, cap});
  }
  const std::string path = c.out_dir + "/poisson_counterexample.csv";
  write_csv(path, {"mesh_level", "h", "residual_far_from_pole", "max_u_interior", "pole_cap"},
            rows);
  artifacts.push_back(path);

  bool decay = true, growth = true;
  for (size_t l = 0; l + 1 < res_far.size(); ++l) {
    if (res_far[l + 1] > 0.7 * res_far[l]) decay = false;
    if (umax[l + 1] < 1.5 * umax[l]) growth = false;
  }
  add(as, "interior-residual-decay", "oracle.closed-form-consistency", decay,
      res_far.back() / std::max(res_far.front(), 1e-300), 0.7,
      "kernel is discretely harmonic away from its pole");
  add(as, "pole-growth", "oracle.kernel-unboundedness", growth,
      umax.back() / std::max(umax.front(), 1e-300), 1.5,
      "interior maximum grows toward the pole under refinement");
  return as;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  if (!c.domain.is_null()) j["domain"] = c.domain;
  if (!c.op.is_null()) j["operator"] = c.op;
  if (!c.boundary.is_null()) j["boundary"] = c.boundary;
  if (!c.perturbation.is_null()) j["perturbation"] = c.perturbation;
  j["mesh_levels"] = c.mesh_levels;
  j["h0"] = c.h0;
  j["depth"] = c.depth;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  c.domain = j.value("domain", nlohmann::json());
  c.op = j.value("operator", nlohmann::json());
  c.boundary = j.value("boundary", nlohmann::json());
  c.perturbation = j.value("perturbation", nlohmann::json());
  c.mesh_levels = j.value("mesh_levels", 3);
  c.h0 = j.value("h0", 0.1);
  c.depth = j.value("depth", 4);
  c.tol = j.value("tol", 0.0);
  c.seed = j.value("seed", std::uint64_t{1});
  c.out_dir = j.value("out_dir", std::string("."));
  return c;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  std::vector<std::string> artifacts;
  try {
    fs::create_directories(config.out_dir);
    const Parsed parsed = parse(config);

    if (config.experiment == "invariance") {
      result.assertions = run_invariance(config, parsed, artifacts);
    } else if (config.experiment == "sobolev-data") {
      result.assertions = run_sobolev_data(config, parsed, artifacts);
    } else if (config.experiment == "resolutivity") {
      result.assertions = run_resolutivity(config, parsed, artifacts);
    } else if (config.experiment == "uniqueness") {
      result.assertions = run_uniqueness(config, parsed, artifacts);
    } else if (config.experiment == "monotone-convergence") {
      result.assertions = run_monotone_convergence(config, parsed, artifacts);
    } else if (config.experiment == "monotone-data") {
      result.assertions = run_monotone_data(config, parsed, artifacts);
    } else if (config.experiment == "capacity-scaling") {
      result.assertions = run_capacity_scaling(config, parsed, artifacts);
    } else if (config.experiment == "poisson-counterexample") {
      result.assertions = run_poisson_counterexample(config, parsed, artifacts);
    } else {
      throw ConfigError("unknown experiment id: " + config.experiment);
    }
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    result.summary = {{"error", e.what()}, {"kind", "config"}};
    return result;
  } catch (const SolverError& e) {
    result.exit_code = kExitSolver;
    result.summary = {{"error", e.what()}, {"kind", "solver"}, {"artifacts", artifacts}};
    const std::string spath = config.out_dir + "/summary.json";
    std::ofstream f(spath);
    if (f) f << result.summary.dump(2) << "\n";
    return result;
  }

  bool all_pass = true;
  nlohmann::json ja = nlohmann::json::array();
  for (const auto& a : result.assertions) {
    all_pass = all_pass && a.pass;
    ja.push_back({{"name", a.name},
                  {"invariant", a.invariant},
                  {"pass", a.pass},
                  {"value", a.value},
                  {"threshold", a.threshold},
                  {"detail", a.detail}});
  }
  result.exit_code = all_pass ? kExitPass : kExitAssertion;
  result.summary = {{"experiment", config.experiment},
                    {"config", to_json(config)},
                    {"assertions", ja},
                    {"pass", all_pass},
                    {"artifacts", artifacts}};
  const std::string spath = config.out_dir + "/summary.json";
  std::ofstream f(spath);
  if (!f) throw ConfigError("cannot write " + spath);
  f << result.summary.dump(2) << "\n";
  return result;
}

}  // namespace perronlab
