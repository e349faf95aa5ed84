#include "perronlab/perron.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace perronlab {

PerturbationSpec PerturbationSpec::none() { return {}; }

PerturbationSpec PerturbationSpec::at_point(const Vec2& x) {
  PerturbationSpec p;
  p.kind = Kind::Point;
  p.point = x;
  return p;
}

PerturbationSpec PerturbationSpec::on_segment(const Vec2& a, const Vec2& b) {
  PerturbationSpec p;
  p.kind = Kind::Segment;
  p.seg_a = a;
  p.seg_b = b;
  return p;
}

PerturbationSpec PerturbationSpec::on_nodes(std::vector<int> ids) {
  PerturbationSpec p;
  p.kind = Kind::Nodes;
  p.node_ids = std::move(ids);
  return p;
}

std::vector<int> PerturbationSpec::resolve(const DomainMesh& mesh) const {
  switch (kind) {
    case Kind::None:
      return {};
    case Kind::Point:
      return {mesh.nearest_boundary_node(point)};
    case Kind::Segment:
      return mesh.boundary_nodes_on_segment(seg_a, seg_b, 1e-9 * mesh.domain.diameter());
    case Kind::Nodes: {
      for (int i : node_ids)
        if (i < 0 || i >= mesh.node_count() || !mesh.is_boundary[i])
          throw ConfigError("perturbation node set must consist of boundary nodes");
      auto ids = node_ids;
      std::sort(ids.begin(), ids.end());
      return ids;
    }
  }
  return {};
}

AmbientBox build_ambient_box(const DomainMesh& domain_mesh, const std::vector<int>& E,
                             double side, double cell) {
  if (E.empty()) throw ConfigError("ambient box needs a nonempty node set");
  Vec2 lo = domain_mesh.nodes.row(E[0]), hi = lo;
  Vec2 centroid = Vec2::Zero();
  for (int i : E) {
    const Vec2 x = domain_mesh.nodes.row(i);
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
    centroid += x;
  }
  centroid /= static_cast<double>(E.size());
  const double diam_e = (hi - lo).norm();
  const double diam_omega = domain_mesh.domain.diameter();
  if (cell <= 0.0) cell = domain_mesh.h / std::sqrt(2.0);
  if (side <= 0.0) side = std::max(4.0 * diam_e + 4.0, 2.2 * diam_omega);

  // Snap the corner to the cell lattice so domain nodes on that lattice
  // coincide with box nodes, and keep an even cell count.
  int n = static_cast<int>(std::ceil(side / cell));
  if (n % 2 == 1) ++n;
  side = n * cell;
  Vec2 corner = centroid - 0.5 * Vec2(side, side);
  corner.x() = std::round(corner.x() / cell) * cell;
  corner.y() = std::round(corner.y() / cell) * cell;

  AmbientBox box;
  box.mesh = build_square_mesh(corner, side, n);
  box.set_ids.reserve(E.size());
  for (int i : E) {
    const int id = box.mesh.nearest_node(domain_mesh.nodes.row(i));
    if ((Vec2(box.mesh.nodes.row(id)) - Vec2(domain_mesh.nodes.row(i))).norm() > 0.51 * cell)
      throw Error("ambient box resolution too coarse for the perturbation set");
    box.set_ids.push_back(id);
  }
  std::sort(box.set_ids.begin(), box.set_ids.end());
  box.set_ids.erase(std::unique(box.set_ids.begin(), box.set_ids.end()), box.set_ids.end());
  return box;
}

namespace {

double far_max_abs(const DomainMesh& mesh, const Vec& values,
                   const std::vector<Vec2>& e_coords, double excl) {
  double m = 0.0;
  bool any = false;
  for (int i = 0; i < mesh.node_count(); ++i) {
    double d = std::numeric_limits<double>::max();
    for (const Vec2& e : e_coords) d = std::min(d, (Vec2(mesh.nodes.row(i)) - e).norm());
    if (d >= excl) {
      m = std::max(m, std::abs(values[i]));
      any = true;
    }
  }
  if (!any) return values.cwiseAbs().maxCoeff();
  return m;
}

// Restriction of a box-mesh field to the domain nodes (exact where the
// lattices coincide, P1 interpolation otherwise). Clamped at 0 from below
// to keep psi nonnegative after interpolation.
Vec restrict_to_domain(const DomainMesh& box, const Vec& field, const DomainMesh& mesh) {
  Vec out(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i)
    out[i] = std::max(0.0, interpolate(box, field, mesh.nodes.row(i)));
  return out;
}

struct SandwichSide {
  std::vector<Vec> u;  // obstacle solutions per level
  Vec h;               // unperturbed energy solution
};

SandwichSide solve_side(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& f_boundary,
                        const std::vector<Vec>& psi_domain, int depth, double tol) {
  SandwichSide side;
  side.h = solve_dirichlet(mesh, spec, f_boundary, tol).solution;
  side.u.reserve(depth);
  for (int j = 1; j <= depth; ++j) {
    const Vec fj = side.h + psi_domain[static_cast<size_t>(j)];
    const auto ob = ObstacleSpec::with_obstacle(mesh, fj, fj);
    side.u.push_back(solve_obstacle(mesh, spec, ob, tol).solution);
  }
  return side;
}

}  // namespace

PerronSandwichReport perron_sandwich(const DomainMesh& mesh, const OperatorSpec& spec,
                                     const Vec& f_boundary, const PerturbationSpec& pert,
                                     const PerronOptions& options) {
  const int depth = options.depth;
  if (depth < 1) throw ConfigError("sandwich depth must be >= 1");
  double f_inf = 0.0;
  for (int i : mesh.boundary_nodes) f_inf = std::max(f_inf, std::abs(f_boundary[i]));
  const double tol = options.tol > 0.0 ? options.tol : 1e-8 * (1.0 + f_inf);
  const double excl = options.exclusion_radius > 0.0 ? options.exclusion_radius
                                                     : 0.25 * mesh.domain.diameter();

  const std::vector<int> E = pert.resolve(mesh);
  std::vector<Vec2> e_coords;
  for (int i : E) e_coords.emplace_back(mesh.nodes.row(i));

  // psi_j restricted to the domain mesh, j = 0..depth (zero when E empty).
  std::vector<Vec> psi_domain(static_cast<size_t>(depth) + 1, Vec::Zero(mesh.node_count()));
  std::vector<double> psi_norms(static_cast<size_t>(depth) + 1, 0.0);
  double capacity_of_e = 0.0;
  if (!E.empty()) {
    auto box = build_ambient_box(mesh, E, options.box_side, options.box_h);
    const PsiSequence seq =
        build_psi_sequence(box.mesh, spec, box.set_ids, depth, options.psi);
    for (int j = 0; j <= depth; ++j) {
      psi_domain[static_cast<size_t>(j)] = restrict_to_domain(box.mesh, seq.psi_at(j), mesh);
      psi_norms[static_cast<size_t>(j)] = seq.psi_norms[static_cast<size_t>(j)];
    }
    capacity_of_e = seq.neighborhood_values.back();
  }

  const SandwichSide up = solve_side(mesh, spec, f_boundary, psi_domain, depth, tol);
  const SandwichSide dn = solve_side(mesh, spec, -f_boundary, psi_domain, depth, tol);

  PerronSandwichReport rep;
  rep.hf = up.h;
  rep.caps = pert.caps;
  rep.capacity_of_e = capacity_of_e;
  rep.exclusion_radius = excl;
  const double slack = 20.0 * tol;

  for (int j = 1; j <= depth; ++j) {
    const Vec& uj = up.u[static_cast<size_t>(j - 1)];
    const Vec lj = -dn.u[static_cast<size_t>(j - 1)];
    rep.upper.push_back(uj);
    rep.lower.push_back(lj);

    PerronLevelRow row;
    row.j = j;
    row.gap = (uj - lj).maxCoeff();
    if (E.empty()) {
      row.gap_far = row.gap;
      row.dist = (uj - rep.hf).cwiseAbs().maxCoeff();
    } else {
      row.gap_far = far_max_abs(mesh, uj - lj, e_coords, excl);
      row.dist = far_max_abs(mesh, uj - rep.hf, e_coords, excl);
    }
    row.psi_norm = psi_norms[static_cast<size_t>(j)];
    rep.levels.push_back(row);

    if (((lj - rep.hf).maxCoeff() > slack) || ((rep.hf - uj).maxCoeff() > slack))
      rep.sandwich_ok = false;
    if (j >= 2 && (uj - up.u[static_cast<size_t>(j - 2)]).maxCoeff() > slack)
      rep.monotone_ok = false;

    // Nodal rendering of the boundary domination: at E the obstacle value
    // already exceeds min(f + cap, f + (K-j)) for every cap in the sweep.
    for (int e : E)
      for (double cap : pert.caps) {
        const double target =
            f_boundary[e] + std::min(cap, static_cast<double>(depth - j));
        if (uj[e] < target - slack) rep.domination_ok = false;
      }
  }

  for (double cap : pert.caps) {
    if (E.empty()) {
      rep.direct_dist.push_back(0.0);
      continue;
    }
    Vec fp = f_boundary;
    for (int e : E) fp[e] += cap;
    const Vec hp = solve_dirichlet(mesh, spec, fp, tol).solution;
    rep.direct_dist.push_back(far_max_abs(mesh, hp - rep.hf, e_coords, excl));
  }
  return rep;
}

Vec upper_envelope_approx(const DomainMesh& mesh, const OperatorSpec& spec,
                          const Vec& f_boundary, const PerturbationSpec& pert, int j,
                          const PerronOptions& options) {
  if (j < 1 || j > options.depth)
    throw ConfigError("envelope level j must lie in 1..depth");
  const std::vector<int> E = pert.resolve(mesh);
  const Vec hf = solve_dirichlet(mesh, spec, f_boundary, options.tol).solution;
  Vec psi_j = Vec::Zero(mesh.node_count());
  if (!E.empty()) {
    auto box = build_ambient_box(mesh, E, options.box_side, options.box_h);
    const PsiSequence seq =
        build_psi_sequence(box.mesh, spec, box.set_ids, options.depth, options.psi);
    psi_j = restrict_to_domain(box.mesh, seq.psi_at(j), mesh);
  }
  const Vec fj = hf + psi_j;
  const auto ob = ObstacleSpec::with_obstacle(mesh, fj, fj);
  return solve_obstacle(mesh, spec, ob, options.tol).solution;
}

double direct_perturbation_distance(const DomainMesh& mesh, const OperatorSpec& spec,
                                    const Vec& f_boundary, const PerturbationSpec& pert,
                                    double cap, double exclusion_radius, double tol) {
  const std::vector<int> E = pert.resolve(mesh);
  if (E.empty()) return 0.0;
  const double excl = exclusion_radius > 0.0 ? exclusion_radius
                                             : 0.25 * mesh.domain.diameter();
  std::vector<Vec2> e_coords;
  for (int i : E) e_coords.emplace_back(mesh.nodes.row(i));
  const Vec hf = solve_dirichlet(mesh, spec, f_boundary, tol).solution;
  Vec fp = f_boundary;
  for (int e : E) fp[e] += cap;
  const Vec hp = solve_dirichlet(mesh, spec, fp, tol).solution;
  return far_max_abs(mesh, hp - hf, e_coords, excl);
}

UniquenessVerdict uniqueness_check(const DomainMesh& mesh, const OperatorSpec& spec,
                                   const Vec& f_boundary, const Vec& candidate,
                                   const std::vector<int>& E,
                                   const UniquenessOptions& options) {
  double f_inf = 0.0;
  for (int i : mesh.boundary_nodes) f_inf = std::max(f_inf, std::abs(f_boundary[i]));
  const double bound = options.bound > 0.0 ? options.bound : 8.0 * (1.0 + f_inf);
  const double res_tol =
      options.residual_tol > 0.0 ? options.residual_tol : 1e-6 * (1.0 + f_inf);
  const double trace_tol =
      options.trace_tol > 0.0 ? options.trace_tol : 1e-9 * (1.0 + f_inf);
  const double pass_tol = options.pass_tol > 0.0 ? options.pass_tol : 1e-6 * (1.0 + f_inf);

  UniquenessVerdict verdict;

  std::set<int> e_set(E.begin(), E.end());
  if (candidate.cwiseAbs().maxCoeff() > bound) {
    verdict.rejected = true;
    verdict.rejection = "boundedness: max|candidate| exceeds the bound " + std::to_string(bound);
    return verdict;
  }
  const Vec r = residual(mesh, spec, candidate);
  double rmax = 0.0;
  for (int i : mesh.interior_nodes) rmax = std::max(rmax, std::abs(r[i]));
  if (rmax > res_tol) {
    verdict.rejected = true;
    verdict.rejection = "candidate is not discretely A-harmonic (interior residual " +
                        std::to_string(rmax) + ")";
    return verdict;
  }
  for (int i : mesh.boundary_nodes) {
    if (e_set.count(i)) continue;
    if (std::abs(candidate[i] - f_boundary[i]) > trace_tol) {
      verdict.rejected = true;
      verdict.rejection = "candidate does not take the boundary data outside E";
      return verdict;
    }
  }

  const Vec hf = solve_dirichlet(mesh, spec, f_boundary).solution;
  verdict.distance = (candidate - hf).cwiseAbs().maxCoeff();
  verdict.pass = verdict.distance <= pass_tol;
  if (!E.empty()) {
    auto box = build_ambient_box(mesh, E, options.box_side);
    verdict.capacity_of_e = estimate_capacity(box.mesh, spec, box.set_ids).value;
  }
  return verdict;
}

nlohmann::json to_json(const PerturbationSpec& p) {
  nlohmann::json j;
  switch (p.kind) {
    case PerturbationSpec::Kind::None:
      j["kind"] = "none";
      break;
    case PerturbationSpec::Kind::Point:
      j["kind"] = "point";
      j["point"] = {p.point.x(), p.point.y()};
      break;
    case PerturbationSpec::Kind::Segment:
      j["kind"] = "segment";
      j["from"] = {p.seg_a.x(), p.seg_a.y()};
      j["to"] = {p.seg_b.x(), p.seg_b.y()};
      break;
    case PerturbationSpec::Kind::Nodes:
      j["kind"] = "nodes";
      j["ids"] = p.node_ids;
      break;
  }
  j["caps"] = p.caps;
  return j;
}

PerturbationSpec perturbation_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  PerturbationSpec p;
  if (kind == "none") {
    p = PerturbationSpec::none();
  } else if (kind == "point") {
    p = PerturbationSpec::at_point(Vec2(j.at("point")[0].get<double>(),
                                        j.at("point")[1].get<double>()));
  } else if (kind == "segment") {
    p = PerturbationSpec::on_segment(
        Vec2(j.at("from")[0].get<double>(), j.at("from")[1].get<double>()),
        Vec2(j.at("to")[0].get<double>(), j.at("to")[1].get<double>()));
  } else if (kind == "nodes") {
    p = PerturbationSpec::on_nodes(j.at("ids").get<std::vector<int>>());
  } else {
    throw ConfigError("unknown perturbation kind: " + kind);
  }
  if (j.contains("caps")) p.caps = j["caps"].get<std::vector<double>>();
  return p;
}

}  // namespace perronlab
