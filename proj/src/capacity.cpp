#include "perronlab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "energy_min.hpp"

namespace perronlab {

namespace {

double set_diameter(const DomainMesh& mesh, const std::vector<int>& E) {
  double d = 0.0;
  for (size_t i = 0; i < E.size(); ++i)
    for (size_t j = i + 1; j < E.size(); ++j)
      d = std::max(d, (Vec2(mesh.nodes.row(E[i])) - Vec2(mesh.nodes.row(E[j]))).norm());
  return d;
}

double box_side_of(const DomainMesh& mesh) {
  const double w = mesh.nodes.col(0).maxCoeff() - mesh.nodes.col(0).minCoeff();
  const double h = mesh.nodes.col(1).maxCoeff() - mesh.nodes.col(1).minCoeff();
  return std::max(w, h);
}

}  // namespace

CapacityEstimate estimate_capacity(const DomainMesh& box_mesh, const OperatorSpec& spec,
                                   const std::vector<int>& E, double tol) {
  spec.validate();
  CapacityEstimate est;
  est.box_side = box_side_of(box_mesh);
  est.h = box_mesh.h;
  if (E.empty()) {
    est.minimizer = Vec::Zero(box_mesh.node_count());
    return est;
  }
  for (int i : E) {
    if (i < 0 || i >= box_mesh.node_count()) throw ConfigError("capacity set node out of range");
    if (box_mesh.is_boundary[i])
      throw ConfigError("capacity set touches the box boundary; enlarge the box");
  }
  const double diam_e = set_diameter(box_mesh, E);
  if (est.box_side < 4.0 * diam_e + 4.0 - 1e-9)
    throw ConfigError("capacity box too small: need side >= 4*diam(E) + 4");
  if (tol <= 0.0) tol = 1e-10;

  detail::EnergyModel em(box_mesh, spec, 1.0);
  std::vector<char> pinned(box_mesh.node_count(), 0);
  Vec u = Vec::Zero(box_mesh.node_count());
  for (int i : box_mesh.boundary_nodes) pinned[i] = 1;
  for (int i : box_mesh.one_ring(E)) {
    pinned[i] = 1;
    u[i] = 1.0;
  }

  detail::PinnedSolveOptions opts;
  opts.tol = tol;
  auto res = detail::minimize_pinned(em, pinned, u, opts);
  if (!res.converged)
    throw SolverError("capacity minimization did not converge", res.u, res.history);

  // The minimizer lies in [0,1] up to solver precision (truncation is
  // admissible and does not increase the energy).
  est.minimizer = res.u.cwiseMax(0.0).cwiseMin(1.0);
  est.value = detail::model_energy(em, est.minimizer);
  est.norm_p = std::pow(est.value, 1.0 / spec.p);
  return est;
}

PsiSequence build_psi_sequence(const DomainMesh& box_mesh, const OperatorSpec& spec,
                               const std::vector<int>& E, int depth,
                               const PsiOptions& options) {
  if (depth < 1) throw ConfigError("psi sequence depth must be >= 1");
  const int nn = box_mesh.node_count();

  PsiSequence seq;
  seq.depth = depth;
  if (E.empty()) {
    seq.neighborhoods.assign(depth, {});
    seq.phi.assign(depth, Vec::Zero(nn));
    seq.phi_norms.assign(depth, 0.0);
    seq.neighborhood_values.assign(depth, 0.0);
    seq.psi.assign(depth + 1, Vec::Zero(nn));
    seq.psi_norms.assign(depth + 1, 0.0);
    return seq;
  }

  const CapacityEstimate base = estimate_capacity(box_mesh, spec, E);
  auto budget = [&](int k) { return std::pow(2.0, -static_cast<double>(k) * spec.p); };

  if (options.strict_budgets) {
    if (!(base.value < budget(depth))) {
      int achievable = 0;
      while (achievable + 1 <= depth && base.value < budget(achievable + 1)) ++achievable;
      throw PsiConstructionError(
          "capacity of E too large for the requested depth at this resolution "
          "(positive-capacity signature)",
          {base.value}, achievable);
    }
  } else if (!(base.value < options.capacity_gate)) {
    throw PsiConstructionError(
        "capacity of E exceeds the construction gate (positive-capacity signature)",
        {base.value}, 0);
  }

  // Choose graph-ball radii r_1 >= ... >= r_depth = 0 so each neighborhood
  // keeps within its budget; neighborhoods grow from the tight end.
  std::vector<int> radii(depth + 1, 0);
  std::vector<CapacityEstimate> ests(depth + 1);
  ests[depth] = base;
  for (int k = depth - 1; k >= 1; --k) {
    radii[k] = radii[k + 1];
    ests[k] = ests[k + 1];
    for (int grow = options.max_growth_per_level; grow >= 1; --grow) {
      const int r = radii[k + 1] + grow;
      const auto ball = box_mesh.graph_ball(E, r);
      bool touches = false;
      for (int i : ball)
        if (box_mesh.is_boundary[i]) touches = true;
      if (touches) continue;
      const auto est = estimate_capacity(box_mesh, spec, ball);
      if (!options.strict_budgets || est.value < budget(k)) {
        radii[k] = r;
        ests[k] = est;
        break;
      }
    }
  }

  seq.neighborhoods.resize(depth);
  seq.phi.resize(depth);
  seq.phi_norms.resize(depth);
  seq.neighborhood_values.resize(depth);
  for (int k = 1; k <= depth; ++k) {
    seq.neighborhoods[k - 1] = box_mesh.graph_ball(E, radii[k]);
    seq.phi[k - 1] = ests[k].minimizer;  // already clamped to [0,1]
    seq.phi_norms[k - 1] = ests[k].norm_p;
    seq.neighborhood_values[k - 1] = ests[k].value;
  }

  detail::EnergyModel em(box_mesh, spec, 1.0);
  seq.psi.assign(depth + 1, Vec::Zero(nn));
  seq.psi_norms.assign(depth + 1, 0.0);
  for (int j = depth - 1; j >= 0; --j) {
    seq.psi[j] = seq.psi[j + 1] + seq.phi[j];
    seq.psi_norms[j] =
        std::pow(detail::model_energy(em, seq.psi[j]), 1.0 / spec.p);
  }

  // Internal consistency: psi_j >= m on U_{j+m} and, in strict mode, the
  // norm budgets. These hold by construction; a violation is a bug.
  for (int j = 0; j <= depth; ++j) {
    for (int m = 1; j + m <= depth; ++m)
      for (int i : seq.neighborhoods[j + m - 1])
        if (seq.psi[j][i] < static_cast<double>(m) - 1e-9)
          throw Error("psi sequence domination invariant violated");
    if (options.strict_budgets && j >= 1 && !(seq.psi_norms[j] < std::pow(2.0, -j)))
      throw Error("psi sequence norm budget violated");
  }
  return seq;
}

}  // namespace perronlab
