#include "perronlab/obstacle.hpp"

#include <cmath>
#include <limits>

#include "energy_min.hpp"

namespace perronlab {

ObstacleSpec ObstacleSpec::unconstrained_problem(const DomainMesh& mesh,
                                                 const Vec& boundary_values) {
  ObstacleSpec ob;
  ob.psi = Vec::Zero(mesh.node_count());
  ob.unconstrained.assign(mesh.node_count(), 1);
  ob.boundary_values = boundary_values;
  return ob;
}

ObstacleSpec ObstacleSpec::with_obstacle(const DomainMesh& mesh, const Vec& psi,
                                         const Vec& boundary_values) {
  ObstacleSpec ob;
  ob.psi = psi;
  ob.unconstrained.assign(mesh.node_count(), 0);
  ob.boundary_values = boundary_values;
  return ob;
}

SolveReport solve_obstacle(const DomainMesh& mesh, const OperatorSpec& spec,
                           const ObstacleSpec& ob, double tol) {
  spec.validate();
  const int nn = mesh.node_count();
  if (ob.psi.size() != nn || ob.boundary_values.size() != nn ||
      static_cast<int>(ob.unconstrained.size()) != nn)
    throw ConfigError("obstacle spec fields have wrong length");

  const double inf = std::numeric_limits<double>::infinity();
  Vec lower = Vec::Constant(nn, -inf);
  for (int i = 0; i < nn; ++i) {
    if (ob.unconstrained[i]) continue;
    if (!std::isfinite(ob.psi[i]) && ob.psi[i] > 0.0)
      throw ConfigError("+inf obstacle entries are forbidden");
    if (std::isfinite(ob.psi[i])) lower[i] = ob.psi[i];
  }
  for (int i : mesh.boundary_nodes)
    if (lower[i] > ob.boundary_values[i] + 1e-14 * (1.0 + std::abs(ob.boundary_values[i])))
      throw InfeasibleError("obstacle exceeds boundary data at a boundary node");

  double scale = 0.0;
  for (int i : mesh.boundary_nodes) scale = std::max(scale, std::abs(ob.boundary_values[i]));
  for (int i = 0; i < nn; ++i)
    if (lower[i] > -inf) scale = std::max(scale, std::abs(lower[i]));
  if (tol <= 0.0) tol = 1e-8 * (1.0 + scale);
  const double act_tol = 1e-9 * (1.0 + scale);

  detail::EnergyModel em(mesh, spec, 0.0);

  // Start from the unconstrained solution clamped to the obstacle.
  Vec u = solve_dirichlet(mesh, spec, ob.boundary_values, tol).solution;
  bool clamped = false;
  for (int i = 0; i < nn; ++i)
    if (u[i] < lower[i]) {
      u[i] = lower[i];
      clamped = true;
    }

  std::vector<char> base_pinned(nn, 0);
  for (int i : mesh.boundary_nodes) {
    base_pinned[i] = 1;
    u[i] = ob.boundary_values[i];
  }

  auto kkt_ok = [&](const Vec& v, double* worst) {
    const Vec r = residual(mesh, spec, v);
    double bad = 0.0;
    for (int i : mesh.interior_nodes) {
      bad = std::max(bad, -r[i]);  // supersolution side
      if (v[i] > lower[i] + act_tol) bad = std::max(bad, std::abs(r[i]));
      bad = std::max(bad, lower[i] - v[i]);
    }
    *worst = bad;
    return bad <= tol;
  };

  double worst = 0.0;
  int total_newton = 0;
  if (!clamped && kkt_ok(u, &worst)) {
    SolveReport rep;
    rep.solution = u;
    rep.iterations = 0;
    rep.final_residual_norm = worst;
    rep.energy_value = energy(mesh, spec, u);
    return rep;
  }

  std::vector<double> history;
  std::vector<char> active_prev(nn, 0);
  for (int outer = 0; outer < 80; ++outer) {
    const int sweeps = outer == 0 ? 3 : 1;
    for (int s = 0; s < sweeps; ++s)
      detail::projected_gauss_seidel_sweep(em, base_pinned, lower, u);

    // Pin the active nodes to the obstacle, solve on the rest.
    std::vector<char> pinned = base_pinned;
    for (int i : mesh.interior_nodes)
      if (lower[i] > -inf && u[i] <= lower[i] + act_tol) {
        pinned[i] = 1;
        u[i] = lower[i];
      }

    detail::PinnedSolveOptions opts;
    opts.tol = 0.5 * tol;
    opts.max_iter = 200;
    auto res = detail::minimize_pinned(em, pinned, u, opts, outer == 0);
    u = res.u;
    total_newton += res.iterations;

    // Clamp any new violations; they join the active set next round.
    for (int i = 0; i < nn; ++i)
      if (u[i] < lower[i]) u[i] = lower[i];

    if (kkt_ok(u, &worst)) {
      SolveReport rep;
      rep.solution = u;
      rep.iterations = total_newton;
      rep.final_residual_norm = worst;
      rep.energy_value = energy(mesh, spec, u);
      return rep;
    }
    history.push_back(worst);
  }

  throw SolverError("obstacle solve: active set did not settle within 80 rounds", u, history);
}

}  // namespace perronlab
