#include "perronlab/dirichlet.hpp"

#include <cmath>

#include "energy_min.hpp"

namespace perronlab {

SolveReport solve_dirichlet(const DomainMesh& mesh, const OperatorSpec& spec,
                            const Vec& boundary_values, double tol) {
  spec.validate();
  if (boundary_values.size() != mesh.node_count())
    throw ConfigError("boundary data vector has wrong length");
  double f_max = 0.0, f_min = 0.0;
  bool first = true;
  for (int i : mesh.boundary_nodes) {
    if (!std::isfinite(boundary_values[i]))
      throw ConfigError("boundary data must be finite at every boundary node");
    f_max = first ? boundary_values[i] : std::max(f_max, boundary_values[i]);
    f_min = first ? boundary_values[i] : std::min(f_min, boundary_values[i]);
    first = false;
  }
  if (tol <= 0.0) tol = 1e-8 * (1.0 + std::max(std::abs(f_max), std::abs(f_min)));

  detail::EnergyModel em(mesh, spec, 0.0);
  std::vector<char> pinned(mesh.node_count(), 0);
  Vec u = Vec::Constant(mesh.node_count(), 0.5 * (f_min + f_max));
  for (int i : mesh.boundary_nodes) {
    pinned[i] = 1;
    u[i] = boundary_values[i];
  }

  detail::PinnedSolveOptions opts;
  opts.tol = tol;
  opts.max_iter = 500;
  auto res = detail::minimize_pinned(em, pinned, u, opts);
  if (!res.converged)
    throw SolverError("dirichlet solve did not reach tolerance within 500 Newton steps",
                      res.u, res.history);

  SolveReport report;
  report.solution = res.u;
  report.iterations = res.iterations;
  report.final_residual_norm = res.residual_norm;
  report.energy_value = energy(mesh, spec, res.u);
  return report;
}

SolveReport solve_dirichlet(const DomainMesh& mesh, const OperatorSpec& spec,
                            const std::function<double(const Vec2&)>& f, double tol) {
  Vec bv = Vec::Zero(mesh.node_count());
  for (int i : mesh.boundary_nodes) bv[i] = f(mesh.nodes.row(i));
  return solve_dirichlet(mesh, spec, bv, tol);
}

MonotoneDataTable monotone_data_study(const DomainMesh& mesh, const OperatorSpec& spec,
                                      const Vec& f_boundary, const Vec& psi_boundary,
                                      int levels, double tol) {
  for (int i : mesh.boundary_nodes)
    if (psi_boundary[i] < 0.0)
      throw ConfigError("monotone data study needs psi >= 0 on the boundary");

  MonotoneDataTable table;
  table.hf = solve_dirichlet(mesh, spec, f_boundary, tol).solution;

  Vec prev;
  for (int j = 1; j <= levels; ++j) {
    const double delta = std::ldexp(1.0, -j);
    Vec fj = f_boundary + delta * psi_boundary;
    const Vec uj = solve_dirichlet(mesh, spec, fj, tol).solution;

    MonotoneDataRow row;
    row.level = j;
    row.delta = delta;
    row.max_gap = (uj - table.hf).cwiseAbs().maxCoeff();
    if (prev.size() > 0) row.monotone_violation = (uj - prev).maxCoeff();
    table.rows.push_back(row);
    if (row.monotone_violation > 1e-7) table.monotone = false;
    prev = uj;
  }
  return table;
}

}  // namespace perronlab
