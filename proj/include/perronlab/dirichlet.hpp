#ifndef PERRONLAB_DIRICHLET_HPP
#define PERRONLAB_DIRICHLET_HPP

#include <functional>
#include <vector>

#include "perronlab/common.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/operator.hpp"

namespace perronlab {

struct SolveReport {
  Vec solution;
  int iterations = 0;
  double final_residual_norm = 0.0;
  double energy_value = 0.0;
};

// Default stopping tolerance for boundary data f.
inline double default_tol(const Vec& boundary_values) {
  return 1e-8 * (1.0 + boundary_values.cwiseAbs().maxCoeff());
}

// Energy minimization with the given trace: boundary entries of
// boundary_values are imposed, interior entries are ignored. Stops when the
// max-norm of the exact interior residual drops below tol (pass tol <= 0
// for the default 1e-8*(1+|f|_inf)). Throws SolverError with the best
// iterate and residual history if the iteration cap is hit.
SolveReport solve_dirichlet(const DomainMesh& mesh, const OperatorSpec& spec,
                            const Vec& boundary_values, double tol = 0.0);

// Convenience overload sampling a function at the boundary nodes.
SolveReport solve_dirichlet(const DomainMesh& mesh, const OperatorSpec& spec,
                            const std::function<double(const Vec2&)>& f, double tol = 0.0);

struct MonotoneDataRow {
  int level = 0;          // j
  double delta = 0.0;     // 2^{-j}
  double max_gap = 0.0;   // max |H(f + 2^{-j} psi) - Hf|
  double monotone_violation = 0.0;  // max increase vs previous level
};

struct MonotoneDataTable {
  std::vector<MonotoneDataRow> rows;
  Vec hf;
  bool monotone = true;
};

// Solves H(f + 2^{-j} psi) for j = 1..levels and records the decrease
// towards Hf. psi must be nonnegative on the boundary.
MonotoneDataTable monotone_data_study(const DomainMesh& mesh, const OperatorSpec& spec,
                                      const Vec& f_boundary, const Vec& psi_boundary,
                                      int levels, double tol = 0.0);

}  // namespace perronlab

#endif
