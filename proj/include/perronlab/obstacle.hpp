#ifndef PERRONLAB_OBSTACLE_HPP
#define PERRONLAB_OBSTACLE_HPP

#include <vector>

#include "perronlab/common.hpp"
#include "perronlab/dirichlet.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/operator.hpp"

namespace perronlab {

// Obstacle psi plus boundary data f. Unconstrained nodes (obstacle "-inf")
// are encoded with an explicit mask, not a floating sentinel. The nodal
// fields here are their own lsc regularizations, so no separate
// regularization step exists.
struct ObstacleSpec {
  Vec psi;                            // obstacle values (ignored where unconstrained)
  std::vector<char> unconstrained;    // 1 => no constraint at that node
  Vec boundary_values;                // trace; boundary entries used

  static ObstacleSpec unconstrained_problem(const DomainMesh& mesh, const Vec& boundary_values);
  static ObstacleSpec with_obstacle(const DomainMesh& mesh, const Vec& psi,
                                    const Vec& boundary_values);
};

// Variational-inequality solve over K_{psi,f}: projected nonlinear
// Gauss-Seidel sweeps settle the active set, then pinned Newton solves on
// the inactive set finish to tolerance. Verifies the discrete
// complementarity system before returning:
//   u >= psi - tol,  r_i >= -tol,  |r_i| <= tol wherever u_i > psi_i + tol.
SolveReport solve_obstacle(const DomainMesh& mesh, const OperatorSpec& spec,
                           const ObstacleSpec& ob, double tol = 0.0);

}  // namespace perronlab

#endif
