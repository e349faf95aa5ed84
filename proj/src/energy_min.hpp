#ifndef PERRONLAB_ENERGY_MIN_HPP
#define PERRONLAB_ENERGY_MIN_HPP

#include <vector>

#include "perronlab/common.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/operator.hpp"

namespace perronlab::detail {

// Discrete functional
//   E(u) = sum_t w_t area_t [ (grad u . M grad u)^{p/2} + mass_coeff |ubar_t|^p ]
// with ubar the vertex average. mass_coeff = 0 gives the p-Dirichlet
// energy, mass_coeff = 1 the full Sobolev-norm integrand used for
// capacities.
struct EnergyModel {
  const DomainMesh* mesh = nullptr;
  OperatorSpec spec;
  double mass_coeff = 0.0;
  std::vector<double> w;  // weight at barycenters

  EnergyModel(const DomainMesh& m, const OperatorSpec& s, double mass);
};

double model_energy(const EnergyModel& em, const Vec& u);
// True gradient dE/du_i at every node.
Vec model_gradient(const EnergyModel& em, const Vec& u);
// gradient / p; coincides with the weak-form residual when mass_coeff = 0.
Vec model_residual(const EnergyModel& em, const Vec& u);
// Regularized Hessian ((|grad u|^2 -> |grad u|^2 + eps^2) inside second
// derivatives only); positive definite for every p in (1, inf).
SpMat model_hessian(const EnergyModel& em, const Vec& u, double eps);

struct PinnedSolveOptions {
  double tol = 1e-8;
  int max_iter = 500;
};

struct PinnedSolveResult {
  Vec u;
  int iterations = 0;
  double residual_norm = 0.0;  // max |model_residual| over free nodes
  std::vector<double> history;
  bool converged = false;
};

// Minimizes E over the nodes not flagged in pinned_mask; pinned entries of
// u0 are held fixed. Damped Newton with Armijo backtracking; falls back to
// a Jacobi-preconditioned descent step when the Newton direction fails.
// For p far from 2 the iteration is warm-started from the p=2 minimizer.
PinnedSolveResult minimize_pinned(const EnergyModel& em, const std::vector<char>& pinned_mask,
                                  const Vec& u0, const PinnedSolveOptions& opts,
                                  bool p2_warm_start = true);

// One projected Gauss-Seidel sweep for the obstacle problem: nodewise
// scalar minimization followed by clamping to the obstacle. Nodes with
// pinned_mask set are skipped; entries of lower set to -inf are
// unconstrained. Sweeps ascend in node index.
void projected_gauss_seidel_sweep(const EnergyModel& em, const std::vector<char>& pinned_mask,
                                  const Vec& lower, Vec& u);

}  // namespace perronlab::detail

#endif
