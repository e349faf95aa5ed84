#ifndef PERRONLAB_CAPACITY_HPP
#define PERRONLAB_CAPACITY_HPP

#include <vector>

#include "perronlab/common.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/operator.hpp"

namespace perronlab {

// Result of one capacity minimization on the ambient box mesh. The box
// boundary carries a zero condition standing in for decay at infinity, so
// the value approximates the capacity from one side and converges under
// box growth and mesh refinement.
struct CapacityEstimate {
  double value = 0.0;   // min of sum w*(|phi|^p + |grad phi|_M^p)
  Vec minimizer;        // phi on the box mesh: 1 on E and its one-ring, in [0,1]
  double norm_p = 0.0;  // value^{1/p}
  double box_side = 0.0;
  double h = 0.0;
};

// Minimizes the full Sobolev-norm integrand over fields equal to 1 on the
// nodes of E and their one-ring (the discrete "open set containing E") and
// 0 on the box boundary. E = empty gives value 0.
CapacityEstimate estimate_capacity(const DomainMesh& box_mesh, const OperatorSpec& spec,
                                   const std::vector<int>& E, double tol = 0.0);

// Test-function sequence for a small set E: shrinking node neighborhoods
// U_K subset ... subset U_1 (graph-distance balls around E), capacity
// minimizers phi_k = 1 on U_k, and tail sums psi_j = sum_{k>j} phi_k.
struct PsiSequence {
  int depth = 0;                      // K
  std::vector<std::vector<int>> neighborhoods;  // U_1 .. U_K (node sets)
  std::vector<Vec> phi;               // phi_1 .. phi_K, clamped to [0,1]
  std::vector<double> phi_norms;      // full Sobolev norms
  std::vector<Vec> psi;               // psi_0 .. psi_K (psi_K = 0, empty tail)
  std::vector<double> psi_norms;
  std::vector<double> neighborhood_values;  // capacity values of the U_k

  const Vec& psi_at(int j) const { return psi.at(static_cast<size_t>(j)); }
};

struct PsiOptions {
  // Strict mode enforces the norm budgets ||phi_k|| < 2^{-k}; when a budget
  // is unreachable at this resolution the construction throws
  // PsiConstructionError carrying the largest achievable depth. Relaxed
  // mode only gates on the absolute capacity of E (capacity_gate) and
  // records the norms it got.
  bool strict_budgets = true;
  double capacity_gate = 0.1;
  int max_growth_per_level = 2;  // graph-distance growth allowance per level
};

PsiSequence build_psi_sequence(const DomainMesh& box_mesh, const OperatorSpec& spec,
                               const std::vector<int>& E, int depth,
                               const PsiOptions& options = {});

}  // namespace perronlab

#endif
