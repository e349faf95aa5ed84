#ifndef PERRONLAB_PERRON_HPP
#define PERRONLAB_PERRON_HPP

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "perronlab/capacity.hpp"
#include "perronlab/common.hpp"
#include "perronlab/dirichlet.hpp"
#include "perronlab/mesh.hpp"
#include "perronlab/obstacle.hpp"
#include "perronlab/operator.hpp"

namespace perronlab {

// Boundary perturbation support E plus the height sweep standing in for
// the +-infinity case (the invariance conclusion must hold at every cap).
struct PerturbationSpec {
  enum class Kind { None, Point, Segment, Nodes };
  Kind kind = Kind::None;
  Vec2 point = Vec2::Zero();
  Vec2 seg_a = Vec2::Zero(), seg_b = Vec2::Zero();
  std::vector<int> node_ids;
  std::vector<double> caps = {1.0, 10.0, 100.0};

  static PerturbationSpec none();
  static PerturbationSpec at_point(const Vec2& x);
  static PerturbationSpec on_segment(const Vec2& a, const Vec2& b);
  static PerturbationSpec on_nodes(std::vector<int> ids);

  // Boundary node ids supporting the perturbation on this mesh.
  std::vector<int> resolve(const DomainMesh& mesh) const;
};

struct PerronOptions {
  int depth = 4;                  // K
  double box_side = 0.0;          // ambient box for the psi capacities; 0 = auto
  double box_h = 0.0;             // box resolution; 0 = match the domain mesh
  double exclusion_radius = 0.0;  // distances measured this far from E; 0 = 0.25*diam
  double tol = 0.0;               // solver tolerance; 0 = default
  PsiOptions psi;                 // relaxed budgets by default (see constructor)

  PerronOptions() { psi.strict_budgets = false; }
};

struct PerronLevelRow {
  int j = 0;
  double gap = 0.0;       // max(u_j - l_j) over all nodes
  double gap_far = 0.0;   // same, away from E (exclusion radius)
  double dist = 0.0;      // max|u_j - Hf| away from E (exclusion radius)
  double psi_norm = 0.0;  // ||psi_j|| on the ambient box
};

// The obstacle solutions u_j bracket the upper Perron solution from above
// (and l_j the lower one from below); the report brackets, not computes,
// the Perron solution itself.
struct PerronSandwichReport {
  Vec hf;
  std::vector<Vec> upper;          // u_j, j = 1..K
  std::vector<Vec> lower;          // l_j = -(upper for -f, -h)
  std::vector<PerronLevelRow> levels;
  double capacity_of_e = 0.0;
  std::vector<double> caps;
  std::vector<double> direct_dist;  // per cap: max |H(f + cap chi_E) - Hf| away from E
  double exclusion_radius = 0.0;
  bool sandwich_ok = true;    // l_j <= Hf <= u_j (+tol)
  bool monotone_ok = true;    // u_{j+1} <= u_j (+tol)
  bool domination_ok = true;  // u_j >= min(f + cap, f + (K-j)) at E, every cap
};

// Obstacle solution for obstacle-and-data f_j = Hf + psi_j; dominates the
// perturbed boundary data in the nodal sense.
Vec upper_envelope_approx(const DomainMesh& mesh, const OperatorSpec& spec,
                          const Vec& f_boundary, const PerturbationSpec& pert, int j,
                          const PerronOptions& options = {});

PerronSandwichReport perron_sandwich(const DomainMesh& mesh, const OperatorSpec& spec,
                                     const Vec& f_boundary, const PerturbationSpec& pert,
                                     const PerronOptions& options = {});

// Direct comparison of the perturbed and unperturbed energy solutions,
// measured away from E; the fallback instrument when the psi construction
// fails on a positive-capacity support.
double direct_perturbation_distance(const DomainMesh& mesh, const OperatorSpec& spec,
                                    const Vec& f_boundary, const PerturbationSpec& pert,
                                    double cap, double exclusion_radius = 0.0,
                                    double tol = 0.0);

struct UniquenessOptions {
  double bound = 0.0;          // boundedness precondition; 0 = 8*(1+|f|_inf)
  double residual_tol = 0.0;   // discrete A-harmonicity; 0 = 100*default solver tol
  double trace_tol = 0.0;      // boundary match off E; 0 = 1e-9*(1+|f|_inf)
  double pass_tol = 0.0;       // verdict threshold; 0 = 1e-6*(1+|f|_inf)
  double box_side = 0.0;       // for the attached capacity estimate
};

struct UniquenessVerdict {
  bool rejected = false;
  std::string rejection;  // violated precondition, empty when the check ran
  bool pass = false;
  double distance = 0.0;  // max |candidate - Hf|
  double capacity_of_e = 0.0;
};

// Checks whether a bounded, discretely A-harmonic candidate matching f
// outside E coincides with Hf.
UniquenessVerdict uniqueness_check(const DomainMesh& mesh, const OperatorSpec& spec,
                                   const Vec& f_boundary, const Vec& candidate,
                                   const std::vector<int>& E,
                                   const UniquenessOptions& options = {});

// Structured ambient box mesh around the set E (side >= 4*diam(E)+4,
// grid-aligned with cell size cell), plus the ids of E's nodes in it.
struct AmbientBox {
  DomainMesh mesh;
  std::vector<int> set_ids;
};
AmbientBox build_ambient_box(const DomainMesh& domain_mesh, const std::vector<int>& E,
                             double side = 0.0, double cell = 0.0);

nlohmann::json to_json(const PerturbationSpec& p);
PerturbationSpec perturbation_from_json(const nlohmann::json& j);

}  // namespace perronlab

#endif
