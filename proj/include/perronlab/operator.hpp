#ifndef PERRONLAB_OPERATOR_HPP
#define PERRONLAB_OPERATOR_HPP

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "perronlab/common.hpp"
#include "perronlab/mesh.hpp"

namespace perronlab {

// Weights w(x): constant, |x|^gamma, or c*|x|^gamma. Evaluated at element
// barycenters throughout.
struct WeightSpec {
  enum class Kind { Constant, Power, Product };
  Kind kind = Kind::Constant;
  double c = 1.0;
  double gamma = 0.0;

  static WeightSpec constant(double c);
  static WeightSpec power(double gamma);
  static WeightSpec product(double c, double gamma);

  double operator()(const Vec2& x) const;
  bool is_unit() const { return kind == Kind::Constant && c == 1.0; }
  // Muckenhoupt A_p range for power weights in the plane: -2 < gamma < 2(p-1).
  bool ap_admissible(double p) const;
  void validate() const;
};

// The flux A(x,q) = w(x) * (q.M q)^{(p-2)/2} * M q together with its
// exponent, weight and structure constants.
struct OperatorSpec {
  double p = 2.0;
  WeightSpec weight;
  Mat2 anisotropy = Mat2::Identity();

  // Structure constants: A.q >= alpha*w|q|^p and |A| <= beta*w|q|^{p-1}.
  double alpha() const;
  double beta() const;
  bool is_isotropic() const;
  void validate() const;
};

// Flux evaluation; rejects non-finite q.
Vec2 a_flux(const OperatorSpec& spec, const Vec2& x, const Vec2& q);

// Gradient part of the weighted p-energy: sum over triangles of
// w(bary) * (grad u . M grad u)^{p/2} * area.
double energy(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& u);

// Weak-form residual against the interior hat functions:
// r_i = sum_t w_t A(grad u|_t) . grad phi_i|_t * area_t.
// Boundary entries are zero; the mesh's boundary set flags them.
Vec residual(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& u);

// Same sum taken at every node, including boundary rows (used for energy
// gradients and discrete flux balances).
Vec residual_all_nodes(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& u);

struct ConditionMargin {
  double worst = std::numeric_limits<double>::infinity();
  Vec2 witness_x = Vec2::Zero();
  Vec2 witness_q = Vec2::Zero();
  bool pass = true;
};

struct StructureReport {
  ConditionMargin coercivity;     // A.q - alpha*w|q|^p, relative
  ConditionMargin boundedness;    // beta*w|q|^{p-1} - |A|, relative
  ConditionMargin monotonicity;   // (A(q1)-A(q2)).(q1-q2) > 0
  ConditionMargin homogeneity;    // |A(lambda q) - lambda|lambda|^{p-2}A(q)|, relative
  int samples = 0;
  bool pass = true;
  std::string failure;  // names the first violated condition and witness
};

using FluxFn = std::function<Vec2(const Vec2& x, const Vec2& q)>;

// Samples random (x, q, q1, q2, lambda) and checks the four structure
// conditions. The optional flux override exists for negative controls.
StructureReport check_structure_conditions(const OperatorSpec& spec, int sample_count,
                                           std::uint64_t seed,
                                           const std::optional<FluxFn>& flux = std::nullopt);

struct ApWeightReport {
  double constant_estimate = 0.0;      // max observed ratio over sampled balls
  bool diverging = false;              // dual factor blows up near the singularity
  std::vector<double> origin_trend;    // estimates on B(0,1) under quadrature refinement
};

// Estimates the A_p constant sup_B (avg_B w)(avg_B w^{1/(1-p)})^{p-1} over
// random balls in [-1,1]^2. Power weights are scale-invariant, so the
// divergence of the dual factor for out-of-range exponents is probed by
// refining the quadrature on origin-centered balls instead of shrinking
// them.
ApWeightReport check_ap_weight(const WeightSpec& weight, double p, int ball_sample_count,
                               std::uint64_t seed);

nlohmann::json to_json(const WeightSpec& w);
WeightSpec weight_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OperatorSpec& s);
OperatorSpec operator_from_json(const nlohmann::json& j);

}  // namespace perronlab

#endif
