#ifndef PERRONLAB_ORACLE_HPP
#define PERRONLAB_ORACLE_HPP

#include <json.hpp>

#include <cstdint>
#include <functional>

#include "perronlab/common.hpp"
#include "perronlab/domain.hpp"
#include "perronlab/obstacle.hpp"

namespace perronlab {

// Independent reference solutions. Each form satisfies div A(x, grad u) = 0
// for its stated p (with w = 1) inside its validity region.
struct ClosedForm {
  enum class Id {
    Affine,          // a x + b y + c, every p
    HarmonicPolyReZk,// Re (x + i y)^k, p = 2
    PoissonKernel,   // (1 - |z|^2)/|pole - z|^2 on the unit disc, p = 2
    RadialP,         // c1 |x|^{(p-2)/(p-1)} + c2, p != 2, away from 0
    LogRadial        // c1 log|x| + c2, p = 2, away from 0
  };
  Id id = Id::Affine;
  double a = 0.0, b = 0.0, c = 0.0;  // affine coefficients
  int k = 2;                          // harmonic polynomial degree
  double pole_angle = 0.0;            // Poisson kernel pole on the unit circle
  double c1 = 1.0, c2 = 0.0;          // radial coefficients
  double p = 2.0;                     // exponent for RadialP

  static ClosedForm affine(double a, double b, double c);
  static ClosedForm re_zk(int k);
  static ClosedForm poisson_kernel(double pole_angle);
  static ClosedForm radial_p(double c1, double c2, double p);
  static ClosedForm log_radial(double c1, double c2);
};

// Exact evaluation; throws ConfigError at the pole/origin singularity.
double eval_closed_form(const ClosedForm& form, const Vec2& x);

struct WosEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
  double mean_steps = 0.0;
};

// Walk-on-spheres Monte Carlo estimate of the harmonic extension of f at x
// (p = 2, w = 1 only; the caller enforces the operator restriction). Walks
// stop within 1e-6 of the boundary and project to the nearest boundary
// point. Per-sample generators are mt19937_64 seeded by splitmix64(seed,
// sample index), so the estimate is independent of execution order.
WosEstimate walk_on_spheres(const DomainDescriptor& domain,
                            const std::function<double(const Vec2&)>& f, const Vec2& x,
                            int n_samples, std::uint64_t seed);

// Exact discrete minimizer of the p = 2 obstacle problem by exhaustive
// active-set enumeration; rejects instances with more than 15 interior
// nodes. Serves as the oracle for solve_obstacle.
Vec brute_force_obstacle(const DomainMesh& mesh, const OperatorSpec& spec,
                         const ObstacleSpec& ob);

nlohmann::json to_json(const ClosedForm& form);
ClosedForm closed_form_from_json(const nlohmann::json& j);

}  // namespace perronlab

#endif
