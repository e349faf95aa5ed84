#ifndef PERRONLAB_BOUNDARY_DATA_HPP
#define PERRONLAB_BOUNDARY_DATA_HPP

#include <json.hpp>

#include <functional>

#include "perronlab/common.hpp"
#include "perronlab/mesh.hpp"

namespace perronlab {

using ScalarField = std::function<double(const Vec2&)>;

// Analytic scalar fields addressable from configs, used for boundary data,
// obstacles and study profiles:
//   constant{c}, affine{a,b,c}, x2-minus-y2, re-zk{k}, sin-pi-x,
//   pos-sin-pi-x (max(0, sin(pi x))), sqrt-wedge{x0} (|x - x0|^{1/2},
//   continuous but not Lipschitz), paraboloid{center, height, curvature}
//   (height - curvature*|x - center|^2), poisson-kernel{pole_angle, cap}.
ScalarField make_scalar_field(const nlohmann::json& j);

// Nodal samples of a field at the boundary nodes (zero elsewhere).
Vec sample_boundary(const DomainMesh& mesh, const ScalarField& f);
// Nodal samples at every node.
Vec sample_all(const DomainMesh& mesh, const ScalarField& f);

}  // namespace perronlab

#endif
