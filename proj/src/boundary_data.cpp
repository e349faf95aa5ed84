#include "perronlab/boundary_data.hpp"

#include <cmath>

#include "perronlab/oracle.hpp"

namespace perronlab {

ScalarField make_scalar_field(const nlohmann::json& j) {
  const std::string id = j.at("id").get<std::string>();
  if (id == "constant") {
    const double c = j.at("c").get<double>();
    return [c](const Vec2&) { return c; };
  }
  if (id == "affine") {
    const double a = j.value("a", 0.0), b = j.value("b", 0.0), c = j.value("c", 0.0);
    return [a, b, c](const Vec2& x) { return a * x.x() + b * x.y() + c; };
  }
  if (id == "x2-minus-y2") {
    return [](const Vec2& x) { return x.x() * x.x() - x.y() * x.y(); };
  }
  if (id == "re-zk") {
    const ClosedForm f = ClosedForm::re_zk(j.at("k").get<int>());
    return [f](const Vec2& x) { return eval_closed_form(f, x); };
  }
  if (id == "sin-pi-x") {
    return [](const Vec2& x) { return std::sin(std::acos(-1.0) * x.x()); };
  }
  if (id == "pos-sin-pi-x") {
    return [](const Vec2& x) { return std::max(0.0, std::sin(std::acos(-1.0) * x.x())); };
  }
  if (id == "sqrt-wedge") {
    const double x0 = j.value("x0", 0.5);
    return [x0](const Vec2& x) { return std::sqrt(std::abs(x.x() - x0)); };
  }
  if (id == "paraboloid") {
    const double cx = j.at("center")[0].get<double>();
    const double cy = j.at("center")[1].get<double>();
    const double height = j.at("height").get<double>();
    const double curv = j.at("curvature").get<double>();
    return [cx, cy, height, curv](const Vec2& x) {
      return height - curv * (x - Vec2(cx, cy)).squaredNorm();
    };
  }
  if (id == "poisson-kernel") {
    const ClosedForm f = ClosedForm::poisson_kernel(j.value("pole_angle", 0.0));
    const double cap = j.value("cap", 1e12);
    return [f, cap](const Vec2& x) {
      double v;
      try {
        v = eval_closed_form(f, x);
      } catch (const ConfigError&) {
        return cap;
      }
      return std::min(v, cap);
    };
  }
  throw ConfigError("unknown scalar field id: " + id);
}

Vec sample_boundary(const DomainMesh& mesh, const ScalarField& f) {
  Vec v = Vec::Zero(mesh.node_count());
  for (int i : mesh.boundary_nodes) v[i] = f(mesh.nodes.row(i));
  return v;
}

Vec sample_all(const DomainMesh& mesh, const ScalarField& f) {
  Vec v(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) v[i] = f(mesh.nodes.row(i));
  return v;
}

}  // namespace perronlab
