#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <set>

#include "perronlab/mesh.hpp"

using namespace perronlab;

namespace {

Vec nodal(const DomainMesh& mesh, double (*f)(double, double)) {
  Vec v(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) v[i] = f(mesh.nodes(i, 0), mesh.nodes(i, 1));
  return v;
}

int count_edges(const DomainMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = mesh.triangles(t, e), b = mesh.triangles(t, (e + 1) % 3);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return static_cast<int>(edges.size());
}

}  // namespace

TEST_CASE("unit square at h=0.5 yields the coarse structured grid") {
  const auto mesh = build_mesh(DomainDescriptor::unit_square(), 0.5);
  CHECK(mesh.node_count() >= 9);
  CHECK(mesh.h <= 1.5 * 0.5);
  // All four corners present as boundary nodes.
  for (const Vec2 corner : {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}) {
    const int id = mesh.nearest_node(corner);
    CHECK((Vec2(mesh.nodes.row(id)) - corner).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(mesh.is_boundary[id]);
  }
}

TEST_CASE("disc boundary nodes project onto the circle") {
  const auto mesh = build_mesh(DomainDescriptor::disc(Vec2(0, 0), 1.0), 0.1);
  for (int i : mesh.boundary_nodes)
    CHECK(std::abs(Vec2(mesh.nodes.row(i)).norm() - 1.0) <= 1e-12);
  CHECK(mesh.h <= 1.5 * 0.1);
}

TEST_CASE("overly coarse h_target is rejected") {
  CHECK_THROWS_AS(build_mesh(DomainDescriptor::unit_square(), 2.0), ConfigError);
  CHECK_THROWS_AS(build_mesh(DomainDescriptor::unit_square(), 0.0), ConfigError);
}

TEST_CASE("degenerate descriptors are rejected") {
  CHECK_THROWS_AS(DomainDescriptor::annulus(1.0, 0.5).validate(), ConfigError);
  CHECK_THROWS_AS(
      DomainDescriptor::polygon({Vec2(0, 0), Vec2(1, 1), Vec2(1, 0), Vec2(0, 1)}).validate(),
      ConfigError);  // self-intersecting bow tie
  // Negatively oriented square.
  CHECK_THROWS_AS(
      DomainDescriptor::polygon({Vec2(0, 0), Vec2(0, 1), Vec2(1, 1), Vec2(1, 0)}).validate(),
      ConfigError);
}

TEST_CASE("refinement splits each triangle in four and inserts edge midpoints") {
  auto coarse = build_square_mesh(Vec2(0, 0), 1.0, 1);  // 2 triangles
  CHECK(coarse.triangle_count() == 2);
  const auto fine = refine(coarse);
  CHECK(fine.triangle_count() == 8);
  CHECK(fine.node_count() == coarse.node_count() + count_edges(coarse));

  // Parent nodes keep their indices and coordinates.
  for (int i = 0; i < coarse.node_count(); ++i)
    CHECK((Vec2(fine.nodes.row(i)) - Vec2(coarse.nodes.row(i))).norm() == 0.0);
}

TEST_CASE("two refinements shrink h by a factor of four on straight domains") {
  const auto m0 = build_mesh(DomainDescriptor::unit_square(), 0.4);
  const auto m1 = refine(m0);
  const auto m2 = refine(m1);
  CHECK(m1.h <= 0.5 * m0.h + 1e-12);
  CHECK(m2.h <= 0.25 * m0.h + 1e-12);
}

TEST_CASE("curved refinement halves h up to the projection slack") {
  const auto m0 = build_mesh(DomainDescriptor::disc(Vec2(0, 0), 1.0), 0.25);
  const auto m1 = refine(m0);
  CHECK(m1.h <= 0.505 * m0.h);
  for (int i : m1.boundary_nodes)
    CHECK(std::abs(Vec2(m1.nodes.row(i)).norm() - 1.0) <= 1e-12);
}

TEST_CASE("element gradients reproduce affine fields exactly") {
  for (const auto& domain :
       {DomainDescriptor::unit_square(), DomainDescriptor::disc(Vec2(0, 0), 1.0),
        DomainDescriptor::annulus(0.5, 1.0)}) {
    const auto mesh = build_mesh(domain, 0.2);
    const Vec zero = nodal(mesh, [](double, double) { return 4.0; });
    const Vec ux = nodal(mesh, [](double x, double) { return x; });
    const Vec uxy = nodal(mesh, [](double x, double y) { return 3.0 * x - 2.0 * y; });
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      CHECK(element_gradient(mesh, zero, t).norm() <= 1e-12);
      CHECK((element_gradient(mesh, ux, t) - Vec2(1, 0)).norm() <= 1e-12);
      CHECK((element_gradient(mesh, uxy, t) - Vec2(3, -2)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("refinement nesting: parent nodes keep interpolated values") {
  const auto coarse = build_mesh(DomainDescriptor::unit_square(), 0.3);
  const Vec u = nodal(coarse, [](double x, double y) { return x * x + y; });
  const auto fine = refine(coarse);
  Vec uf(fine.node_count());
  for (int i = 0; i < fine.node_count(); ++i)
    uf[i] = interpolate(coarse, u, fine.nodes.row(i));
  for (int i = 0; i < coarse.node_count(); ++i)
    CHECK(uf[i] == doctest::Approx(u[i]).epsilon(1e-13));
}

TEST_CASE("identical inputs produce bit-identical meshes") {
  const auto a = build_mesh(DomainDescriptor::disc(Vec2(0, 0), 1.0), 0.13);
  const auto b = build_mesh(DomainDescriptor::disc(Vec2(0, 0), 1.0), 0.13);
  REQUIRE(a.node_count() == b.node_count());
  REQUIRE(a.triangle_count() == b.triangle_count());
  CHECK(std::memcmp(a.nodes.data(), b.nodes.data(), sizeof(double) * a.nodes.size()) == 0);
  CHECK(std::memcmp(a.triangles.data(), b.triangles.data(), sizeof(int) * a.triangles.size()) ==
        0);
}

TEST_CASE("boundary classification matches the descriptor") {
  for (const auto& domain :
       {DomainDescriptor::unit_square(), DomainDescriptor::disc(Vec2(0, 0), 1.0),
        DomainDescriptor::annulus(0.5, 1.0),
        DomainDescriptor::polygon({Vec2(0, 0), Vec2(2, 0), Vec2(1, 1.5)})}) {
    const auto mesh = build_mesh(domain, 0.2);
    const double tol = 1e-12 * domain.diameter();
    for (int i : mesh.boundary_nodes)
      CHECK(domain.boundary_distance(mesh.nodes.row(i)) <= tol);
    // Partition property.
    CHECK(static_cast<int>(mesh.boundary_nodes.size() + mesh.interior_nodes.size()) ==
          mesh.node_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) CHECK(mesh.area[t] > 0.0);
  }
}

TEST_CASE("mesh JSON round-trip") {
  const auto mesh = build_mesh(DomainDescriptor::unit_square(), 0.3);
  const auto j = mesh_to_json(mesh);
  const auto back = mesh_from_json(j, mesh.domain);
  REQUIRE(back.node_count() == mesh.node_count());
  REQUIRE(back.triangle_count() == mesh.triangle_count());
  CHECK(back.boundary_nodes == mesh.boundary_nodes);
  CHECK((back.nodes - mesh.nodes).cwiseAbs().maxCoeff() == 0.0);
}
