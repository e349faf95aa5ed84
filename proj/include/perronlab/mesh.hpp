#ifndef PERRONLAB_MESH_HPP
#define PERRONLAB_MESH_HPP

#include <json.hpp>

#include <array>
#include <string>
#include <vector>

#include "perronlab/common.hpp"
#include "perronlab/domain.hpp"

namespace perronlab {

// Conforming triangulation of a DomainDescriptor. Immutable after
// construction; per-element geometry is cached up front so assembly loops
// touch contiguous data only.
struct DomainMesh {
  DomainDescriptor domain;

  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;   // node coordinates
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;  // CCW node triples
  std::vector<int> boundary_nodes;                  // sorted
  std::vector<int> interior_nodes;                  // sorted
  std::vector<bool> is_boundary;
  double h = 0.0;                                   // longest edge

  // Cached per-triangle data.
  std::vector<double> area;
  std::vector<Vec2> barycenter;
  std::vector<Eigen::Matrix<double, 2, 3>> hat_gradients;  // grad of the 3 hats

  // Node -> incident triangle indices (ascending).
  std::vector<std::vector<int>> node_triangles;
  // Node -> neighbour node indices (ascending), from shared edges.
  std::vector<std::vector<int>> node_neighbors;

  int node_count() const { return static_cast<int>(nodes.rows()); }
  int triangle_count() const { return static_cast<int>(triangles.rows()); }

  // Recomputes caches, h and the boundary classification from nodes and
  // triangles. Boundary edges are the ones incident to exactly one triangle.
  void finalize();

  // Nearest node to a point (ties broken by index).
  int nearest_node(const Vec2& x) const;
  // Nearest boundary node to a point.
  int nearest_boundary_node(const Vec2& x) const;
  // Boundary nodes within tol of the segment [a,b].
  std::vector<int> boundary_nodes_on_segment(const Vec2& a, const Vec2& b,
                                             double tol = 1e-9) const;
  // Nodes within the given graph distance of the seed set.
  std::vector<int> graph_ball(const std::vector<int>& seeds, int distance) const;
  // Seed set plus all nodes sharing a triangle with it.
  std::vector<int> one_ring(const std::vector<int>& seeds) const;
};

// Builds a deterministic triangulation with longest edge <= 1.5*h_target
// (in practice <= h_target for the square/disc/annulus constructions).
DomainMesh build_mesh(const DomainDescriptor& domain, double h_target);

// Structured criss mesh of the square [corner, corner + side]^2 with the
// given cell count per side; used for the ambient capacity boxes.
DomainMesh build_square_mesh(const Vec2& corner, double side, int cells);

// Uniform 4-way refinement; parent nodes keep their indices, edge midpoints
// are appended. New boundary nodes are projected onto the true boundary
// curve, so on discs/annuli the halving of h carries an O(h^3/R^2)
// geometric slack.
DomainMesh refine(const DomainMesh& mesh);

// Constant gradient of the piecewise-linear interpolant on triangle t.
Vec2 element_gradient(const DomainMesh& mesh, const Vec& u, int t);

// P1 evaluation of a nodal field at an arbitrary point (locates the
// containing triangle; throws ConfigError if the point is outside).
double interpolate(const DomainMesh& mesh, const Vec& u, const Vec2& x);

// JSON export/import: {nodes:[[x,y],...], triangles:[[i,j,k],...], boundary:[i,...]}.
nlohmann::json mesh_to_json(const DomainMesh& mesh);
DomainMesh mesh_from_json(const nlohmann::json& j, const DomainDescriptor& domain);

void save_mesh(const DomainMesh& mesh, const std::string& path);
DomainMesh load_mesh(const std::string& path, const DomainDescriptor& domain);

}  // namespace perronlab

#endif
