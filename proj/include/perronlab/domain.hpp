#ifndef PERRONLAB_DOMAIN_HPP
#define PERRONLAB_DOMAIN_HPP

#include <json.hpp>

#include <vector>

#include "perronlab/common.hpp"

namespace perronlab {

// Planar computational domains: unit square, disc, annulus, or a simple
// positively oriented polygon.
struct DomainDescriptor {
  enum class Shape { UnitSquare, Disc, Annulus, Polygon };

  Shape shape = Shape::UnitSquare;
  Vec2 center = Vec2::Zero();                 // disc
  double radius = 1.0;                        // disc
  double r_in = 0.5, r_out = 1.0;             // annulus (centered at origin)
  std::vector<Vec2> vertices;                 // polygon

  static DomainDescriptor unit_square();
  static DomainDescriptor disc(const Vec2& center, double radius);
  static DomainDescriptor annulus(double r_in, double r_out);
  static DomainDescriptor polygon(std::vector<Vec2> vertices);

  double diameter() const;
  double area() const;

  // Distance from x to the boundary curve(s); zero on the boundary.
  double boundary_distance(const Vec2& x) const;
  // Distance to the boundary from an interior point (used by the sphere
  // walks); equals boundary_distance for these shapes.
  double inradius_at(const Vec2& x) const;
  // Closest point on the boundary.
  Vec2 project_to_boundary(const Vec2& x) const;

  bool contains(const Vec2& x) const;

  // Throws ConfigError for degenerate descriptors (zero area, bad annulus
  // radii, self-intersecting polygons).
  void validate() const;
};

nlohmann::json to_json(const DomainDescriptor& d);
DomainDescriptor domain_from_json(const nlohmann::json& j);

}  // namespace perronlab

#endif
