#include "perronlab/domain.hpp"

#include <algorithm>
#include <cmath>

namespace perronlab {

namespace {

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

Vec2 segment_closest(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return a + t * d;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double polygon_signed_area(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& v) {
  bool inside = false;
  for (size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const bool cond = ((v[i].y() > p.y()) != (v[j].y() > p.y())) &&
                      (p.x() < (v[j].x() - v[i].x()) * (p.y() - v[i].y()) /
                                       (v[j].y() - v[i].y()) +
                                   v[i].x());
    if (cond) inside = !inside;
  }
  return inside;
}

const std::vector<Vec2>& square_vertices() {
  static const std::vector<Vec2> v = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  return v;
}

}  // namespace

DomainDescriptor DomainDescriptor::unit_square() {
  DomainDescriptor d;
  d.shape = Shape::UnitSquare;
  return d;
}

DomainDescriptor DomainDescriptor::disc(const Vec2& center, double radius) {
  DomainDescriptor d;
  d.shape = Shape::Disc;
  d.center = center;
  d.radius = radius;
  return d;
}

DomainDescriptor DomainDescriptor::annulus(double r_in, double r_out) {
  DomainDescriptor d;
  d.shape = Shape::Annulus;
  d.r_in = r_in;
  d.r_out = r_out;
  return d;
}

DomainDescriptor DomainDescriptor::polygon(std::vector<Vec2> vertices) {
  DomainDescriptor d;
  d.shape = Shape::Polygon;
  d.vertices = std::move(vertices);
  return d;
}

double DomainDescriptor::diameter() const {
  switch (shape) {
    case Shape::UnitSquare: return std::sqrt(2.0);
    case Shape::Disc: return 2.0 * radius;
    case Shape::Annulus: return 2.0 * r_out;
    case Shape::Polygon: {
      double d = 0.0;
      for (size_t i = 0; i < vertices.size(); ++i)
        for (size_t j = i + 1; j < vertices.size(); ++j)
          d = std::max(d, (vertices[i] - vertices[j]).norm());
      return d;
    }
  }
  return 0.0;
}

double DomainDescriptor::area() const {
  const double pi = std::acos(-1.0);
  switch (shape) {
    case Shape::UnitSquare: return 1.0;
    case Shape::Disc: return pi * radius * radius;
    case Shape::Annulus: return pi * (r_out * r_out - r_in * r_in);
    case Shape::Polygon: return polygon_signed_area(vertices);
  }
  return 0.0;
}

double DomainDescriptor::boundary_distance(const Vec2& x) const {
  switch (shape) {
    case Shape::UnitSquare: {
      double d = std::numeric_limits<double>::max();
      const auto& v = square_vertices();
      for (size_t i = 0; i < v.size(); ++i)
        d = std::min(d, segment_distance(x, v[i], v[(i + 1) % v.size()]));
      return d;
    }
    case Shape::Disc:
      return std::abs(radius - (x - center).norm());
    case Shape::Annulus: {
      const double r = x.norm();
      return std::min(std::abs(r - r_in), std::abs(r_out - r));
    }
    case Shape::Polygon: {
      double d = std::numeric_limits<double>::max();
      for (size_t i = 0; i < vertices.size(); ++i)
        d = std::min(d, segment_distance(x, vertices[i], vertices[(i + 1) % vertices.size()]));
      return d;
    }
  }
  return 0.0;
}

double DomainDescriptor::inradius_at(const Vec2& x) const { return boundary_distance(x); }

Vec2 DomainDescriptor::project_to_boundary(const Vec2& x) const {
  switch (shape) {
    case Shape::Disc: {
      Vec2 d = x - center;
      const double n = d.norm();
      if (n == 0.0) return center + Vec2(radius, 0.0);
      return center + (radius / n) * d;
    }
    case Shape::Annulus: {
      const double r = x.norm();
      const double target = (std::abs(r - r_in) <= std::abs(r_out - r)) ? r_in : r_out;
      if (r == 0.0) return Vec2(target, 0.0);
      return (target / r) * x;
    }
    case Shape::UnitSquare:
    case Shape::Polygon: {
      const auto& v = (shape == Shape::UnitSquare) ? square_vertices() : vertices;
      double best = std::numeric_limits<double>::max();
      Vec2 proj = v[0];
      for (size_t i = 0; i < v.size(); ++i) {
        const Vec2 c = segment_closest(x, v[i], v[(i + 1) % v.size()]);
        const double d = (x - c).norm();
        if (d < best) {
          best = d;
          proj = c;
        }
      }
      return proj;
    }
  }
  return x;
}

bool DomainDescriptor::contains(const Vec2& x) const {
  switch (shape) {
    case Shape::UnitSquare:
      return x.x() >= 0 && x.x() <= 1 && x.y() >= 0 && x.y() <= 1;
    case Shape::Disc:
      return (x - center).norm() <= radius;
    case Shape::Annulus: {
      const double r = x.norm();
      return r >= r_in && r <= r_out;
    }
    case Shape::Polygon:
      return point_in_polygon(x, vertices) || boundary_distance(x) < 1e-12 * diameter();
  }
  return false;
}

void DomainDescriptor::validate() const {
  switch (shape) {
    case Shape::UnitSquare:
      return;
    case Shape::Disc:
      if (!(radius > 0.0)) throw ConfigError("disc requires radius > 0");
      return;
    case Shape::Annulus:
      if (!(r_in > 0.0 && r_in < r_out))
        throw ConfigError("annulus requires 0 < r_in < r_out");
      return;
    case Shape::Polygon: {
      if (vertices.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
      if (!(polygon_signed_area(vertices) > 0.0))
        throw ConfigError("polygon must be positively oriented with positive area");
      const size_t n = vertices.size();
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
          // Skip adjacent edges (shared endpoint).
          if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
          if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                                 vertices[(j + 1) % n]))
            throw ConfigError("polygon is self-intersecting");
        }
      }
      return;
    }
  }
}

nlohmann::json to_json(const DomainDescriptor& d) {
  nlohmann::json j;
  switch (d.shape) {
    case DomainDescriptor::Shape::UnitSquare:
      j["shape"] = "unit-square";
      break;
    case DomainDescriptor::Shape::Disc:
      j["shape"] = "disc";
      j["center"] = {d.center.x(), d.center.y()};
      j["radius"] = d.radius;
      break;
    case DomainDescriptor::Shape::Annulus:
      j["shape"] = "annulus";
      j["r_in"] = d.r_in;
      j["r_out"] = d.r_out;
      break;
    case DomainDescriptor::Shape::Polygon: {
      j["shape"] = "polygon";
      nlohmann::json verts = nlohmann::json::array();
      for (const auto& v : d.vertices) verts.push_back({v.x(), v.y()});
      j["vertices"] = verts;
      break;
    }
  }
  return j;
}

DomainDescriptor domain_from_json(const nlohmann::json& j) {
  const std::string shape = j.at("shape").get<std::string>();
  DomainDescriptor d;
  if (shape == "unit-square") {
    d = DomainDescriptor::unit_square();
  } else if (shape == "disc") {
    Vec2 c(0, 0);
    if (j.contains("center")) c = Vec2(j["center"][0].get<double>(), j["center"][1].get<double>());
    d = DomainDescriptor::disc(c, j.value("radius", 1.0));
  } else if (shape == "annulus") {
    d = DomainDescriptor::annulus(j.at("r_in").get<double>(), j.at("r_out").get<double>());
  } else if (shape == "polygon") {
    std::vector<Vec2> verts;
    for (const auto& v : j.at("vertices")) verts.emplace_back(v[0].get<double>(), v[1].get<double>());
    d = DomainDescriptor::polygon(std::move(verts));
  } else {
    throw ConfigError("unknown domain shape: " + shape);
  }
  d.validate();
  return d;
}

}  // namespace perronlab
