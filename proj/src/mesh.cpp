#include "perronlab/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>

namespace perronlab {

namespace {

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// Structured criss mesh on [x0,x0+side]^2 with n cells per side, all
// diagonals running SW-NE.
DomainMesh structured_square(const DomainDescriptor& domain, double x0, double y0,
                             double side, int n) {
  DomainMesh m;
  m.domain = domain;
  const int np = n + 1;
  m.nodes.resize(np * np, 2);
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i) {
      m.nodes(j * np + i, 0) = x0 + side * static_cast<double>(i) / n;
      m.nodes(j * np + i, 1) = y0 + side * static_cast<double>(j) / n;
    }
  m.triangles.resize(2 * n * n, 3);
  int t = 0;
  auto vid = [np](int i, int j) { return j * np + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.triangles.row(t++) << vid(i, j), vid(i + 1, j), vid(i + 1, j + 1);
      m.triangles.row(t++) << vid(i, j), vid(i + 1, j + 1), vid(i, j + 1);
    }
  m.finalize();
  return m;
}

// Hexagonal ring mesh of a disc: ring k carries 6k nodes, so element size
// stays uniform from the center out.
DomainMesh hex_disc(const DomainDescriptor& domain, int rings) {
  DomainMesh m;
  m.domain = domain;
  const double R = domain.radius;
  const Vec2 c = domain.center;
  const double pi = std::acos(-1.0);

  std::vector<Vec2> nodes;
  nodes.push_back(c);
  std::vector<int> ring_start = {0};  // start index of ring k (ring 0 = center)
  for (int k = 1; k <= rings; ++k) {
    ring_start.push_back(static_cast<int>(nodes.size()));
    const int nk = 6 * k;
    const double r = R * k / rings;
    for (int i = 0; i < nk; ++i) {
      const double a = 2.0 * pi * i / nk;
      nodes.push_back(c + r * Vec2(std::cos(a), std::sin(a)));
    }
  }

  std::vector<std::array<int, 3>> tris;
  // Innermost fan.
  for (int i = 0; i < 6; ++i)
    tris.push_back({0, ring_start[1] + i, ring_start[1] + (i + 1) % 6});
  // Ring bands: in each of the 6 sectors, zigzag between ring k-1 and k.
  for (int k = 2; k <= rings; ++k) {
    const int out0 = ring_start[k], in0 = ring_start[k - 1];
    const int nout = 6 * k, nin = 6 * (k - 1);
    for (int s = 0; s < 6; ++s) {
      for (int i = 0; i < k; ++i) {
        const int o1 = out0 + (s * k + i) % nout;
        const int o2 = out0 + (s * k + i + 1) % nout;
        const int in = in0 + (s * (k - 1) + i) % nin;
        tris.push_back({o1, o2, in});
        if (i + 1 < k) {
          const int in2 = in0 + (s * (k - 1) + i + 1) % nin;
          tris.push_back({o2, in2, in});
        }
      }
    }
  }

  m.nodes.resize(static_cast<int>(nodes.size()), 2);
  for (size_t i = 0; i < nodes.size(); ++i) m.nodes.row(static_cast<int>(i)) = nodes[i];
  m.triangles.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t) {
    auto tr = tris[t];
    if (triangle_area(nodes[tr[0]], nodes[tr[1]], nodes[tr[2]]) < 0.0)
      std::swap(tr[1], tr[2]);
    m.triangles.row(static_cast<int>(t)) << tr[0], tr[1], tr[2];
  }
  m.finalize();
  return m;
}

DomainMesh polar_annulus(const DomainDescriptor& domain, int rings, int sectors) {
  DomainMesh m;
  m.domain = domain;
  const double pi = std::acos(-1.0);
  const double dr = (domain.r_out - domain.r_in) / rings;
  m.nodes.resize((rings + 1) * sectors, 2);
  for (int k = 0; k <= rings; ++k) {
    const double r = domain.r_in + k * dr;
    for (int i = 0; i < sectors; ++i) {
      const double a = 2.0 * pi * i / sectors;
      m.nodes.row(k * sectors + i) << r * std::cos(a), r * std::sin(a);
    }
  }
  m.triangles.resize(2 * rings * sectors, 3);
  int t = 0;
  for (int k = 0; k < rings; ++k)
    for (int i = 0; i < sectors; ++i) {
      const int i2 = (i + 1) % sectors;
      const int a = k * sectors + i, b = k * sectors + i2;
      const int c = (k + 1) * sectors + i, d = (k + 1) * sectors + i2;
      m.triangles.row(t++) << a, b, d;
      m.triangles.row(t++) << a, d, c;
    }
  m.finalize();
  return m;
}

// Ear clipping of a simple positively oriented polygon.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& pts) {
  std::vector<int> poly(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) poly[i] = static_cast<int>(i);
  std::vector<std::array<int, 3>> tris;
  auto is_ear = [&](size_t idx) {
    const size_t n = poly.size();
    const int ia = poly[(idx + n - 1) % n], ib = poly[idx], ic = poly[(idx + 1) % n];
    if (triangle_area(pts[ia], pts[ib], pts[ic]) <= 0.0) return false;
    for (int iv : poly) {
      if (iv == ia || iv == ib || iv == ic) continue;
      // Strict interior test via barycentric signs.
      const double a0 = triangle_area(pts[ia], pts[ib], pts[iv]);
      const double a1 = triangle_area(pts[ib], pts[ic], pts[iv]);
      const double a2 = triangle_area(pts[ic], pts[ia], pts[iv]);
      if (a0 > 0 && a1 > 0 && a2 > 0) return false;
    }
    return true;
  };
  while (poly.size() > 3) {
    bool clipped = false;
    for (size_t i = 0; i < poly.size(); ++i) {
      if (is_ear(i)) {
        const size_t n = poly.size();
        tris.push_back({poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]});
        poly.erase(poly.begin() + static_cast<long>(i));
        clipped = true;
        break;
      }
    }
    if (!clipped) throw ConfigError("polygon triangulation failed (degenerate input)");
  }
  tris.push_back({poly[0], poly[1], poly[2]});
  return tris;
}

}  // namespace

void DomainMesh::finalize() {
  const int nn = node_count();
  const int nt = triangle_count();

  area.assign(nt, 0.0);
  barycenter.assign(nt, Vec2::Zero());
  hat_gradients.assign(nt, Eigen::Matrix<double, 2, 3>::Zero());
  node_triangles.assign(nn, {});
  node_neighbors.assign(nn, {});

  std::map<std::pair<int, int>, int> edge_count;
  h = 0.0;
  for (int t = 0; t < nt; ++t) {
    const int i0 = triangles(t, 0), i1 = triangles(t, 1), i2 = triangles(t, 2);
    const Vec2 p0 = nodes.row(i0), p1 = nodes.row(i1), p2 = nodes.row(i2);
    const double a = triangle_area(p0, p1, p2);
    if (!(a > 0.0)) throw Error("mesh has a nonpositive-area triangle");
    area[t] = a;
    barycenter[t] = (p0 + p1 + p2) / 3.0;

    // Gradients of the three hat functions on this triangle.
    Mat2 B;
    B.col(0) = p1 - p0;
    B.col(1) = p2 - p0;
    const Mat2 Binv_t = B.inverse().transpose();
    hat_gradients[t].col(1) = Binv_t.col(0);
    hat_gradients[t].col(2) = Binv_t.col(1);
    hat_gradients[t].col(0) = -Binv_t.col(0) - Binv_t.col(1);

    const int vv[3] = {i0, i1, i2};
    for (int e = 0; e < 3; ++e) {
      const int a1 = vv[e], a2 = vv[(e + 1) % 3];
      edge_count[{std::min(a1, a2), std::max(a1, a2)}]++;
      h = std::max(h, (Vec2(nodes.row(a1)) - Vec2(nodes.row(a2))).norm());
      node_triangles[vv[e]].push_back(t);
    }
  }

  is_boundary.assign(nn, false);
  for (const auto& [edge, count] : edge_count) {
    node_neighbors[edge.first].push_back(edge.second);
    node_neighbors[edge.second].push_back(edge.first);
    if (count == 1) {
      is_boundary[edge.first] = true;
      is_boundary[edge.second] = true;
    }
  }
  boundary_nodes.clear();
  interior_nodes.clear();
  for (int i = 0; i < nn; ++i) {
    (is_boundary[i] ? boundary_nodes : interior_nodes).push_back(i);
    std::sort(node_neighbors[i].begin(), node_neighbors[i].end());
  }
}

int DomainMesh::nearest_node(const Vec2& x) const {
  int best = 0;
  double bd = std::numeric_limits<double>::max();
  for (int i = 0; i < node_count(); ++i) {
    const double d = (Vec2(nodes.row(i)) - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

int DomainMesh::nearest_boundary_node(const Vec2& x) const {
  int best = boundary_nodes.at(0);
  double bd = std::numeric_limits<double>::max();
  for (int i : boundary_nodes) {
    const double d = (Vec2(nodes.row(i)) - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> DomainMesh::boundary_nodes_on_segment(const Vec2& a, const Vec2& b,
                                                       double tol) const {
  std::vector<int> out;
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  for (int i : boundary_nodes) {
    const Vec2 p = nodes.row(i);
    const double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    if ((p - (a + t * d)).norm() <= tol) out.push_back(i);
  }
  return out;
}

std::vector<int> DomainMesh::graph_ball(const std::vector<int>& seeds, int distance) const {
  std::vector<int> dist(node_count(), -1);
  std::queue<int> q;
  for (int s : seeds) {
    dist[s] = 0;
    q.push(s);
  }
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (dist[v] >= distance) continue;
    for (int w : node_neighbors[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  std::vector<int> out;
  for (int i = 0; i < node_count(); ++i)
    if (dist[i] >= 0) out.push_back(i);
  return out;
}

std::vector<int> DomainMesh::one_ring(const std::vector<int>& seeds) const {
  std::set<int> out(seeds.begin(), seeds.end());
  for (int s : seeds)
    for (int t : node_triangles[s])
      for (int e = 0; e < 3; ++e) out.insert(triangles(t, e));
  return {out.begin(), out.end()};
}

DomainMesh build_mesh(const DomainDescriptor& domain, double h_target) {
  domain.validate();
  const double diam = domain.diameter();
  if (!(h_target > 0.0)) throw ConfigError("h_target must be positive");
  if (h_target > 0.5 * diam)
    throw ConfigError("h_target too large for the domain (need h_target <= diam/2)");

  switch (domain.shape) {
    case DomainDescriptor::Shape::UnitSquare: {
      const int n = std::max(2, static_cast<int>(std::ceil(std::sqrt(2.0) / h_target)));
      return structured_square(domain, 0.0, 0.0, 1.0, n);
    }
    case DomainDescriptor::Shape::Disc: {
      const int rings = std::max(2, static_cast<int>(std::ceil(1.13 * domain.radius / h_target)));
      return hex_disc(domain, rings);
    }
    case DomainDescriptor::Shape::Annulus: {
      const double s2 = std::sqrt(2.0);
      const double pi = std::acos(-1.0);
      const int rings =
          std::max(2, static_cast<int>(std::ceil(s2 * (domain.r_out - domain.r_in) / h_target)));
      const int sectors =
          std::max(8, static_cast<int>(std::ceil(2.0 * pi * domain.r_out * s2 / h_target)));
      return polar_annulus(domain, rings, sectors);
    }
    case DomainDescriptor::Shape::Polygon: {
      DomainMesh m;
      m.domain = domain;
      m.nodes.resize(static_cast<int>(domain.vertices.size()), 2);
      for (size_t i = 0; i < domain.vertices.size(); ++i)
        m.nodes.row(static_cast<int>(i)) = domain.vertices[i];
      const auto tris = ear_clip(domain.vertices);
      m.triangles.resize(static_cast<int>(tris.size()), 3);
      for (size_t t = 0; t < tris.size(); ++t)
        m.triangles.row(static_cast<int>(t)) << tris[t][0], tris[t][1], tris[t][2];
      m.finalize();
      while (m.h > h_target) m = refine(m);
      return m;
    }
  }
  throw ConfigError("unknown domain shape");
}

DomainMesh build_square_mesh(const Vec2& corner, double side, int cells) {
  if (!(side > 0.0) || cells < 1) throw ConfigError("bad square mesh parameters");
  const DomainDescriptor d = DomainDescriptor::polygon(
      {corner, corner + Vec2(side, 0), corner + Vec2(side, side), corner + Vec2(0, side)});
  return structured_square(d, corner.x(), corner.y(), side, cells);
}

DomainMesh refine(const DomainMesh& mesh) {
  DomainMesh out;
  out.domain = mesh.domain;

  // Boundary edges of the parent (incidence count 1).
  std::map<std::pair<int, int>, int> edge_count;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = mesh.triangles(t, e), b = mesh.triangles(t, (e + 1) % 3);
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }

  const bool curved = mesh.domain.shape == DomainDescriptor::Shape::Disc ||
                      mesh.domain.shape == DomainDescriptor::Shape::Annulus;

  std::map<std::pair<int, int>, int> midpoint;
  std::vector<Vec2> new_nodes;
  new_nodes.reserve(mesh.node_count() + edge_count.size());
  for (int i = 0; i < mesh.node_count(); ++i) new_nodes.emplace_back(mesh.nodes.row(i));

  auto mid_id = [&](int a, int b) {
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 m = 0.5 * (Vec2(mesh.nodes.row(a)) + Vec2(mesh.nodes.row(b)));
    if (curved && edge_count.at(key) == 1) m = mesh.domain.project_to_boundary(m);
    const int id = static_cast<int>(new_nodes.size());
    new_nodes.push_back(m);
    midpoint.emplace(key, id);
    return id;
  };

  out.triangles.resize(4 * mesh.triangle_count(), 3);
  int t_out = 0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const int v0 = mesh.triangles(t, 0), v1 = mesh.triangles(t, 1), v2 = mesh.triangles(t, 2);
    const int m01 = mid_id(v0, v1), m12 = mid_id(v1, v2), m02 = mid_id(v0, v2);
    out.triangles.row(t_out++) << v0, m01, m02;
    out.triangles.row(t_out++) << m01, v1, m12;
    out.triangles.row(t_out++) << m02, m12, v2;
    out.triangles.row(t_out++) << m01, m12, m02;
  }

  out.nodes.resize(static_cast<int>(new_nodes.size()), 2);
  for (size_t i = 0; i < new_nodes.size(); ++i) out.nodes.row(static_cast<int>(i)) = new_nodes[i];
  out.finalize();
  return out;
}

Vec2 element_gradient(const DomainMesh& mesh, const Vec& u, int t) {
  if (t < 0 || t >= mesh.triangle_count()) throw ConfigError("triangle index out of range");
  Vec2 g = Vec2::Zero();
  for (int e = 0; e < 3; ++e) g += u[mesh.triangles(t, e)] * mesh.hat_gradients[t].col(e);
  return g;
}

double interpolate(const DomainMesh& mesh, const Vec& u, const Vec2& x) {
  auto bary_eval = [&](int t, double tol, double* val) {
    const int i0 = mesh.triangles(t, 0), i1 = mesh.triangles(t, 1), i2 = mesh.triangles(t, 2);
    const Vec2 p0 = mesh.nodes.row(i0), p1 = mesh.nodes.row(i1), p2 = mesh.nodes.row(i2);
    const double a = mesh.area[t];
    const double l0 = triangle_area(x, p1, p2) / a;
    const double l1 = triangle_area(p0, x, p2) / a;
    const double l2 = triangle_area(p0, p1, x) / a;
    if (l0 < -tol || l1 < -tol || l2 < -tol) return false;
    *val = l0 * u[i0] + l1 * u[i1] + l2 * u[i2];
    return true;
  };
  // Triangles around the nearest node almost always contain the point.
  const int nn = mesh.nearest_node(x);
  double val = 0.0;
  for (int t : mesh.node_triangles[nn])
    if (bary_eval(t, 1e-12, &val)) return val;
  for (int nb : mesh.node_neighbors[nn])
    for (int t : mesh.node_triangles[nb])
      if (bary_eval(t, 1e-12, &val)) return val;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    if (bary_eval(t, 1e-9, &val)) return val;
  throw ConfigError("interpolation point outside the mesh");
}

nlohmann::json mesh_to_json(const DomainMesh& mesh) {
  nlohmann::json j;
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 0; i < mesh.node_count(); ++i)
    nodes.push_back({mesh.nodes(i, 0), mesh.nodes(i, 1)});
  nlohmann::json tris = nlohmann::json::array();
  for (int t = 0; t < mesh.triangle_count(); ++t)
    tris.push_back({mesh.triangles(t, 0), mesh.triangles(t, 1), mesh.triangles(t, 2)});
  j["nodes"] = nodes;
  j["triangles"] = tris;
  j["boundary"] = mesh.boundary_nodes;
  return j;
}

DomainMesh mesh_from_json(const nlohmann::json& j, const DomainDescriptor& domain) {
  DomainMesh m;
  m.domain = domain;
  const auto& nodes = j.at("nodes");
  m.nodes.resize(static_cast<int>(nodes.size()), 2);
  for (size_t i = 0; i < nodes.size(); ++i) {
    m.nodes(static_cast<int>(i), 0) = nodes[i][0].get<double>();
    m.nodes(static_cast<int>(i), 1) = nodes[i][1].get<double>();
  }
  const auto& tris = j.at("triangles");
  m.triangles.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t)
    for (int e = 0; e < 3; ++e) m.triangles(static_cast<int>(t), e) = tris[t][e].get<int>();
  m.finalize();
  if (j.contains("boundary")) {
    std::vector<int> listed = j["boundary"].get<std::vector<int>>();
    std::sort(listed.begin(), listed.end());
    if (listed != m.boundary_nodes)
      throw ConfigError("mesh file boundary list disagrees with the triangulation");
  }
  return m;
}

void save_mesh(const DomainMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  f << mesh_to_json(mesh).dump(2) << "\n";
}

DomainMesh load_mesh(const std::string& path, const DomainDescriptor& domain) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  f >> j;
  return mesh_from_json(j, domain);
}

}  // namespace perronlab
