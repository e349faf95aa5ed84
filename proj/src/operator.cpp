#include "perronlab/operator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace perronlab {

WeightSpec WeightSpec::constant(double c) {
  WeightSpec w;
  w.kind = Kind::Constant;
  w.c = c;
  return w;
}

WeightSpec WeightSpec::power(double gamma) {
  WeightSpec w;
  w.kind = Kind::Power;
  w.gamma = gamma;
  return w;
}

WeightSpec WeightSpec::product(double c, double gamma) {
  WeightSpec w;
  w.kind = Kind::Product;
  w.c = c;
  w.gamma = gamma;
  return w;
}

double WeightSpec::operator()(const Vec2& x) const {
  switch (kind) {
    case Kind::Constant:
      return c;
    case Kind::Power:
      return std::pow(x.norm(), gamma);
    case Kind::Product:
      return c * std::pow(x.norm(), gamma);
  }
  return 1.0;
}

bool WeightSpec::ap_admissible(double p) const {
  if (kind == Kind::Constant) return c > 0.0;
  return c > 0.0 && gamma > -2.0 && gamma < 2.0 * (p - 1.0);
}

void WeightSpec::validate() const {
  if (!(c > 0.0)) throw ConfigError("weight constant must be positive");
  if (kind != Kind::Constant && !(gamma > -2.0))
    throw ConfigError("power weight needs gamma > -2 (local integrability)");
}

double OperatorSpec::alpha() const {
  if (is_isotropic()) return 1.0;
  Eigen::SelfAdjointEigenSolver<Mat2> es(anisotropy);
  return std::pow(es.eigenvalues()(0), p / 2.0);
}

double OperatorSpec::beta() const {
  if (is_isotropic()) return 1.0;
  Eigen::SelfAdjointEigenSolver<Mat2> es(anisotropy);
  const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(1);
  if (p >= 2.0) return std::pow(lmax, p / 2.0);
  return lmax * std::pow(lmin, (p - 2.0) / 2.0);
}

bool OperatorSpec::is_isotropic() const {
  return anisotropy.isApprox(Mat2::Identity(), 0.0);
}

void OperatorSpec::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("exponent p must lie in (1, inf)");
  weight.validate();
  if ((anisotropy - anisotropy.transpose()).norm() > 1e-14)
    throw ConfigError("anisotropy matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(anisotropy);
  if (!(es.eigenvalues()(0) > 0.0))
    throw ConfigError("anisotropy matrix must be positive definite");
}

namespace {

// (q.Mq)^{(p-2)/2} Mq, with the q=0 limit taken as 0 for every p>1.
inline Vec2 flux_kernel(double p, const Mat2& M, bool isotropic, const Vec2& q) {
  if (isotropic) {
    const double n2 = q.squaredNorm();
    if (n2 == 0.0) return Vec2::Zero();
    return std::pow(n2, (p - 2.0) / 2.0) * q;
  }
  const Vec2 Mq = M * q;
  const double n2 = q.dot(Mq);
  if (n2 == 0.0) return Vec2::Zero();
  return std::pow(n2, (p - 2.0) / 2.0) * Mq;
}

}  // namespace

Vec2 a_flux(const OperatorSpec& spec, const Vec2& x, const Vec2& q) {
  if (!q.allFinite()) throw ConfigError("flux argument q must be finite");
  return spec.weight(x) * flux_kernel(spec.p, spec.anisotropy, spec.is_isotropic(), q);
}

double energy(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& u) {
  const bool iso = spec.is_isotropic();
  double e = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 g = element_gradient(mesh, u, t);
    const double q2 = iso ? g.squaredNorm() : g.dot(spec.anisotropy * g);
    e += spec.weight(mesh.barycenter[t]) * std::pow(q2, spec.p / 2.0) * mesh.area[t];
  }
  return e;
}

Vec residual_all_nodes(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& u) {
  const bool iso = spec.is_isotropic();
  Vec r = Vec::Zero(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 g = element_gradient(mesh, u, t);
    const Vec2 a = spec.weight(mesh.barycenter[t]) *
                   flux_kernel(spec.p, spec.anisotropy, iso, g) * mesh.area[t];
    for (int e = 0; e < 3; ++e)
      r[mesh.triangles(t, e)] += a.dot(mesh.hat_gradients[t].col(e));
  }
  return r;
}

Vec residual(const DomainMesh& mesh, const OperatorSpec& spec, const Vec& u) {
  Vec r = residual_all_nodes(mesh, spec, u);
  for (int i : mesh.boundary_nodes) r[i] = 0.0;
  return r;
}

StructureReport check_structure_conditions(const OperatorSpec& spec, int sample_count,
                                           std::uint64_t seed,
                                           const std::optional<FluxFn>& flux) {
  if (sample_count < 1) throw ConfigError("sample_count must be >= 1");
  spec.validate();
  auto A = [&](const Vec2& x, const Vec2& q) -> Vec2 {
    if (flux) return (*flux)(x, q);
    return a_flux(spec, x, q);
  };
  const double alpha = spec.alpha(), beta = spec.beta(), p = spec.p;

  StructureReport rep;
  rep.samples = sample_count;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ubox(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto record = [](ConditionMargin& m, double margin, const Vec2& x, const Vec2& q,
                   bool ok) {
    if (margin < m.worst) {
      m.worst = margin;
      m.witness_x = x;
      m.witness_q = q;
    }
    if (!ok) m.pass = false;
  };

  for (int s = 0; s < sample_count; ++s) {
    const Vec2 x(ubox(rng), ubox(rng));
    const Vec2 q(gauss(rng), gauss(rng));
    const Vec2 q1(gauss(rng), gauss(rng));
    const Vec2 q2(gauss(rng), gauss(rng));
    double lambda = 0.0;
    while (lambda == 0.0) lambda = 2.0 * ubox(rng);

    const double w = spec.weight(x);
    const double scale = w * std::pow(q.norm(), p);

    if (scale > 1e-300) {
      const Vec2 Aq = A(x, q);
      const double coer = (Aq.dot(q) - alpha * scale) / scale;
      record(rep.coercivity, coer, x, q, coer >= -1e-10);
      const double bnd =
          (beta * w * std::pow(q.norm(), p - 1.0) - Aq.norm()) / (w * std::pow(q.norm(), p - 1.0));
      record(rep.boundedness, bnd, x, q, bnd >= -1e-10);

      // Homogeneity, relative to |A(q)|.
      const Vec2 Alq = A(x, lambda * q);
      const Vec2 expect = lambda * std::pow(std::abs(lambda), p - 2.0) * Aq;
      const double denom = std::max(expect.norm(), 1e-300);
      const double hom = 1e-10 - (Alq - expect).norm() / denom;
      record(rep.homogeneity, hom, x, q, (Alq - expect).norm() <= 1e-10 * denom);
    }

    if ((q1 - q2).norm() > 1e-12 && w > 1e-300) {
      const double mono = (A(x, q1) - A(x, q2)).dot(q1 - q2);
      record(rep.monotonicity, mono / w, x, q1, mono > 0.0);
    }
  }

  rep.pass = rep.coercivity.pass && rep.boundedness.pass && rep.monotonicity.pass &&
             rep.homogeneity.pass;
  if (!rep.pass) {
    auto name = [&]() -> std::string {
      if (!rep.coercivity.pass) return "coercivity";
      if (!rep.boundedness.pass) return "boundedness";
      if (!rep.monotonicity.pass) return "monotonicity";
      return "homogeneity";
    };
    const ConditionMargin& m = !rep.coercivity.pass    ? rep.coercivity
                               : !rep.boundedness.pass ? rep.boundedness
                               : !rep.monotonicity.pass ? rep.monotonicity
                                                        : rep.homogeneity;
    rep.failure = name() + " violated at x=(" + std::to_string(m.witness_x.x()) + "," +
                  std::to_string(m.witness_x.y()) + "), q=(" + std::to_string(m.witness_q.x()) +
                  "," + std::to_string(m.witness_q.y()) + ")";
  }
  return rep;
}

namespace {

// Midpoint-rule average of f over the disc B(center, radius), on a grid of
// (2n)^2 cells over the bounding square.
double ball_average(const std::function<double(const Vec2&)>& f, const Vec2& center,
                    double radius, int n) {
  const double cell = radius / n;
  double sum = 0.0;
  long count = 0;
  for (int j = -n; j < n; ++j)
    for (int i = -n; i < n; ++i) {
      const Vec2 x = center + cell * Vec2(i + 0.5, j + 0.5);
      if ((x - center).norm() <= radius) {
        sum += f(x);
        ++count;
      }
    }
  return sum / static_cast<double>(count);
}

}  // namespace

ApWeightReport check_ap_weight(const WeightSpec& weight, double p, int ball_sample_count,
                               std::uint64_t seed) {
  if (!(p > 1.0)) throw ConfigError("A_p check needs p > 1");
  weight.validate();  // rejects gamma <= -2

  auto wf = [&](const Vec2& x) { return weight(x); };
  auto wdual = [&](const Vec2& x) { return std::pow(weight(x), 1.0 / (1.0 - p)); };
  auto ratio = [&](const Vec2& c, double r, int n) {
    const double a = ball_average(wf, c, r, n);
    const double b = ball_average(wdual, c, r, n);
    return a * std::pow(b, p - 1.0);
  };

  ApWeightReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ubox(-1.0, 1.0);
  std::uniform_real_distribution<double> urad(0.05, 1.0);
  for (int s = 0; s < ball_sample_count; ++s) {
    const Vec2 c(ubox(rng), ubox(rng));
    rep.constant_estimate = std::max(rep.constant_estimate, ratio(c, urad(rng), 24));
  }

  // Power weights are homogeneous, so the ratio on B(0,r) is independent of
  // r; the sup over balls is infinite exactly when the dual factor fails to
  // converge under quadrature refinement.
  for (int level = 0; level < 4; ++level)
    rep.origin_trend.push_back(ratio(Vec2::Zero(), 1.0, 16 << level));
  rep.constant_estimate = std::max(rep.constant_estimate, rep.origin_trend.front());

  bool growing = true;
  for (size_t i = 1; i < rep.origin_trend.size(); ++i)
    growing = growing && rep.origin_trend[i] > rep.origin_trend[i - 1] * 1.02;
  rep.diverging = growing && rep.origin_trend.back() > 1.3 * rep.origin_trend.front();
  return rep;
}

nlohmann::json to_json(const WeightSpec& w) {
  nlohmann::json j;
  switch (w.kind) {
    case WeightSpec::Kind::Constant:
      j["kind"] = "constant";
      j["c"] = w.c;
      break;
    case WeightSpec::Kind::Power:
      j["kind"] = "power";
      j["gamma"] = w.gamma;
      break;
    case WeightSpec::Kind::Product:
      j["kind"] = "product";
      j["c"] = w.c;
      j["gamma"] = w.gamma;
      break;
  }
  return j;
}

WeightSpec weight_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  WeightSpec w;
  if (kind == "constant") {
    w = WeightSpec::constant(j.value("c", 1.0));
  } else if (kind == "power") {
    w = WeightSpec::power(j.at("gamma").get<double>());
  } else if (kind == "product") {
    w = WeightSpec::product(j.at("c").get<double>(), j.at("gamma").get<double>());
  } else {
    throw ConfigError("unknown weight kind: " + kind);
  }
  w.validate();
  return w;
}

nlohmann::json to_json(const OperatorSpec& s) {
  nlohmann::json j;
  j["p"] = s.p;
  j["weight"] = to_json(s.weight);
  if (!s.is_isotropic())
    j["anisotropy"] = {{s.anisotropy(0, 0), s.anisotropy(0, 1)},
                       {s.anisotropy(1, 0), s.anisotropy(1, 1)}};
  return j;
}

OperatorSpec operator_from_json(const nlohmann::json& j) {
  OperatorSpec s;
  s.p = j.at("p").get<double>();
  if (j.contains("weight")) s.weight = weight_from_json(j["weight"]);
  if (j.contains("anisotropy")) {
    const auto& m = j["anisotropy"];
    s.anisotropy << m[0][0].get<double>(), m[0][1].get<double>(), m[1][0].get<double>(),
        m[1][1].get<double>();
  }
  s.validate();
  return s;
}

}  // namespace perronlab
