#include "perronlab/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "energy_min.hpp"

namespace perronlab {

ClosedForm ClosedForm::affine(double a, double b, double c) {
  ClosedForm f;
  f.id = Id::Affine;
  f.a = a;
  f.b = b;
  f.c = c;
  return f;
}

ClosedForm ClosedForm::re_zk(int k) {
  ClosedForm f;
  f.id = Id::HarmonicPolyReZk;
  f.k = k;
  return f;
}

ClosedForm ClosedForm::poisson_kernel(double pole_angle) {
  ClosedForm f;
  f.id = Id::PoissonKernel;
  f.pole_angle = pole_angle;
  return f;
}

ClosedForm ClosedForm::radial_p(double c1, double c2, double p) {
  ClosedForm f;
  f.id = Id::RadialP;
  f.c1 = c1;
  f.c2 = c2;
  f.p = p;
  return f;
}

ClosedForm ClosedForm::log_radial(double c1, double c2) {
  ClosedForm f;
  f.id = Id::LogRadial;
  f.c1 = c1;
  f.c2 = c2;
  return f;
}

double eval_closed_form(const ClosedForm& form, const Vec2& x) {
  switch (form.id) {
    case ClosedForm::Id::Affine:
      return form.a * x.x() + form.b * x.y() + form.c;
    case ClosedForm::Id::HarmonicPolyReZk: {
      // Re (x + iy)^k by de Moivre.
      const double r = x.norm();
      const double th = std::atan2(x.y(), x.x());
      return std::pow(r, form.k) * std::cos(form.k * th);
    }
    case ClosedForm::Id::PoissonKernel: {
      const Vec2 pole(std::cos(form.pole_angle), std::sin(form.pole_angle));
      const double d2 = (pole - x).squaredNorm();
      if (d2 < 1e-28) throw ConfigError("Poisson kernel evaluated at its pole");
      return (1.0 - x.squaredNorm()) / d2;
    }
    case ClosedForm::Id::RadialP: {
      const double r = x.norm();
      if (r < 1e-14) throw ConfigError("radial form evaluated at the origin");
      if (form.p == 2.0) throw ConfigError("radial power form needs p != 2");
      return form.c1 * std::pow(r, (form.p - 2.0) / (form.p - 1.0)) + form.c2;
    }
    case ClosedForm::Id::LogRadial: {
      const double r = x.norm();
      if (r < 1e-14) throw ConfigError("log-radial form evaluated at the origin");
      return form.c1 * std::log(r) + form.c2;
    }
  }
  throw ConfigError("unknown closed form");
}

WosEstimate walk_on_spheres(const DomainDescriptor& domain,
                            const std::function<double(const Vec2&)>& f, const Vec2& x,
                            int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw ConfigError("walk on spheres needs n_samples >= 100");
  if (!(domain.boundary_distance(x) > 0.0) || !domain.contains(x))
    throw ConfigError("walk on spheres start point must be interior");
  const double shell = 1e-6;
  const double two_pi = 2.0 * std::acos(-1.0);

  double sum = 0.0, sum2 = 0.0;
  long total_steps = 0;
  for (int s = 0; s < n_samples; ++s) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::uniform_real_distribution<double> uang(0.0, two_pi);
    Vec2 y = x;
    int steps = 0;
    double d = domain.inradius_at(y);
    while (d > shell && steps < 100000) {
      const double a = uang(rng);
      y += d * Vec2(std::cos(a), std::sin(a));
      d = domain.inradius_at(y);
      ++steps;
    }
    const double v = f(domain.project_to_boundary(y));
    sum += v;
    sum2 += v * v;
    total_steps += steps;
  }

  WosEstimate est;
  est.samples = n_samples;
  est.estimate = sum / n_samples;
  const double var = std::max(0.0, (sum2 - sum * sum / n_samples) / (n_samples - 1));
  est.stderr_ = std::sqrt(var / n_samples);
  est.mean_steps = static_cast<double>(total_steps) / n_samples;
  return est;
}

Vec brute_force_obstacle(const DomainMesh& mesh, const OperatorSpec& spec,
                         const ObstacleSpec& ob) {
  if (spec.p != 2.0) throw ConfigError("brute-force obstacle oracle requires p = 2");
  const int nn = mesh.node_count();
  const int ni = static_cast<int>(mesh.interior_nodes.size());
  if (ni > 15) throw ConfigError("brute-force obstacle oracle capped at 15 interior nodes");

  const double inf = std::numeric_limits<double>::infinity();
  Vec lower = Vec::Constant(nn, -inf);
  for (int i = 0; i < nn; ++i)
    if (!ob.unconstrained[i] && std::isfinite(ob.psi[i])) lower[i] = ob.psi[i];
  for (int i : mesh.boundary_nodes)
    if (lower[i] > ob.boundary_values[i] + 1e-12)
      throw InfeasibleError("brute-force oracle: obstacle exceeds boundary data");

  // Quadratic energy u^T S u; S from the (constant) p=2 Hessian.
  detail::EnergyModel em(mesh, spec, 0.0);
  const SpMat H = detail::model_hessian(em, Vec::Zero(nn), 0.0);
  Eigen::MatrixXd S = Eigen::MatrixXd(H) / 2.0;

  Vec base = Vec::Zero(nn);
  for (int i : mesh.boundary_nodes) base[i] = ob.boundary_values[i];

  // Interior nodes carrying a constraint are the active-set candidates.
  std::vector<int> constrained;
  for (int i : mesh.interior_nodes)
    if (lower[i] > -inf) constrained.push_back(i);
  const int nc = static_cast<int>(constrained.size());

  double best_energy = inf;
  Vec best;
  double lower_scale = 0.0;
  for (int i : constrained) lower_scale = std::max(lower_scale, std::abs(lower[i]));
  const double tol = 1e-10 * (1.0 + base.cwiseAbs().maxCoeff() + lower_scale);

  for (long mask = 0; mask < (1L << nc); ++mask) {
    Vec u = base;
    std::vector<int> free_ids;
    std::vector<char> is_active(nn, 0);
    for (int c = 0; c < nc; ++c)
      if (mask & (1L << c)) {
        u[constrained[c]] = lower[constrained[c]];
        is_active[constrained[c]] = 1;
      }
    for (int i : mesh.interior_nodes)
      if (!is_active[i]) free_ids.push_back(i);

    const int nf = static_cast<int>(free_ids.size());
    if (nf > 0) {
      std::vector<char> is_free(nn, 0);
      for (int i : free_ids) is_free[i] = 1;
      Eigen::MatrixXd Sff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int r = 0; r < nf; ++r) {
        for (int c = 0; c < nf; ++c) Sff(r, c) = S(free_ids[r], free_ids[c]);
        double acc = 0.0;
        for (int i = 0; i < nn; ++i)
          if (!is_free[i]) acc += S(free_ids[r], i) * u[i];
        rhs[r] = -acc;
      }
      const Eigen::VectorXd uf = Sff.ldlt().solve(rhs);
      for (int r = 0; r < nf; ++r) u[free_ids[r]] = uf[r];
    }

    // KKT screen: feasibility and nonnegative multipliers.
    bool ok = true;
    for (int i : mesh.interior_nodes)
      if (lower[i] > -inf && u[i] < lower[i] - tol) ok = false;
    if (!ok) continue;
    const Vec grad = 2.0 * (S * u);
    for (int i : mesh.interior_nodes) {
      if (is_active[i]) {
        if (grad[i] < -tol) ok = false;
      } else if (std::abs(grad[i]) > 1e-7 * (1.0 + grad.cwiseAbs().maxCoeff())) {
        ok = false;
      }
    }
    if (!ok) continue;

    const double e = u.dot(S * u);
    if (e < best_energy) {
      best_energy = e;
      best = u;
    }
  }

  if (best.size() == 0)
    throw SolverError("brute-force obstacle oracle found no KKT-feasible active set", base, {});
  return best;
}

nlohmann::json to_json(const ClosedForm& form) {
  nlohmann::json j;
  switch (form.id) {
    case ClosedForm::Id::Affine:
      j["id"] = "affine";
      j["a"] = form.a;
      j["b"] = form.b;
      j["c"] = form.c;
      break;
    case ClosedForm::Id::HarmonicPolyReZk:
      j["id"] = "re-zk";
      j["k"] = form.k;
      break;
    case ClosedForm::Id::PoissonKernel:
      j["id"] = "poisson-kernel";
      j["pole_angle"] = form.pole_angle;
      break;
    case ClosedForm::Id::RadialP:
      j["id"] = "radial-p";
      j["c1"] = form.c1;
      j["c2"] = form.c2;
      j["p"] = form.p;
      break;
    case ClosedForm::Id::LogRadial:
      j["id"] = "log-radial";
      j["c1"] = form.c1;
      j["c2"] = form.c2;
      break;
  }
  return j;
}

ClosedForm closed_form_from_json(const nlohmann::json& j) {
  const std::string id = j.at("id").get<std::string>();
  if (id == "affine")
    return ClosedForm::affine(j.value("a", 0.0), j.value("b", 0.0), j.value("c", 0.0));
  if (id == "re-zk") return ClosedForm::re_zk(j.at("k").get<int>());
  if (id == "poisson-kernel") return ClosedForm::poisson_kernel(j.value("pole_angle", 0.0));
  if (id == "radial-p")
    return ClosedForm::radial_p(j.value("c1", 1.0), j.value("c2", 0.0), j.at("p").get<double>());
  if (id == "log-radial") return ClosedForm::log_radial(j.value("c1", 1.0), j.value("c2", 0.0));
  throw ConfigError("unknown closed form id: " + id);
}

}  // namespace perronlab
