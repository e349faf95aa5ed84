#include "energy_min.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace perronlab::detail {

EnergyModel::EnergyModel(const DomainMesh& m, const OperatorSpec& s, double mass)
    : mesh(&m), spec(s), mass_coeff(mass) {
  w.resize(m.triangle_count());
  const double guard = 1e-9 * m.domain.diameter();
  for (int t = 0; t < m.triangle_count(); ++t) {
    Vec2 b = m.barycenter[t];
    // Singular power weights are never evaluated at the origin; barycenters
    // avoid it for the meshes built here, with a small shift as a guard.
    if (s.weight.kind != WeightSpec::Kind::Constant && b.norm() < guard) b.x() += guard;
    w[t] = s.weight(b);
  }
}

double model_energy(const EnergyModel& em, const Vec& u) {
  const DomainMesh& mesh = *em.mesh;
  const Mat2& M = em.spec.anisotropy;
  const bool iso = em.spec.is_isotropic();
  const double p = em.spec.p;
  double e = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 g = element_gradient(mesh, u, t);
    const double q2 = iso ? g.squaredNorm() : g.dot(M * g);
    double val = std::pow(q2, p / 2.0);
    if (em.mass_coeff != 0.0) {
      const double ub =
          (u[mesh.triangles(t, 0)] + u[mesh.triangles(t, 1)] + u[mesh.triangles(t, 2)]) / 3.0;
      val += em.mass_coeff * std::pow(ub * ub, p / 2.0);
    }
    e += em.w[t] * val * mesh.area[t];
  }
  return e;
}

Vec model_gradient(const EnergyModel& em, const Vec& u) {
  const DomainMesh& mesh = *em.mesh;
  const Mat2& M = em.spec.anisotropy;
  const bool iso = em.spec.is_isotropic();
  const double p = em.spec.p;
  Vec grad = Vec::Zero(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 g = element_gradient(mesh, u, t);
    const Vec2 Mg = iso ? g : Vec2(M * g);
    const double q2 = g.dot(Mg);
    const double coef = em.w[t] * mesh.area[t];
    Vec2 dphi = Vec2::Zero();
    if (q2 > 0.0) dphi = p * std::pow(q2, (p - 2.0) / 2.0) * Mg;
    double dmass = 0.0;
    if (em.mass_coeff != 0.0) {
      const double ub =
          (u[mesh.triangles(t, 0)] + u[mesh.triangles(t, 1)] + u[mesh.triangles(t, 2)]) / 3.0;
      if (ub != 0.0)
        dmass = em.mass_coeff * p * std::pow(ub * ub, (p - 2.0) / 2.0) * ub / 3.0;
    }
    for (int e = 0; e < 3; ++e)
      grad[mesh.triangles(t, e)] += coef * (dphi.dot(mesh.hat_gradients[t].col(e)) + dmass);
  }
  return grad;
}

Vec model_residual(const EnergyModel& em, const Vec& u) {
  return model_gradient(em, u) / em.spec.p;
}

SpMat model_hessian(const EnergyModel& em, const Vec& u, double eps) {
  const DomainMesh& mesh = *em.mesh;
  const Mat2& M = em.spec.anisotropy;
  const bool iso = em.spec.is_isotropic();
  const double p = em.spec.p;
  const double eps2 = eps * eps;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 g = element_gradient(mesh, u, t);
    const Vec2 Mg = iso ? g : Vec2(M * g);
    const double s = g.dot(Mg) + eps2;
    // d2/dq2 of (q.Mq)^{p/2} with the regularized modulus.
    Mat2 D = p * std::pow(s, (p - 2.0) / 2.0) * (iso ? Mat2::Identity() : M);
    D += p * (p - 2.0) * std::pow(s, (p - 4.0) / 2.0) * (Mg * Mg.transpose());
    double dmass = 0.0;
    if (em.mass_coeff != 0.0) {
      const double ub =
          (u[mesh.triangles(t, 0)] + u[mesh.triangles(t, 1)] + u[mesh.triangles(t, 2)]) / 3.0;
      dmass = em.mass_coeff * p * (p - 1.0) * std::pow(ub * ub + eps2, (p - 2.0) / 2.0) / 9.0;
    }
    const double coef = em.w[t] * mesh.area[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double val =
            coef * (mesh.hat_gradients[t].col(a).dot(D * mesh.hat_gradients[t].col(b)) + dmass);
        trips.emplace_back(mesh.triangles(t, a), mesh.triangles(t, b), val);
      }
  }
  SpMat H(mesh.node_count(), mesh.node_count());
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

namespace {

double gradient_scale(const EnergyModel& em, const Vec& u) {
  const DomainMesh& mesh = *em.mesh;
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    s = std::max(s, element_gradient(mesh, u, t).norm());
  return s;
}

PinnedSolveResult newton_loop(const EnergyModel& em, const std::vector<char>& pinned_mask,
                              Vec u, const PinnedSolveOptions& opts) {
  const int nn = em.mesh->node_count();
  std::vector<int> free_ids;
  free_ids.reserve(nn);
  for (int i = 0; i < nn; ++i)
    if (!pinned_mask[i]) free_ids.push_back(i);
  std::vector<int> full_to_free(nn, -1);
  for (size_t k = 0; k < free_ids.size(); ++k) full_to_free[free_ids[k]] = static_cast<int>(k);
  const int nf = static_cast<int>(free_ids.size());

  PinnedSolveResult res;
  if (nf == 0) {
    res.u = u;
    res.converged = true;
    return res;
  }

  auto free_inf_norm = [&](const Vec& full) {
    double m = 0.0;
    for (int i : free_ids) m = std::max(m, std::abs(full[i]));
    return m;
  };

  double e_cur = model_energy(em, u);
  for (int it = 0; it <= opts.max_iter; ++it) {
    const Vec grad = model_gradient(em, u);
    const double rnorm = free_inf_norm(grad) / em.spec.p;
    res.history.push_back(rnorm);
    res.residual_norm = rnorm;
    res.iterations = it;
    if (rnorm <= opts.tol) {
      res.u = u;
      res.converged = true;
      return res;
    }
    if (it == opts.max_iter) break;

    const double eps = 1e-8 * (1.0 + gradient_scale(em, u));
    SpMat H = model_hessian(em, u, eps);

    // Reduce to free DOFs.
    Vec gf(nf);
    for (int k = 0; k < nf; ++k) gf[k] = grad[free_ids[k]];
    std::vector<Triplet> trips;
    trips.reserve(H.nonZeros());
    for (int col = 0; col < H.outerSize(); ++col)
      for (SpMat::InnerIterator jt(H, col); jt; ++jt) {
        const int r = full_to_free[static_cast<int>(jt.row())];
        const int c = full_to_free[col];
        if (r >= 0 && c >= 0) trips.emplace_back(r, c, jt.value());
      }
    SpMat Hf(nf, nf);
    Hf.setFromTriplets(trips.begin(), trips.end());

    // Newton direction, with escalating diagonal shifts if the
    // factorization reports trouble.
    Vec d;
    bool have_newton = false;
    double mu = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      SpMat Hs = Hf;
      if (mu > 0.0) {
        for (int k = 0; k < nf; ++k) Hs.coeffRef(k, k) += mu;
      }
      Eigen::SimplicialLDLT<SpMat> ldlt(Hs);
      if (ldlt.info() == Eigen::Success) {
        d = -ldlt.solve(gf);
        if (d.allFinite() && gf.dot(d) < 0.0) {
          have_newton = true;
          break;
        }
      }
      mu = (mu == 0.0) ? 1e-10 * (1.0 + Hf.coeffs().abs().maxCoeff()) : 10.0 * mu;
    }
    if (!have_newton) {
      // Preconditioned descent fallback (near-singular Hessian).
      d = Vec(nf);
      for (int k = 0; k < nf; ++k) {
        const double dk = std::max(Hf.coeff(k, k), 1e-12);
        d[k] = -gf[k] / dk;
      }
    }

    // Armijo backtracking.
    const double slope = gf.dot(d);
    double alpha = 1.0;
    bool accepted = false;
    Vec u_try = u;
    for (int ls = 0; ls < 60; ++ls) {
      for (int k = 0; k < nf; ++k) u_try[free_ids[k]] = u[free_ids[k]] + alpha * d[k];
      const double e_try = model_energy(em, u_try);
      if (e_try <= e_cur + 1e-4 * alpha * slope) {
        u = u_try;
        e_cur = e_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; report best iterate
  }

  res.u = u;
  res.converged = false;
  return res;
}

}  // namespace

PinnedSolveResult minimize_pinned(const EnergyModel& em, const std::vector<char>& pinned_mask,
                                  const Vec& u0, const PinnedSolveOptions& opts,
                                  bool p2_warm_start) {
  Vec u = u0;
  if (p2_warm_start && em.spec.p != 2.0) {
    EnergyModel em2(*em.mesh, em.spec, em.mass_coeff);
    em2.spec.p = 2.0;
    PinnedSolveOptions warm;
    warm.tol = 1e-10;
    warm.max_iter = 50;
    u = newton_loop(em2, pinned_mask, u, warm).u;
  }
  return newton_loop(em, pinned_mask, u, opts);
}

void projected_gauss_seidel_sweep(const EnergyModel& em, const std::vector<char>& pinned_mask,
                                  const Vec& lower, Vec& u) {
  const DomainMesh& mesh = *em.mesh;
  const double p = em.spec.p;
  const double inf = std::numeric_limits<double>::infinity();

  // Derivative of the local energy in the single unknown u_i.
  auto local_deriv = [&](int i, double s) {
    double uval = u[i];
    u[i] = s;
    double g = 0.0;
    for (int t : mesh.node_triangles[i]) {
      const Vec2 gr = element_gradient(mesh, u, t);
      const Vec2 Mg = em.spec.is_isotropic() ? gr : Vec2(em.spec.anisotropy * gr);
      const double q2 = gr.dot(Mg);
      int loc = 0;
      while (mesh.triangles(t, loc) != i) ++loc;
      if (q2 > 0.0)
        g += em.w[t] * mesh.area[t] * p * std::pow(q2, (p - 2.0) / 2.0) *
             Mg.dot(mesh.hat_gradients[t].col(loc));
      if (em.mass_coeff != 0.0) {
        const double ub =
            (u[mesh.triangles(t, 0)] + u[mesh.triangles(t, 1)] + u[mesh.triangles(t, 2)]) / 3.0;
        if (ub != 0.0)
          g += em.w[t] * mesh.area[t] * em.mass_coeff * p *
               std::pow(ub * ub, (p - 2.0) / 2.0) * ub / 3.0;
      }
    }
    u[i] = uval;
    return g;
  };

  for (int i = 0; i < mesh.node_count(); ++i) {
    if (pinned_mask[i]) continue;
    // Bracket the scalar minimizer; the derivative is increasing.
    double step = std::max(1.0, std::abs(u[i]));
    double lo = u[i], hi = u[i];
    double glo = local_deriv(i, lo);
    if (glo > 0.0) {
      for (int k = 0; k < 80 && local_deriv(i, lo) > 0.0; ++k) {
        lo -= step;
        step *= 2.0;
      }
    } else {
      for (int k = 0; k < 80 && local_deriv(i, hi) < 0.0; ++k) {
        hi += step;
        step *= 2.0;
      }
    }
    for (int k = 0; k < 70; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (local_deriv(i, mid) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    double s = 0.5 * (lo + hi);
    if (lower[i] > -inf) s = std::max(s, lower[i]);
    u[i] = s;
  }
}

}  // namespace perronlab::detail
