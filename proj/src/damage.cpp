#include "epd/damage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace epd {

double DamageQP::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
}

DamageOperators::DamageOperators(const Mesh& mesh, double kappa)
    : stiffness(damage_stiffness(mesh, kappa)), mass(lumped_mass(mesh)) {}

DamageQP assemble_damage_qp(const Mesh& mesh, const MaterialModel<>& material,
                            const std::vector<Sym2<double>>& e_el, const NodalScalar& zeta_prev,
                            double tau, const DamageOperators& ops) {
  if (!(tau > 0.0)) throw std::invalid_argument("damage: time step must be positive");
  const Index n = mesh.num_nodes();
  if (zeta_prev.size() != n || static_cast<Index>(e_el.size()) != mesh.num_elements()) {
    throw std::invalid_argument("damage: field sizes do not match the mesh");
  }

  DamageQP qp;
  qp.zeta_prev = zeta_prev;

  // the elastic energy is affine in zeta, so its nodal slope is exact
  NodalScalar drive = NodalScalar::Zero(n);
  double elastic = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const double area = element_geometry(mesh, e).area;
    const double slope = elastic_energy_sensitivity(material, e_el[e]);
    for (Index node : mesh.element(e)) drive(node) += area / 3.0 * slope;
    elastic += area * elastic_energy_density(material, e_el[e], element_mean(mesh, e, zeta_prev));
  }
  const NodalScalar k_zeta = ops.stiffness * zeta_prev;
  const NodalScalar grad_zeta = drive - material.b1 * ops.mass + k_zeta;

  qp.linear.resize(2 * n);
  qp.linear.head(n) = grad_zeta;
  qp.linear.tail(n) = -grad_zeta + material.a3 * ops.mass;
  qp.constant = elastic - material.b1 * ops.mass.dot(zeta_prev) + 0.5 * zeta_prev.dot(k_zeta);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * ops.stiffness.nonZeros() + 2 * n);
  for (Index col = 0; col < ops.stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(ops.stiffness, col); it; ++it) {
      const Index r = it.row(), c = it.col();
      trip.emplace_back(r, c, it.value());
      trip.emplace_back(n + r, n + c, it.value());
      trip.emplace_back(r, n + c, -it.value());
      trip.emplace_back(n + r, c, -it.value());
    }
  }
  for (Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, material.a1 / tau * ops.mass(i));
    trip.emplace_back(n + i, n + i, material.a2 / tau * ops.mass(i));
  }
  qp.hessian.resize(2 * n, 2 * n);
  qp.hessian.setFromTriplets(trip.begin(), trip.end());

  qp.lower = Eigen::VectorXd::Zero(2 * n);
  qp.upper.resize(2 * n);
  qp.upper.head(n) = (1.0 - zeta_prev.array()).max(0.0);
  qp.upper.tail(n) = zeta_prev.array().max(0.0);
  return qp;
}

DamageQP assemble_damage_qp(const Mesh& mesh, const MaterialModel<>& material,
                            const std::vector<Sym2<double>>& e_el, const NodalScalar& zeta_prev,
                            double tau) {
  return assemble_damage_qp(mesh, material, e_el, zeta_prev, tau,
                            DamageOperators(mesh, material.kappa));
}

namespace {

Eigen::VectorXd projected_gradient(const DamageQP& qp, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& g) {
  Eigen::VectorXd pg = g;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) <= qp.lower(i)) pg(i) = std::min(g(i), 0.0);
    if (x(i) >= qp.upper(i)) pg(i) = std::max(pg(i), 0.0);
  }
  return pg;
}

Eigen::VectorXd project(const DamageQP& qp, const Eigen::VectorXd& x) {
  return x.cwiseMax(qp.lower).cwiseMin(qp.upper);
}

// free = strictly inside the box
std::vector<char> face_of(const DamageQP& qp, const Eigen::VectorXd& x) {
  std::vector<char> free(x.size());
  for (Index i = 0; i < x.size(); ++i) free[i] = x(i) > qp.lower(i) && x(i) < qp.upper(i);
  return free;
}

double quadratic(const DamageQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& hx) {
  return 0.5 * x.dot(hx) + qp.linear.dot(x);
}

}  // namespace

double projected_gradient_norm(const DamageQP& qp, const Eigen::VectorXd& x) {
  return projected_gradient(qp, x, qp.hessian * x + qp.linear).norm();
}

void reduce_complementarity(NodalScalar& z_plus, NodalScalar& z_minus) {
  for (Index i = 0; i < z_plus.size(); ++i) {
    const double m = std::min(z_plus(i), z_minus(i));
    if (m > 0.0) {
      z_plus(i) -= m;
      z_minus(i) -= m;
    }
  }
}

DamageStepResult solve_qp(const DamageQP& qp, const QPOptions& options,
                          const std::optional<Eigen::VectorXd>& start) {
  const Index n = qp.num_nodes();
  const Index dim = 2 * n;
  if (qp.hessian.rows() != dim || qp.linear.size() != dim) {
    throw std::invalid_argument("damage QP: inconsistent sizes");
  }
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : int(10 * n) + 10;
  const double target = options.tol_kkt * (1.0 + qp.linear.norm());
  constexpr double kArmijo = 1e-4;

  Eigen::VectorXd x = start ? project(qp, *start) : Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd hx = qp.hessian * x;
  Eigen::VectorXd g = hx + qp.linear;
  double fx = quadratic(qp, x, hx);

  auto accept = [&](Eigen::VectorXd xn) {
    x = std::move(xn);
    hx = qp.hessian * x;
    g = hx + qp.linear;
    fx = quadratic(qp, x, hx);
  };

  // projected backtracking along x + alpha d
  auto projected_search = [&](const Eigen::VectorXd& d, double alpha) {
    for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
      Eigen::VectorXd xn = project(qp, x + alpha * d);
      const Eigen::VectorXd hxn = qp.hessian * xn;
      const double fn = quadratic(qp, xn, hxn);
      if (fn <= fx + kArmijo * g.dot(xn - x)) {
        x = std::move(xn);
        hx = hxn;
        g = hx + qp.linear;
        fx = fn;
        return true;
      }
    }
    return false;
  };

  int it = 0;
  double pg_norm = projected_gradient(qp, x, g).norm();
  for (; it < max_iter && pg_norm > target; ++it) {
    // gradient projection until the face settles
    for (int gp = 0; gp < 8; ++gp) {
      const Eigen::VectorXd pg = projected_gradient(qp, x, g);
      const double gHg = pg.dot(qp.hessian * pg);
      const double alpha = gHg > 0.0 ? pg.squaredNorm() / gHg : 1.0;
      const auto before = face_of(qp, x);
      if (!projected_search(-g, alpha)) break;
      if (face_of(qp, x) == before) break;
    }

    // conjugate gradients on the free variables of the current face
    const auto free = face_of(qp, x);
    Eigen::VectorXd r = -g;
    for (Index i = 0; i < dim; ++i)
      if (!free[i]) r(i) = 0.0;
    const double r0 = r.norm();
    if (r0 > 0.0) {
      Eigen::VectorXd p = r, step = Eigen::VectorXd::Zero(dim);
      double rr = r.squaredNorm();
      for (Index k = 0; k < dim && std::sqrt(rr) > 1e-3 * std::min(r0, target); ++k) {
        Eigen::VectorXd hp = qp.hessian * p;
        for (Index i = 0; i < dim; ++i)
          if (!free[i]) hp(i) = 0.0;
        const double php = p.dot(hp);
        if (!(php > 0.0)) break;
        const double a = rr / php;
        step += a * p;
        r -= a * hp;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
      }
      projected_search(step, 1.0);
    }
    pg_norm = projected_gradient(qp, x, g).norm();
  }
  if (pg_norm > target) {
    throw SolverError("damage QP did not converge in " + std::to_string(max_iter) +
                      " iterations (projected gradient " + std::to_string(pg_norm) +
                      ", target " + std::to_string(target) + ")");
  }
  accept(x);

  DamageStepResult res;
  res.z_plus = x.head(n);
  res.z_minus = x.tail(n);
  reduce_complementarity(res.z_plus, res.z_minus);
  Eigen::VectorXd reduced(dim);
  reduced << res.z_plus, res.z_minus;

  res.zeta.resize(n);
  res.multipliers = NodalScalar::Zero(n);
  const Eigen::VectorXd gr = qp.hessian * reduced + qp.linear;
  for (Index i = 0; i < n; ++i) {
    const double zp = qp.zeta_prev(i);
    if (res.z_plus(i) > 0.0 && res.z_plus(i) >= qp.upper(i)) {
      res.zeta(i) = 1.0;
    } else if (res.z_minus(i) > 0.0 && res.z_minus(i) >= qp.upper(n + i)) {
      res.zeta(i) = 0.0;
    } else {
      res.zeta(i) = std::clamp(zp + res.z_plus(i) - res.z_minus(i), 0.0, 1.0);
    }
    if (res.zeta(i) == 1.0) res.multipliers(i) = std::max(-gr(i), 0.0);
    if (res.zeta(i) == 0.0) res.multipliers(i) = std::min(gr(n + i), 0.0);
  }
  res.kkt_residual = projected_gradient(qp, reduced, gr).norm();
  res.objective = qp.objective(reduced);
  res.iterations = it;
  if ((res.z_plus.array() * res.z_minus.array()).maxCoeff() > options.tol_comp) {
    throw SolverError("damage QP: complementarity violated after reduction");
  }
  return res;
}

DamageStepResult damage_step(const Mesh& mesh, const MaterialModel<>& material,
                             const std::vector<Sym2<double>>& e_el, const NodalScalar& zeta_prev,
                             double tau, const DamageOperators& ops, const QPOptions& options,
                             const std::optional<Eigen::VectorXd>& start) {
  return solve_qp(assemble_damage_qp(mesh, material, e_el, zeta_prev, tau, ops), options, start);
}

double damage_dissipation_increment(const MaterialModel<>& material, const NodalScalar& mass,
                                    const NodalScalar& zeta, const NodalScalar& zeta_prev,
                                    double tau) {
  double sum = 0.0;
  for (Index i = 0; i < mass.size(); ++i) {
    const double rate = (zeta(i) - zeta_prev(i)) / tau;
    if (rate != 0.0) sum += mass(i) * tau * dissipation_rate_hat(material, rate);
  }
  return sum;
}

}  // namespace epd
