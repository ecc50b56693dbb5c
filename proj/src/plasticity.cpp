#include "epd/plasticity.hpp"

#include "epd/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <sstream>

namespace epd {
namespace {

struct Evaluation {
  double value = 0.0;
  double magnitude = 0.0;  // sum of absolute contributions, for roundoff bounds
  NodalVector gradient;
  std::vector<LocalPlasticResult<double>> local;
  std::vector<ElementGeometry> geo;
};

Evaluation evaluate(const Mesh& mesh, const MaterialModel<>& material, const NodalVector& u,
                    const PlasticField& pi_prev, const NodalScalar& zeta_prev,
                    const NodalVector& f_ext) {
  Evaluation ev;
  const Index ne = mesh.num_elements();
  ev.local.resize(ne);
  ev.geo.resize(ne);
  parallel_for(ne, [&](Index begin, Index end) {
    for (Index e = begin; e < end; ++e) {
      ev.geo[e] = element_geometry(mesh, e);
      const Mandel<double> eps = strain_operator(ev.geo[e]) * gather(mesh, e, u);
      ev.local[e] = local_plastic_update(material, from_mandel(eps),
                                         trace_free(pi_prev(0, e), pi_prev(1, e)),
                                         element_mean(mesh, e, zeta_prev));
    }
  });

  ev.gradient = -f_ext;
  for (Index e = 0; e < ne; ++e) {
    const auto& geo = ev.geo[e];
    const double contrib = geo.area * ev.local[e].energy;
    ev.value += contrib;
    ev.magnitude += std::abs(contrib);
    const Eigen::Matrix<double, 6, 1> fe =
        geo.area * strain_operator(geo).transpose() * to_mandel(ev.local[e].sigma);
    const auto v = mesh.element(e);
    for (int a = 0; a < 3; ++a) ev.gradient.segment<2>(2 * v[a]) += fe.segment<2>(2 * a);
  }
  const double load = f_ext.dot(u);
  ev.value -= load;
  ev.magnitude += std::abs(load);
  for (Index dof : mesh.dirichlet_dofs()) ev.gradient(dof) = 0.0;
  return ev;
}

}  // namespace

ReducedEnergy reduced_energy(const Mesh& mesh, const MaterialModel<>& material,
                             const NodalVector& u, const PlasticField& pi_prev,
                             const NodalScalar& zeta_prev, const LoadProgram& loads, double t) {
  auto ev = evaluate(mesh, material, u, pi_prev, zeta_prev, external_forces(mesh, loads, t));
  return {ev.value, std::move(ev.gradient)};
}

ElastoplasticSolver::ElastoplasticSolver(const Mesh& mesh, const MaterialModel<>& material,
                                         PlasticTolerances tol)
    : mesh_(&mesh), material_(material), tol_(tol), free_index_(mesh.num_dofs(), -1) {
  Index k = 0;
  for (Index dof : mesh.free_dofs()) free_index_[dof] = k++;
}

PlasticStepResult ElastoplasticSolver::solve(const NodalVector& u_start,
                                             const PlasticField& pi_prev,
                                             const NodalScalar& zeta_prev,
                                             const LoadProgram& loads, double t) const {
  const Mesh& mesh = *mesh_;
  const auto& free = mesh.free_dofs();
  const Index nfree = static_cast<Index>(free.size());
  const NodalVector f_ext = external_forces(mesh, loads, t);

  NodalVector u = u_start;
  Evaluation ev = evaluate(mesh, material_, u, pi_prev, zeta_prev, f_ext);
  const double g0 = ev.gradient.norm();
  const double threshold = std::max(tol_.newton_rtol * g0, tol_.newton_atol);

  std::ostringstream trace;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> trip;
  int it = 0;
  for (; it <= tol_.max_iterations; ++it) {
    const double gnorm = ev.gradient.norm();
    trace << "  iter " << it << ": energy " << ev.value << ", |grad| " << gnorm << '\n';
    if (gnorm <= threshold) break;
    if (it == tol_.max_iterations) {
      throw SolverError("elastoplastic Newton did not converge in " +
                        std::to_string(tol_.max_iterations) + " iterations (|grad| " +
                        std::to_string(gnorm) + ", target " + std::to_string(threshold) + ")\n" +
                        trace.str());
    }

    trip.clear();
    trip.reserve(36 * mesh.num_elements());
    for (Index e = 0; e < mesh.num_elements(); ++e) {
      const StrainOperator b = strain_operator(ev.geo[e]);
      const ElementStiffness ke = ev.geo[e].area * b.transpose() * ev.local[e].tangent * b;
      const auto v = mesh.element(e);
      for (int a = 0; a < 6; ++a) {
        const Index ra = free_index_[2 * v[a / 2] + a % 2];
        if (ra < 0) continue;
        for (int c = 0; c < 6; ++c) {
          const Index rc = free_index_[2 * v[c / 2] + c % 2];
          if (rc >= 0) trip.emplace_back(ra, rc, ke(a, c));
        }
      }
    }
    SparseMatrix k(nfree, nfree);
    k.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      ldlt.analyzePattern(k);
      analyzed = true;
    }
    ldlt.factorize(k);
    if (ldlt.info() != Eigen::Success) {
      throw SolverError("elastoplastic tangent factorization failed at iteration " +
                        std::to_string(it) + "\n" + trace.str());
    }
    Eigen::VectorXd g(nfree);
    for (Index i = 0; i < nfree; ++i) g(i) = ev.gradient(free[i]);
    Eigen::VectorXd d = -ldlt.solve(g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < tol_.max_backtracks; ++bt, alpha *= 0.5) {
      NodalVector trial = u;
      for (Index i = 0; i < nfree; ++i) trial(free[i]) += alpha * d(i);
      Evaluation next = evaluate(mesh, material_, trial, pi_prev, zeta_prev, f_ext);
      const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() *
                              std::max(ev.magnitude, next.magnitude);
      const bool sufficient = next.value <= ev.value + tol_.armijo * alpha * slope;
      // near the minimum energy differences drown in roundoff; then accept a
      // step that does not raise the energy beyond it and shrinks the gradient
      const bool flat = next.value <= ev.value + roundoff &&
                        next.gradient.norm() < ev.gradient.norm();
      if (sufficient || flat) {
        u = std::move(trial);
        ev = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw SolverError("elastoplastic line search failed at iteration " + std::to_string(it) +
                        " (|grad| " + std::to_string(ev.gradient.norm()) + ")\n" + trace.str());
    }
  }

  PlasticStepResult out;
  out.u = std::move(u);
  out.pi.resize(2, mesh.num_elements());
  out.sigma.resize(3, mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& r = ev.local[e];
    out.pi.col(e) << r.pi(0, 0), r.pi(0, 1);
    out.sigma.col(e) << r.sigma(0, 0), r.sigma(1, 1), r.sigma(0, 1);
  }
  out.iterations = it;
  out.residual_norm = ev.gradient.norm();
  out.energy = ev.value;
  return out;
}

PlasticStepResult solve_elastoplastic_step(const Mesh& mesh, const MaterialModel<>& material,
                                           const State& prev, const LoadProgram& loads, double t,
                                           const PlasticTolerances& tol) {
  NodalVector u = prev.u;
  loads.apply_dirichlet(mesh, t, u);
  return ElastoplasticSolver(mesh, material, tol).solve(u, prev.pi, prev.zeta, loads, t);
}

double plastic_dissipation(const Mesh& mesh, const MaterialModel<>& material,
                           const PlasticField& pi, const PlasticField& pi_prev,
                           const NodalScalar& zeta_prev) {
  double sum = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector2d d = pi.col(e) - pi_prev.col(e);
    if (d.isZero(0.0)) continue;
    sum += element_geometry(mesh, e).area *
           yield_stress(material, element_mean(mesh, e, zeta_prev)) * plastic_norm(d(0), d(1));
  }
  return sum;
}

}  // namespace epd
