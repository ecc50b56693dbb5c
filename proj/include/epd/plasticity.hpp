#pragma once

#include "epd/fem.hpp"
#include "epd/material.hpp"
#include "epd/mesh.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace epd {

/// Relative stiffness kept along the flow direction of a yielding element
/// so that the Newton matrix stays positive definite when whole regions
/// reach the yield surface.
inline constexpr double kPlasticTangentFloor = 1e-8;

template <typename Scalar = double>
struct LocalPlasticResult {
  Sym2<Scalar> pi;
  Sym2<Scalar> sigma;
  /// dev sigma as computed, free of the roundoff of subtracting the pressure.
  Sym2<Scalar> sigma_dev;
  /// Value of the minimized local functional (energy density, J/m^3).
  Scalar energy;
  bool plastic;
  /// d sigma / d e in Mandel form (algorithmic tangent).
  MandelMatrix<Scalar> tangent;
};

/// Minimizes 1/2 C(zeta)(e - pi):(e - pi) + sigma_Y(zeta)|pi - pi_prev| over
/// trace-free pi. The minimizer shrinks the trial deviatoric strain onto the
/// yield ball.
template <typename Scalar>
LocalPlasticResult<Scalar> local_plastic_update(const MaterialModel<Scalar>& m,
                                                const Sym2<Scalar>& e_total,
                                                const Sym2<Scalar>& pi_prev, Scalar zeta) {
  using std::sqrt;
  const auto [lambda, mu] = lame(m, zeta);
  const Scalar sy = yield_stress(m, zeta);
  const Scalar tr = e_total.trace();
  const Sym2<Scalar> w = dev(e_total) - pi_prev;
  const Scalar wn = w.norm();

  LocalPlasticResult<Scalar> r;
  const Scalar bulk = lambda + mu;
  const Scalar volumetric = Scalar(0.5) * bulk * tr * tr;
  const Mandel<Scalar> one{Scalar(1), Scalar(1), Scalar(0)};
  const MandelMatrix<Scalar> pdev =
      MandelMatrix<Scalar>::Identity() - Scalar(0.5) * one * one.transpose();

  r.tangent = bulk * one * one.transpose();
  if (Scalar(2) * mu * wn <= sy) {
    r.plastic = false;
    r.pi = pi_prev;
    r.energy = volumetric + mu * wn * wn;
    r.tangent += Scalar(2) * mu * pdev;
  } else {
    r.plastic = true;
    const Scalar shrink = sy / (Scalar(2) * mu * wn);
    r.pi = pi_prev + (Scalar(1) - shrink) * w;
    r.energy = volumetric + sy * wn - sy * sy / (Scalar(4) * mu);
    const Mandel<Scalar> n = to_mandel<Scalar>(w) / wn;
    const MandelMatrix<Scalar> nn = n * n.transpose();
    r.tangent += (sy / wn) * (pdev - nn) + Scalar(kPlasticTangentFloor) * Scalar(2) * mu * nn;
  }
  // keep pi exactly trace-free: only (pi11, pi12) are meaningful
  r.pi(1, 1) = -r.pi(0, 0);
  r.pi(1, 0) = r.pi(0, 1);
  // on the plastic branch dev sigma = sigma_Y w/|w|; forming 2 mu (dev e - pi)
  // instead cancels catastrophically when sigma_Y is tiny
  r.sigma_dev = r.plastic ? Sym2<Scalar>((sy / wn) * w) : Sym2<Scalar>(Scalar(2) * mu * w);
  r.sigma = bulk * tr * Sym2<Scalar>::Identity() + r.sigma_dev;
  return r;
}

struct PlasticTolerances {
  double newton_rtol = 1e-9;
  /// Absolute floor on the free-gradient norm, N per unit thickness.
  double newton_atol = 1e-6;
  int max_iterations = 60;
  int max_backtracks = 50;
  double armijo = 1e-4;
};

struct ReducedEnergy {
  double value = 0.0;
  /// Gradient w.r.t. the nodal displacement; zero on Dirichlet dofs.
  NodalVector gradient;
};

/// Energy of the elastoplastic step with pi condensed out elementwise.
/// `u` carries the Dirichlet values at time t.
ReducedEnergy reduced_energy(const Mesh& mesh, const MaterialModel<>& material,
                             const NodalVector& u, const PlasticField& pi_prev,
                             const NodalScalar& zeta_prev, const LoadProgram& loads, double t);

struct PlasticStepResult {
  NodalVector u;
  PlasticField pi;
  StressField sigma;
  int iterations = 0;
  double residual_norm = 0.0;
  double energy = 0.0;
};

/// Minimizes the condensed energy in u by damped Newton with the algorithmic
/// tangent and Armijo backtracking, then recovers pi elementwise.
class ElastoplasticSolver {
 public:
  ElastoplasticSolver(const Mesh& mesh, const MaterialModel<>& material,
                      PlasticTolerances tol = {});

  /// `u_start` must already hold the Dirichlet values at time t.
  PlasticStepResult solve(const NodalVector& u_start, const PlasticField& pi_prev,
                          const NodalScalar& zeta_prev, const LoadProgram& loads, double t) const;

 private:
  const Mesh* mesh_;
  MaterialModel<> material_;
  PlasticTolerances tol_;
  std::vector<Index> free_index_;  // dof -> free position, -1 on Dirichlet dofs
};

/// One elastoplastic step from `prev`, warm-started at the previous
/// displacement with the Dirichlet data of time t.
PlasticStepResult solve_elastoplastic_step(const Mesh& mesh, const MaterialModel<>& material,
                                           const State& prev, const LoadProgram& loads, double t,
                                           const PlasticTolerances& tol = {});

/// Sum of area * sigma_Y(mean zeta_prev) * |pi - pi_prev|.
double plastic_dissipation(const Mesh& mesh, const MaterialModel<>& material,
                           const PlasticField& pi, const PlasticField& pi_prev,
                           const NodalScalar& zeta_prev);

/// Frobenius norm of the stored trace-free pair.
inline double plastic_norm(double p11, double p12) {
  return std::sqrt(2.0 * (p11 * p11 + p12 * p12));
}

}  // namespace epd
