#pragma once

#include "epd/fem.hpp"
#include "epd/material.hpp"
#include "epd/mesh.hpp"

#include <optional>
#include <vector>

namespace epd {

/// Bound-constrained convex QP over the stacked update x = (z+, z-):
///   min 1/2 x^T H x + q^T x + constant,  lower <= x <= upper.
/// With zeta = zeta_prev + z+ - z- the objective equals the damage part of
/// the stored energy plus tau times the dissipation potential.
struct DamageQP {
  SparseMatrix hessian;
  Eigen::VectorXd linear;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double constant = 0.0;
  NodalScalar zeta_prev;

  Index num_nodes() const { return zeta_prev.size(); }
  double objective(const Eigen::VectorXd& x) const;
};

/// Mesh-dependent operators reused across steps.
struct DamageOperators {
  SparseMatrix stiffness;  ///< kappa-weighted P1 Laplacian
  NodalScalar mass;        ///< lumped nodal areas

  DamageOperators(const Mesh& mesh, double kappa);
};

DamageQP assemble_damage_qp(const Mesh& mesh, const MaterialModel<>& material,
                            const std::vector<Sym2<double>>& e_el, const NodalScalar& zeta_prev,
                            double tau, const DamageOperators& ops);

DamageQP assemble_damage_qp(const Mesh& mesh, const MaterialModel<>& material,
                            const std::vector<Sym2<double>>& e_el, const NodalScalar& zeta_prev,
                            double tau);

struct QPOptions {
  double tol_kkt = 1e-10;
  double tol_comp = 1e-12;
  /// Outer iteration cap; 0 means 10 * number of nodes.
  int max_iterations = 0;
};

struct DamageStepResult {
  NodalScalar zeta;
  NodalScalar z_plus;
  NodalScalar z_minus;
  /// Multiplier of the [0, 1] constraint: >= 0 where zeta = 1, <= 0 where
  /// zeta = 0, zero elsewhere.
  NodalScalar multipliers;
  double kkt_residual = 0.0;
  double objective = 0.0;
  int iterations = 0;
};

/// Norm of the projected gradient at x.
double projected_gradient_norm(const DamageQP& qp, const Eigen::VectorXd& x);

/// Gradient projection with conjugate gradients on the current face.
/// `start` is clamped into the box before use.
DamageStepResult solve_qp(const DamageQP& qp, const QPOptions& options = {},
                          const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// Replaces (z+, z-) by (z+ - min, z- - min) nodewise.
void reduce_complementarity(NodalScalar& z_plus, NodalScalar& z_minus);

DamageStepResult damage_step(const Mesh& mesh, const MaterialModel<>& material,
                             const std::vector<Sym2<double>>& e_el, const NodalScalar& zeta_prev,
                             double tau, const DamageOperators& ops, const QPOptions& options = {},
                             const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// sum_i m_i tau ahat((zeta_i - zeta_prev_i) / tau).
double damage_dissipation_increment(const MaterialModel<>& material, const NodalScalar& mass,
                                    const NodalScalar& zeta, const NodalScalar& zeta_prev,
                                    double tau);

}  // namespace epd
