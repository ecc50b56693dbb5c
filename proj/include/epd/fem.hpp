#pragma once

#include "epd/material.hpp"
#include "epd/mesh.hpp"
#include "epd/types.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace epd {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Discrete state: total nodal displacement (Dirichlet values written in),
/// elementwise trace-free plastic strain, nodal damage.
struct State {
  NodalVector u;
  PlasticField pi;
  NodalScalar zeta;

  static State initial(const Mesh& mesh, NodalScalar zeta0);
};

/// Horizontal plate motion (+v on top, -v on bottom) plus body force and
/// Neumann traction, each affine in time.
struct LoadProgram {
  double plate_velocity = 1e-8;
  Eigen::Vector2d body_force = Eigen::Vector2d::Zero();
  Eigen::Vector2d body_force_rate = Eigen::Vector2d::Zero();
  Eigen::Vector2d traction = Eigen::Vector2d::Zero();
  Eigen::Vector2d traction_rate = Eigen::Vector2d::Zero();

  Eigen::Vector2d g(double t) const { return body_force + t * body_force_rate; }
  Eigen::Vector2d f(double t) const { return traction + t * traction_rate; }

  /// Velocity field that is nonzero only on Dirichlet dofs.
  NodalVector dirichlet_velocity(const Mesh& mesh) const;
  void apply_dirichlet(const Mesh& mesh, double t, NodalVector& u) const;
};

using ElementStiffness = Eigen::Matrix<double, 6, 6>;
using StrainOperator = Eigen::Matrix<double, 3, 6>;

/// Maps the six element dofs to Mandel strain.
StrainOperator strain_operator(const ElementGeometry& geo);

Eigen::Matrix<double, 6, 1> gather(const Mesh& mesh, Index element, const NodalVector& u);

double element_mean(const Mesh& mesh, Index element, const NodalScalar& field);

/// Element-constant small strain of a P1 displacement.
std::vector<Sym2<double>> total_strain(const Mesh& mesh, const NodalVector& u);

/// Elastic strain e(u) - pi per element.
std::vector<Sym2<double>> elastic_strain(const Mesh& mesh, const State& state);

/// Stress C(mean zeta)(e(u) - pi) per element, columns (s11, s22, s12).
StressField elastic_stress(const Mesh& mesh, const MaterialModel<>& material, const State& state);

/// sum_T area * B^T sigma.
NodalVector internal_forces(const Mesh& mesh, const StressField& sigma);

/// Consistent nodal loads of the body force and the Neumann traction at t.
NodalVector external_forces(const Mesh& mesh, const LoadProgram& loads, double t);

/// P1 Laplacian scaled by kappa: zeta^T K zeta = int kappa |grad zeta|^2.
SparseMatrix damage_stiffness(const Mesh& mesh, double kappa);

/// Row-sum lumped mass: area/3 per incident element.
NodalScalar lumped_mass(const Mesh& mesh);

/// Time derivative of the stored energy at frozen state: reaction forces
/// times the Dirichlet velocity minus the work rate of the load change.
double external_work_rate(const Mesh& mesh, const MaterialModel<>& material, const State& state,
                          const LoadProgram& loads, double t);

/// Reaction forces (internal minus external) restricted to Dirichlet dofs,
/// zero elsewhere.
NodalVector reaction_forces(const Mesh& mesh, const MaterialModel<>& material, const State& state,
                            const LoadProgram& loads, double t);

}  // namespace epd
