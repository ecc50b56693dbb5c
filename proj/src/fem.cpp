#include "epd/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace epd {

State State::initial(const Mesh& mesh, NodalScalar zeta0) {
  if (zeta0.size() != mesh.num_nodes()) {
    throw std::invalid_argument("state: damage field size does not match node count");
  }
  State s;
  s.u = NodalVector::Zero(mesh.num_dofs());
  s.pi = PlasticField::Zero(2, mesh.num_elements());
  s.zeta = std::move(zeta0);
  return s;
}

NodalVector LoadProgram::dirichlet_velocity(const Mesh& mesh) const {
  NodalVector v = NodalVector::Zero(mesh.num_dofs());
  for (Index node : mesh.dirichlet_nodes()) v(2 * node) = mesh.plate_sign(node) * plate_velocity;
  return v;
}

void LoadProgram::apply_dirichlet(const Mesh& mesh, double t, NodalVector& u) const {
  for (Index node : mesh.dirichlet_nodes()) {
    u(2 * node) = mesh.plate_sign(node) * plate_velocity * t;
    u(2 * node + 1) = 0.0;
  }
}

StrainOperator strain_operator(const ElementGeometry& geo) {
  StrainOperator b = StrainOperator::Zero();
  for (int a = 0; a < 3; ++a) {
    const double gx = geo.gradients(0, a);
    const double gy = geo.gradients(1, a);
    b(0, 2 * a) = gx;
    b(1, 2 * a + 1) = gy;
    b(2, 2 * a) = gy * M_SQRT1_2;
    b(2, 2 * a + 1) = gx * M_SQRT1_2;
  }
  return b;
}

Eigen::Matrix<double, 6, 1> gather(const Mesh& mesh, Index element, const NodalVector& u) {
  Eigen::Matrix<double, 6, 1> ue;
  const auto v = mesh.element(element);
  for (int a = 0; a < 3; ++a) ue.segment<2>(2 * a) = u.segment<2>(2 * v[a]);
  return ue;
}

double element_mean(const Mesh& mesh, Index element, const NodalScalar& field) {
  const auto v = mesh.element(element);
  return (field(v[0]) + field(v[1]) + field(v[2])) / 3.0;
}

std::vector<Sym2<double>> total_strain(const Mesh& mesh, const NodalVector& u) {
  std::vector<Sym2<double>> eps(mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Mandel<double> m = strain_operator(element_geometry(mesh, e)) * gather(mesh, e, u);
    eps[e] = from_mandel(m);
  }
  return eps;
}

std::vector<Sym2<double>> elastic_strain(const Mesh& mesh, const State& state) {
  auto eps = total_strain(mesh, state.u);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    eps[e] -= trace_free(state.pi(0, e), state.pi(1, e));
  }
  return eps;
}

StressField elastic_stress(const Mesh& mesh, const MaterialModel<>& material, const State& state) {
  const auto eel = elastic_strain(mesh, state);
  StressField sigma(3, mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Sym2<double> s = stress(material, eel[e], element_mean(mesh, e, state.zeta));
    sigma.col(e) << s(0, 0), s(1, 1), s(0, 1);
  }
  return sigma;
}

NodalVector internal_forces(const Mesh& mesh, const StressField& sigma) {
  NodalVector f = NodalVector::Zero(mesh.num_dofs());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto geo = element_geometry(mesh, e);
    const Mandel<double> s{sigma(0, e), sigma(1, e), M_SQRT2 * sigma(2, e)};
    const Eigen::Matrix<double, 6, 1> fe = geo.area * strain_operator(geo).transpose() * s;
    const auto v = mesh.element(e);
    for (int a = 0; a < 3; ++a) f.segment<2>(2 * v[a]) += fe.segment<2>(2 * a);
  }
  return f;
}

NodalVector external_forces(const Mesh& mesh, const LoadProgram& loads, double t) {
  NodalVector f = NodalVector::Zero(mesh.num_dofs());
  const Eigen::Vector2d g = loads.g(t);
  if (!g.isZero(0.0)) {
    for (Index e = 0; e < mesh.num_elements(); ++e) {
      const double w = element_geometry(mesh, e).area / 3.0;
      for (Index node : mesh.element(e)) f.segment<2>(2 * node) += w * g;
    }
  }
  const Eigen::Vector2d traction = loads.f(t);
  if (!traction.isZero(0.0)) {
    for (const auto& edge : mesh.neumann_edges()) {
      const double len = (mesh.node(edge.nodes[1]) - mesh.node(edge.nodes[0])).norm();
      for (Index node : edge.nodes) f.segment<2>(2 * node) += 0.5 * len * traction;
    }
  }
  return f;
}

SparseMatrix damage_stiffness(const Mesh& mesh, double kappa) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto geo = element_geometry(mesh, e);
    const Eigen::Matrix3d ke = kappa * geo.area * geo.gradients.transpose() * geo.gradients;
    const auto v = mesh.element(e);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(v[a], v[b], ke(a, b));
  }
  SparseMatrix k(mesh.num_nodes(), mesh.num_nodes());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

NodalScalar lumped_mass(const Mesh& mesh) {
  NodalScalar m = NodalScalar::Zero(mesh.num_nodes());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const double w = element_geometry(mesh, e).area / 3.0;
    for (Index node : mesh.element(e)) m(node) += w;
  }
  return m;
}

NodalVector reaction_forces(const Mesh& mesh, const MaterialModel<>& material, const State& state,
                            const LoadProgram& loads, double t) {
  const NodalVector r = internal_forces(mesh, elastic_stress(mesh, material, state)) -
                        external_forces(mesh, loads, t);
  NodalVector out = NodalVector::Zero(mesh.num_dofs());
  for (Index dof : mesh.dirichlet_dofs()) out(dof) = r(dof);
  return out;
}

double external_work_rate(const Mesh& mesh, const MaterialModel<>& material, const State& state,
                          const LoadProgram& loads, double t) {
  double rate = reaction_forces(mesh, material, state, loads, t).dot(loads.dirichlet_velocity(mesh));
  LoadProgram rates;
  rates.plate_velocity = 0.0;
  rates.body_force = loads.body_force_rate;
  rates.traction = loads.traction_rate;
  if (!rates.body_force.isZero(0.0) || !rates.traction.isZero(0.0)) {
    rate -= external_forces(mesh, rates, 0.0).dot(state.u);
  }
  return rate;
}

}  // namespace epd
