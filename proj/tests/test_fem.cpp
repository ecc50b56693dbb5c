#include <doctest.h>

#include "epd/fem.hpp"

#include <Eigen/LU>

#include <random>

using namespace epd;

namespace {

Mesh reference_triangle() {
  Eigen::Matrix2Xd nodes(2, 3);
  nodes << 0, 1, 0, 0, 0, 1;
  Eigen::Matrix3Xi tri(3, 1);
  tri << 0, 1, 2;
  return Mesh(nodes, tri, {0, 0, 0});
}

// u = A x + c at every node
NodalVector linear_field(const Mesh& mesh, const Eigen::Matrix2d& a, const Eigen::Vector2d& c) {
  NodalVector u(mesh.num_dofs());
  for (Index i = 0; i < mesh.num_nodes(); ++i) u.segment<2>(2 * i) = a * mesh.node(i) + c;
  return u;
}

// summed directly from the material law, no assembly code involved
double elastic_energy(const Mesh& mesh, const MaterialModel<>& m, const State& s) {
  double sum = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto v = mesh.element(e);
    Eigen::Matrix2d d, du;
    d << mesh.node(v[1]) - mesh.node(v[0]), mesh.node(v[2]) - mesh.node(v[0]);
    du << s.u.segment<2>(2 * v[1]) - s.u.segment<2>(2 * v[0]),
        s.u.segment<2>(2 * v[2]) - s.u.segment<2>(2 * v[0]);
    const Eigen::Matrix2d grad = du * d.inverse();
    Sym2<double> eps = 0.5 * (grad + grad.transpose());
    eps -= trace_free(s.pi(0, e), s.pi(1, e));
    const double z = (s.zeta(v[0]) + s.zeta(v[1]) + s.zeta(v[2])) / 3.0;
    sum += 0.5 * std::abs(d.determinant()) * elastic_energy_density(m, eps, z);
  }
  return sum;
}

}  // namespace

TEST_CASE("strain of a linear field is exact on every element") {
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  Eigen::Matrix2d a;
  a << 1e-4, 3e-5, -2e-5, -4e-5;
  const auto eps = total_strain(mesh, linear_field(mesh, a, {0.3, -0.1}));
  const Eigen::Matrix2d expected = 0.5 * (a + a.transpose());
  for (const auto& e : eps) CHECK((e - expected).norm() < 1e-12 * expected.norm());
}

TEST_CASE("strain operator uses Mandel shear") {
  const Mesh mesh = reference_triangle();
  const auto b = strain_operator(element_geometry(mesh, 0));
  // u = (y, 0): e12 = 1/2, Mandel component sqrt(2)/2
  Eigen::Matrix<double, 6, 1> ue;
  ue << 0, 0, 0, 0, 1, 0;
  const Mandel<double> m = b * ue;
  CHECK(m(0) == 0.0);
  CHECK(m(1) == 0.0);
  CHECK(m(2) == doctest::Approx(M_SQRT1_2));
}

TEST_CASE("damage stiffness") {
  SUBCASE("reference element") {
    const Mesh mesh = reference_triangle();
    const Eigen::MatrixXd k = Eigen::MatrixXd(damage_stiffness(mesh, 2.0));
    Eigen::Matrix3d expected;
    expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    CHECK((k - expected).norm() < 1e-14);  // kappa * area = 1
  }
  SUBCASE("constants in the kernel, linear fields exact") {
    const Mesh mesh = generate_mesh(Geometry{}, 1);
    const SparseMatrix k = damage_stiffness(mesh, 1e-3);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_nodes());
    CHECK((k * ones).lpNorm<Eigen::Infinity>() < 1e-15);
    Eigen::VectorXd phi = mesh.nodes().row(0).transpose() * 0.5 - mesh.nodes().row(1).transpose();
    // int kappa |(0.5, -1)|^2 = 1e-3 * 1.25 * 40000
    CHECK(phi.dot(k * phi) == doctest::Approx(50.0).epsilon(1e-10));
    CHECK((Eigen::MatrixXd(k) - Eigen::MatrixXd(k).transpose()).norm() < 1e-14 * k.norm());
  }
}

TEST_CASE("lumped mass") {
  CHECK((lumped_mass(reference_triangle()).array() - 1.0 / 6.0).abs().maxCoeff() < 1e-16);
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  const NodalScalar m = lumped_mass(mesh);
  CHECK(m.sum() == doctest::Approx(40000.0));
  CHECK(m.minCoeff() > 0.0);
  // a centroid node touches four triangles of a 44.44 x 12.5 cell
  CHECK(m(162 - 1) == doctest::Approx(400.0 / 9.0 * 12.5 / 3.0));
}

TEST_CASE("external forces integrate the loads") {
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  LoadProgram loads;
  loads.body_force = {2.0, -3.0};
  loads.traction = {0.5, 1.5};
  loads.traction_rate = {0.0, 1e-3};
  const NodalVector f = external_forces(mesh, loads, 1000.0);
  double fx = 0.0, fy = 0.0;
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    fx += f(2 * i);
    fy += f(2 * i + 1);
  }
  // body force over 40000 m^2, traction over 200 m of lateral boundary
  CHECK(fx == doctest::Approx(2.0 * 40000 + 0.5 * 200));
  CHECK(fy == doctest::Approx(-3.0 * 40000 + 2.5 * 200));
}

TEST_CASE("patch test: a linear displacement is in equilibrium at interior nodes") {
  const Mesh mesh = generate_mesh(Geometry{}, 1);
  const MaterialModel<> mat;
  Eigen::Matrix2d a;
  a << 2e-5, 7e-5, 1e-5, -3e-5;
  State s = State::initial(mesh, NodalScalar::Constant(mesh.num_nodes(), 0.7));
  s.u = linear_field(mesh, a, {0, 0});
  const StressField sigma = elastic_stress(mesh, mat, s);
  const NodalVector f = internal_forces(mesh, sigma);
  const double scale = sigma.cwiseAbs().maxCoeff() * 400.0 / 18.0;
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    const Eigen::Vector2d p = mesh.node(i);
    const bool boundary = p.x() == 0.0 || p.x() == 400.0 || p.y() == 0.0 || p.y() == 100.0;
    if (!boundary) CHECK(f.segment<2>(2 * i).norm() < 1e-12 * scale);
  }
  // uniform stress from the material law
  const Sym2<double> expected = stress(mat, Sym2<double>(0.5 * (a + a.transpose())), 0.7);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    CHECK(sigma(0, e) == doctest::Approx(expected(0, 0)));
    CHECK(sigma(2, e) == doctest::Approx(expected(0, 1)));
  }
}

TEST_CASE("internal forces are the energy gradient") {
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  const MaterialModel<> mat;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3), z(0.2, 1.0);
  State s = State::initial(mesh, NodalScalar::Zero(mesh.num_nodes()));
  for (Index i = 0; i < s.u.size(); ++i) s.u(i) = d(rng);
  for (Index i = 0; i < s.zeta.size(); ++i) s.zeta(i) = z(rng);
  for (Index e = 0; e < mesh.num_elements(); ++e) s.pi.col(e) << 1e-5 * d(rng), 1e-5 * d(rng);
  const NodalVector f = internal_forces(mesh, elastic_stress(mesh, mat, s));
  for (Index dof : {Index(0), Index(41), Index(100), Index(323)}) {
    const double h = 1e-7;
    State p = s, m = s;
    p.u(dof) += h;
    m.u(dof) -= h;
    const double fd = (elastic_energy(mesh, mat, p) - elastic_energy(mesh, mat, m)) / (2 * h);
    CHECK(fd == doctest::Approx(f(dof)).epsilon(1e-6));
  }
}

TEST_CASE("external work rate is the time derivative of the energy at frozen state") {
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  const MaterialModel<> mat;
  LoadProgram loads;
  loads.plate_velocity = 3e-8;
  loads.body_force = {1.0, -2.0};
  loads.body_force_rate = {1e-4, 2e-4};
  loads.traction = {0.0, 3.0};
  loads.traction_rate = {-5e-4, 1e-4};

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3);
  State s = State::initial(mesh, NodalScalar::Constant(mesh.num_nodes(), 0.8));
  for (Index i = 0; i < s.u.size(); ++i) s.u(i) = d(rng);

  auto energy_at = [&](double t) {
    State st = s;
    loads.apply_dirichlet(mesh, t, st.u);
    return elastic_energy(mesh, mat, st) - external_forces(mesh, loads, t).dot(st.u);
  };
  const double t = 2e4, h = 10.0;
  State at = s;
  loads.apply_dirichlet(mesh, t, at.u);
  const double fd = (energy_at(t + h) - energy_at(t - h)) / (2 * h);
  CHECK(external_work_rate(mesh, mat, at, loads, t) == doctest::Approx(fd).epsilon(1e-7));

  SUBCASE("zero velocity and constant loads give no work") {
    LoadProgram still;
    still.plate_velocity = 0.0;
    still.body_force = {1.0, 1.0};
    CHECK(external_work_rate(mesh, mat, at, still, t) == 0.0);
  }
}

TEST_CASE("uniform shear reaction") {
  const Geometry geo;
  const Mesh mesh = generate_mesh(geo, 0);
  const MaterialModel<> mat;
  LoadProgram loads;
  const double t = 1e5;
  // u_x = v t (2y/H - 1) matches both plates and is homogeneous inside
  const double gamma = 2 * loads.plate_velocity * t / geo.height;
  Eigen::Matrix2d a;
  a << 0, gamma, 0, 0;
  State s = State::initial(mesh, NodalScalar::Ones(mesh.num_nodes()));
  s.u = linear_field(mesh, a, {-loads.plate_velocity * t, 0.0});
  NodalVector check = s.u;
  loads.apply_dirichlet(mesh, t, check);
  CHECK((check - s.u).norm() < 1e-15);

  const double s12 = mat.mu1 * gamma;
  const NodalVector r = reaction_forces(mesh, mat, s, loads, t);
  double top = 0.0, bottom = 0.0;
  for (Index node : mesh.dirichlet_nodes()) (mesh.plate_sign(node) > 0 ? top : bottom) += r(2 * node);
  CHECK(top == doctest::Approx(s12 * geo.width));
  CHECK(bottom == doctest::Approx(-s12 * geo.width));
  CHECK(external_work_rate(mesh, mat, s, loads, t) ==
        doctest::Approx(2 * loads.plate_velocity * s12 * geo.width));
}

TEST_CASE("state initialisation") {
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  CHECK_THROWS(State::initial(mesh, NodalScalar::Ones(3)));
  const State s = State::initial(mesh, NodalScalar::Ones(mesh.num_nodes()));
  CHECK(s.u.size() == 324);
  CHECK(s.pi.cols() == 288);
}
