#include <doctest.h>

#include "epd/plasticity.hpp"
#include "oracles.hpp"

#include <random>

using namespace epd;

namespace {

Sym2<double> sym(double a, double b, double c) {
  Sym2<double> t;
  t << a, c, c, b;
  return t;
}

MaterialModel<> unit_material() {
  MaterialModel<> m;
  m.lambda1 = m.lambda0 = 0.0;
  m.mu1 = m.mu0 = 1.0;
  m.sigma_y1 = m.sigma_y0 = 0.4;
  return m;
}

}  // namespace

TEST_CASE("return mapping by hand") {
  const MaterialModel<> m = unit_material();
  // |w| = 1, 2 mu |w| = 2 > 0.4: pi = (1 - 0.2) w, energy 0.4 - 0.04
  const auto r = local_plastic_update(m, sym(0.5, -0.5, 0.5), Sym2<double>::Zero().eval(), 1.0);
  CHECK(r.plastic);
  CHECK((r.pi - 0.8 * sym(0.5, -0.5, 0.5)).norm() < 1e-15);
  CHECK(r.energy == doctest::Approx(0.36));
  CHECK(dev(r.sigma).norm() == doctest::Approx(0.4));

  // inside the yield ball nothing moves
  const Sym2<double> prev = sym(0.1, -0.1, 0.0);
  const auto el = local_plastic_update(m, sym(0.15, -0.05, 0.05), prev, 1.0);
  CHECK_FALSE(el.plastic);
  CHECK(el.pi == prev);
  CHECK(el.energy == doctest::Approx(0.0025 * 2 + 0.0025 * 2 - 0.0));
}

TEST_CASE("return mapping against brute-force minimisation") {
  const MaterialModel<> m;
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> strain(-4e-4, 4e-4), z(0.0, 1.0), p(-2e-4, 2e-4);
  for (int k = 0; k < 100; ++k) {
    const Sym2<double> e = sym(strain(rng), strain(rng), strain(rng));
    const Sym2<double> prev = trace_free(p(rng), p(rng));
    const double zeta = z(rng);
    const auto r = local_plastic_update(m, e, prev, zeta);
    const auto [lambda, mu] = lame(m, zeta);
    const auto ref = oracle::brute_force_local(lambda, mu, yield_stress(m, zeta), e, prev);
    CHECK(r.energy == doctest::Approx(ref.energy).epsilon(1e-9));
    CHECK(r.energy <= ref.energy * (1 + 1e-12));
    CHECK(dev(r.sigma).norm() <= yield_stress(m, zeta) * (1 + 1e-12));
    CHECK(r.pi.trace() == 0.0);
  }
}

TEST_CASE("algorithmic tangent matches finite differences of the stress") {
  const MaterialModel<> m;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> strain(-3e-4, 3e-4), z(0.1, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Sym2<double> e = sym(strain(rng), strain(rng), strain(rng));
    const Sym2<double> prev = Sym2<double>::Zero();
    const double zeta = z(rng);
    const auto r = local_plastic_update(m, e, prev, zeta);
    for (int c = 0; c < 3; ++c) {
      Mandel<double> dp = to_mandel(e), dm = dp;
      const double h = 1e-10;
      dp(c) += h;
      dm(c) -= h;
      const Mandel<double> fd =
          (to_mandel(local_plastic_update(m, from_mandel(dp), prev, zeta).sigma) -
           to_mandel(local_plastic_update(m, from_mandel(dm), prev, zeta).sigma)) /
          (2 * h);
      const double floor = r.plastic ? kPlasticTangentFloor * 2 * lame(m, zeta).second : 0.0;
      CHECK((fd - r.tangent.col(c)).norm() <= 1e-5 * r.tangent.norm() + 2 * floor);
    }
  }
}

TEST_CASE("reduced energy gradient and convexity") {
  const Mesh mesh = generate_mesh(Geometry{}, 0);
  const MaterialModel<> mat;
  LoadProgram loads;
  loads.body_force = {5.0, -3.0};
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-2e-3, 2e-3), z(0.0, 1.0), p(-1e-5, 1e-5);
  NodalVector u(mesh.num_dofs());
  for (Index i = 0; i < u.size(); ++i) u(i) = d(rng);
  NodalScalar zeta(mesh.num_nodes());
  for (Index i = 0; i < zeta.size(); ++i) zeta(i) = z(rng);
  PlasticField pi(2, mesh.num_elements());
  for (Index e = 0; e < pi.cols(); ++e) pi.col(e) << p(rng), p(rng);

  const auto r = reduced_energy(mesh, mat, u, pi, zeta, loads, 0.0);
  for (Index dof : mesh.dirichlet_dofs()) CHECK(r.gradient(dof) == 0.0);
  for (Index dof : {Index(60), Index(61), Index(200), Index(301)}) {
    const double h = 1e-7;
    NodalVector up = u, um = u;
    up(dof) += h;
    um(dof) -= h;
    const double fd = (reduced_energy(mesh, mat, up, pi, zeta, loads, 0.0).value -
                       reduced_energy(mesh, mat, um, pi, zeta, loads, 0.0).value) /
                      (2 * h);
    CHECK(fd == doctest::Approx(r.gradient(dof)).epsilon(1e-5));
  }

  NodalVector v(mesh.num_dofs());
  for (Index i = 0; i < v.size(); ++i) v(i) = d(rng);
  auto f = [&](double s) {
    return reduced_energy(mesh, mat, u + s * v, pi, zeta, loads, 0.0).value;
  };
  for (double s = -2.0; s <= 2.0; s += 0.25) {
    CHECK(f(s - 0.25) + f(s + 0.25) - 2 * f(s) >= -1e-9 * std::abs(f(s)));
  }
}

TEST_CASE("elastic step equals an independent linear solve") {
  const Mesh mesh = oracle::small_plate_mesh(3, 2, 30.0, 20.0);
  MaterialModel<> mat;
  mat.sigma_y1 = mat.sigma_y0 = 1e12;  // never yields
  const NodalScalar zeta = NodalScalar::Constant(mesh.num_nodes(), 0.6);
  LoadProgram loads;
  loads.body_force = {0.0, -2e4};
  const double t = 5e4;

  // dense stiffness from first principles
  const auto [lambda, mu] = lame(mat, 0.6);
  const Index n = mesh.num_dofs();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::Matrix3d c;
  c << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;  // engineering shear
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto v = mesh.element(e);
    const Eigen::Vector2d p0 = mesh.node(v[0]), p1 = mesh.node(v[1]), p2 = mesh.node(v[2]);
    const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    const double b[3] = {p1.y() - p2.y(), p2.y() - p0.y(), p0.y() - p1.y()};
    const double g[3] = {p2.x() - p1.x(), p0.x() - p2.x(), p1.x() - p0.x()};
    Eigen::Matrix<double, 3, 6> bm = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
      bm(0, 2 * a) = b[a] / det;
      bm(1, 2 * a + 1) = g[a] / det;
      bm(2, 2 * a) = g[a] / det;
      bm(2, 2 * a + 1) = b[a] / det;
    }
    const Eigen::Matrix<double, 6, 6> ke = 0.5 * det * bm.transpose() * c * bm;
    for (int a = 0; a < 6; ++a) {
      f(2 * v[a / 2] + a % 2) += a % 2 ? 0.5 * det / 3.0 * -2e4 : 0.0;
      for (int q = 0; q < 6; ++q) k(2 * v[a / 2] + a % 2, 2 * v[q / 2] + q % 2) += ke(a, q);
    }
  }
  Eigen::VectorXd ud = Eigen::VectorXd::Zero(n);
  for (Index node : mesh.dirichlet_nodes()) ud(2 * node) = mesh.plate_sign(node) * 1e-8 * t;
  const auto& fr = mesh.free_dofs();
  const Index m = static_cast<Index>(fr.size());
  Eigen::MatrixXd kff(m, m);
  Eigen::VectorXd rhs(m);
  const Eigen::VectorXd kud = k * ud;
  for (Index a = 0; a < m; ++a) {
    rhs(a) = f(fr[a]) - kud(fr[a]);
    for (Index b = 0; b < m; ++b) kff(a, b) = k(fr[a], fr[b]);
  }
  const Eigen::VectorXd uf = kff.ldlt().solve(rhs);

  State prev = State::initial(mesh, zeta);
  const auto res = solve_elastoplastic_step(mesh, mat, prev, loads, t);
  for (Index a = 0; a < m; ++a) {
    CHECK(res.u(fr[a]) == doctest::Approx(uf(a)).epsilon(1e-8).scale(1e-6));
  }
  CHECK(res.pi.isZero(0.0));
  CHECK(res.iterations <= 2);
}

TEST_CASE("single cell under large shear reaches the yield stress") {
  const Mesh mesh = oracle::small_plate_mesh(1, 1, 10.0, 10.0);
  const MaterialModel<> mat;
  LoadProgram loads;
  loads.plate_velocity = 1e-3;  // shear 2e-4 s^-1, far past yield
  const NodalScalar zeta = NodalScalar::Ones(mesh.num_nodes());
  const auto res = solve_elastoplastic_step(mesh, mat, State::initial(mesh, zeta), loads, 10.0);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    Sym2<double> s;
    s << res.sigma(0, e), res.sigma(2, e), res.sigma(2, e), res.sigma(1, e);
    CHECK(dev(s).norm() == doctest::Approx(mat.sigma_y1).epsilon(1e-9));
    CHECK(plastic_norm(res.pi(0, e), res.pi(1, e)) > 0.0);
  }
  // the centroid node stays at the midline by symmetry
  CHECK(std::abs(res.u(2 * 4)) < 1e-12);
  CHECK(plastic_dissipation(mesh, mat, res.pi, PlasticField::Zero(2, 4), zeta) > 0.0);
}

TEST_CASE("Newton minimum matches brute-force descent on a small system") {
  // 2 x 1 cells: the two centroids are the only free nodes (4 dofs)
  const Mesh mesh = oracle::small_plate_mesh(2, 1, 20.0, 10.0);
  CHECK(mesh.free_dofs().size() == 4);
  MaterialModel<> mat;
  LoadProgram loads;
  loads.plate_velocity = 2e-8;
  loads.body_force = {1e3, -4e3};
  NodalScalar zeta(mesh.num_nodes());
  zeta << 1.0, 0.4, 0.9, 0.2, 1.0, 0.7, 0.5, 0.3;
  PlasticField pi_prev(2, mesh.num_elements());
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> p(-5e-5, 5e-5);
  for (Index e = 0; e < pi_prev.cols(); ++e) pi_prev.col(e) << p(rng), p(rng);
  const double t = 30e3;

  State prev = State::initial(mesh, zeta);
  prev.pi = pi_prev;
  const auto res = solve_elastoplastic_step(mesh, mat, prev, loads, t);

  // cyclic golden-section descent on the condensed energy
  NodalVector u = prev.u;
  loads.apply_dirichlet(mesh, t, u);
  auto energy = [&](const NodalVector& x) {
    return reduced_energy(mesh, mat, x, pi_prev, zeta, loads, t).value;
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double width = 1e-2;
  for (int sweep = 0; sweep < 400; ++sweep) {
    for (Index dof : mesh.free_dofs()) {
      double a = u(dof) - width, b = u(dof) + width;
      for (int it = 0; it < 80; ++it) {
        const double c = b - phi * (b - a), d = a + phi * (b - a);
        NodalVector uc = u, ud = u;
        uc(dof) = c;
        ud(dof) = d;
        (energy(uc) < energy(ud) ? b : a) = (energy(uc) < energy(ud) ? d : c);
      }
      u(dof) = 0.5 * (a + b);
    }
    width = std::max(width * 0.7, 1e-9);
  }
  const double e_ref = energy(u);
  CHECK(res.energy <= e_ref + 1e-10 * std::abs(e_ref));
  CHECK(res.energy == doctest::Approx(e_ref).epsilon(1e-10));
  for (Index dof : mesh.free_dofs()) {
    CHECK(res.u(dof) == doctest::Approx(u(dof)).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("solver reports non-convergence") {
  const Mesh mesh = oracle::small_plate_mesh(2, 1, 20.0, 10.0);
  PlasticTolerances tol;
  tol.max_iterations = 0;
  LoadProgram loads;
  loads.body_force = {0.0, -1e4};
  const State prev = State::initial(mesh, NodalScalar::Ones(mesh.num_nodes()));
  CHECK_THROWS_AS(solve_elastoplastic_step(mesh, MaterialModel<>{}, prev, loads, 1e3, tol),
                  SolverError);
}
