#include <doctest.h>

#include "epd/mesh.hpp"

#include <map>

using namespace epd;

TEST_CASE("criss-cross counts per level") {
  struct Expect {
    int level;
    Index elements, nodes;
  };
  // 4 triangles per rectangle; grid nodes plus one centroid per rectangle
  for (auto [level, ne, nn] : {Expect{0, 288, 162}, Expect{1, 1152, 611},
                               Expect{2, 4608, 2373}, Expect{3, 18432, 9353}}) {
    const Mesh m = generate_mesh(Geometry{}, level);
    CHECK(m.num_elements() == ne);
    CHECK(m.num_nodes() == nn);
    CHECK(m.num_dofs() == 2 * nn);
    CHECK(m.level() == level);
  }
}

TEST_CASE("areas are positive and sum to the domain") {
  const Geometry geo;
  const Mesh m = generate_mesh(geo, 1);
  for (Index e = 0; e < m.num_elements(); ++e) {
    const double expected = geo.width / 18.0 * geo.height / 16.0 / 4.0;
    CHECK(element_geometry(m, e).area == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(m.total_area() == doctest::Approx(40000.0).epsilon(1e-12));
}

TEST_CASE("boundary classification") {
  const Mesh m = generate_mesh(Geometry{}, 0);
  // 10 grid nodes per plate, corners on the plates
  CHECK(m.dirichlet_nodes().size() == 20);
  CHECK(m.dirichlet_dofs().size() == 40);
  CHECK(m.free_dofs().size() == std::size_t(2 * 162 - 40));
  int top = 0, bottom = 0;
  for (Index i = 0; i < m.num_nodes(); ++i) {
    const double y = m.nodes()(1, i);
    if (y == 100.0) {
      CHECK(m.plate_sign(i) == 1);
      ++top;
    } else if (y == 0.0) {
      CHECK(m.plate_sign(i) == -1);
      ++bottom;
    } else {
      CHECK_FALSE(m.is_dirichlet(i));
    }
  }
  CHECK(top == 10);
  CHECK(bottom == 10);
  CHECK(m.neumann_edges().size() == 16);
  CHECK(m.dirichlet_edges().size() == 18);
  double left = 0.0, right = 0.0;
  for (const auto& edge : m.neumann_edges()) {
    const double len = (m.node(edge.nodes[1]) - m.node(edge.nodes[0])).norm();
    const double x = m.node(edge.nodes[0]).x();
    CHECK(x == m.node(edge.nodes[1]).x());
    (edge.side == BoundarySide::left ? left : right) += len;
    CHECK(x == (edge.side == BoundarySide::left ? 0.0 : 400.0));
  }
  CHECK(left == doctest::Approx(100.0));
  CHECK(right == doctest::Approx(100.0));
}

TEST_CASE("every interior edge is shared by exactly two triangles") {
  const Mesh m = generate_mesh(Geometry{}, 0);
  std::map<std::pair<Index, Index>, int> count;
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto v = m.element(e);
    for (int a = 0; a < 3; ++a) {
      const Index p = v[a], q = v[(a + 1) % 3];
      ++count[{std::min(p, q), std::max(p, q)}];
    }
  }
  int boundary = 0;
  for (const auto& [edge, c] : count) {
    CHECK(c <= 2);
    if (c == 1) ++boundary;
  }
  CHECK(boundary == 2 * 9 + 2 * 8);
}

TEST_CASE("reference triangle gradients") {
  Eigen::Matrix2Xd nodes(2, 3);
  nodes << 0, 1, 0, 0, 0, 1;
  Eigen::Matrix3Xi tri(3, 1);
  tri << 0, 1, 2;
  const Mesh m(nodes, tri, {0, 0, 0});
  const auto g = element_geometry(m, 0);
  CHECK(g.area == doctest::Approx(0.5));
  Eigen::Matrix<double, 2, 3> expected;
  expected << -1, 1, 0, -1, 0, 1;
  CHECK((g.gradients - expected).norm() < 1e-15);
}

TEST_CASE("gradients are translation invariant and reproduce linear fields") {
  Eigen::Matrix2Xd nodes(2, 3);
  nodes << 0.3, 2.1, 0.7, -0.2, 0.4, 1.9;
  Eigen::Matrix3Xi tri(3, 1);
  tri << 0, 1, 2;
  const auto g0 = element_geometry(Mesh(nodes, tri, {0, 0, 0}), 0);
  Eigen::Matrix2Xd shifted = nodes.colwise() + Eigen::Vector2d(1e3, -5e2);
  const auto g1 = element_geometry(Mesh(shifted, tri, {0, 0, 0}), 0);
  CHECK(g1.area == doctest::Approx(g0.area).epsilon(1e-10));
  CHECK((g1.gradients - g0.gradients).norm() < 1e-9);

  // phi(x) = 3 x - 2 y + 1 has gradient (3, -2)
  Eigen::Vector3d values;
  for (int a = 0; a < 3; ++a) values(a) = 3 * nodes(0, a) - 2 * nodes(1, a) + 1;
  const Eigen::Vector2d grad = g0.gradients * values;
  CHECK(grad.x() == doctest::Approx(3.0));
  CHECK(grad.y() == doctest::Approx(-2.0));
}

TEST_CASE("inverted element is rejected") {
  Eigen::Matrix2Xd nodes(2, 3);
  nodes << 0, 0, 1, 0, 1, 0;
  Eigen::Matrix3Xi tri(3, 1);
  tri << 0, 1, 2;
  CHECK_THROWS(element_geometry(Mesh(nodes, tri, {0, 0, 0}), 0));
  CHECK_THROWS_AS(Mesh(nodes, tri, {0, 0}), std::invalid_argument);
}

TEST_CASE("initial damage stripe") {
  const Geometry geo;
  SUBCASE("level 0 catches only the mid row") {
    const Mesh m = generate_mesh(geo, 0);
    const NodalScalar z = initial_damage(m, geo);
    CHECK((z.array() == 0.5).count() == 10);
    CHECK((z.array() == 1.0).count() == 152);
  }
  SUBCASE("level 2: rows at y = 46.875 .. 53.125") {
    const Mesh m = generate_mesh(geo, 2);
    const NodalScalar z = initial_damage(m, geo);
    // three grid rows of 37 and two centroid rows of 36
    CHECK((z.array() == 0.5).count() == 3 * 37 + 2 * 36);
    for (Index i = 0; i < m.num_nodes(); ++i) {
      const double y = m.nodes()(1, i);
      CHECK(z(i) == (std::abs(y - 50.0) <= 4.0 ? 0.5 : 1.0));
    }
  }
  SUBCASE("empty stripe") {
    Geometry g = geo;
    g.damaged_stripe_height = 0.0;
    const Mesh m = generate_mesh(g, 0);
    CHECK(initial_damage(m, g).minCoeff() == 1.0);
  }
}

TEST_CASE("invalid geometry") {
  Geometry g;
  g.fault_stripe_height = 4.0;
  CHECK_THROWS_AS(generate_mesh(g, 0), std::invalid_argument);
  CHECK_THROWS_AS(grid_size(-1), std::invalid_argument);
}
