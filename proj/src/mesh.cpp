#include "epd/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace epd {

void Geometry::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("geometry: width and height must be positive");
  }
  if (!(damaged_stripe_height >= 0.0) || damaged_stripe_height > fault_stripe_height ||
      !(fault_stripe_height < height)) {
    throw std::invalid_argument(
        "geometry: need 0 <= damaged_stripe_height <= fault_stripe_height < height");
  }
}

Mesh::Mesh(Eigen::Matrix2Xd nodes, Eigen::Matrix3Xi triangles, std::vector<int> plate_sign,
           std::vector<BoundaryEdge> neumann_edges, int level)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      plate_sign_(std::move(plate_sign)),
      neumann_edges_(std::move(neumann_edges)),
      level_(level) {
  if (static_cast<Index>(plate_sign_.size()) != nodes_.cols()) {
    throw std::invalid_argument("mesh: plate_sign size does not match node count");
  }
  for (Index e = 0; e < triangles_.cols(); ++e) {
    for (int a = 0; a < 3; ++a) {
      if (triangles_(a, e) < 0 || triangles_(a, e) >= nodes_.cols()) {
        throw std::invalid_argument("mesh: triangle references a missing node");
      }
    }
  }
  index_dofs();
}

void Mesh::index_dofs() {
  dirichlet_nodes_.clear();
  free_dofs_.clear();
  dirichlet_dofs_.clear();
  for (Index i = 0; i < nodes_.cols(); ++i) {
    if (plate_sign_[i] != 0) {
      dirichlet_nodes_.push_back(i);
      dirichlet_dofs_.push_back(2 * i);
      dirichlet_dofs_.push_back(2 * i + 1);
    } else {
      free_dofs_.push_back(2 * i);
      free_dofs_.push_back(2 * i + 1);
    }
  }
}

Eigen::Vector2d Mesh::centroid(Index e) const {
  return (nodes_.col(triangles_(0, e)) + nodes_.col(triangles_(1, e)) +
          nodes_.col(triangles_(2, e))) /
         3.0;
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (Index e = 0; e < num_elements(); ++e) sum += element_geometry(*this, e).area;
  return sum;
}

std::pair<Index, Index> grid_size(int level) {
  if (level < 0) throw std::invalid_argument("mesh: level must be non-negative");
  const Index scale = Index(1) << level;
  return {9 * scale, 8 * scale};
}

Mesh generate_mesh(const Geometry& geometry, int level) {
  geometry.validate();
  const auto [nx, ny] = grid_size(level);
  const double hx = geometry.width / double(nx);
  const double hy = geometry.height / double(ny);
  const Index grid_nodes = (nx + 1) * (ny + 1);

  Mesh mesh;
  mesh.level_ = level;
  mesh.nodes_.resize(2, grid_nodes + nx * ny);
  mesh.plate_sign_.assign(mesh.nodes_.cols(), 0);

  auto grid = [&](Index i, Index j) { return j * (nx + 1) + i; };
  auto centre = [&](Index i, Index j) { return grid_nodes + j * nx + i; };

  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      // exact end coordinates avoid drift from i*hx at the far edge
      const double x = i == nx ? geometry.width : double(i) * hx;
      const double y = j == ny ? geometry.height : double(j) * hy;
      mesh.nodes_.col(grid(i, j)) << x, y;
      if (j == 0) mesh.plate_sign_[grid(i, j)] = -1;
      if (j == ny) mesh.plate_sign_[grid(i, j)] = +1;
    }
  }
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      mesh.nodes_.col(centre(i, j)) =
          0.25 * (mesh.nodes_.col(grid(i, j)) + mesh.nodes_.col(grid(i + 1, j)) +
                  mesh.nodes_.col(grid(i, j + 1)) + mesh.nodes_.col(grid(i + 1, j + 1)));
    }
  }

  mesh.triangles_.resize(3, 4 * nx * ny);
  Index e = 0;
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const int v00 = int(grid(i, j));
      const int v10 = int(grid(i + 1, j));
      const int v11 = int(grid(i + 1, j + 1));
      const int v01 = int(grid(i, j + 1));
      const int c = int(centre(i, j));
      mesh.triangles_.col(e++) << v00, v10, c;
      mesh.triangles_.col(e++) << v10, v11, c;
      mesh.triangles_.col(e++) << v11, v01, c;
      mesh.triangles_.col(e++) << v01, v00, c;
    }
  }

  for (Index i = 0; i < nx; ++i) {
    mesh.dirichlet_edges_.push_back({{grid(i, 0), grid(i + 1, 0)}, BoundarySide::bottom});
    mesh.dirichlet_edges_.push_back({{grid(i + 1, ny), grid(i, ny)}, BoundarySide::top});
  }
  for (Index j = 0; j < ny; ++j) {
    mesh.neumann_edges_.push_back({{grid(0, j + 1), grid(0, j)}, BoundarySide::left});
    mesh.neumann_edges_.push_back({{grid(nx, j), grid(nx, j + 1)}, BoundarySide::right});
  }

  mesh.index_dofs();
  return mesh;
}

ElementGeometry element_geometry(const Mesh& mesh, Index element) {
  const auto v = mesh.element(element);
  const Eigen::Vector2d p0 = mesh.node(v[0]);
  const Eigen::Vector2d d1 = mesh.node(v[1]) - p0;
  const Eigen::Vector2d d2 = mesh.node(v[2]) - p0;
  const double det = d1.x() * d2.y() - d1.y() * d2.x();
  if (!(det > 0.0)) {
    throw std::runtime_error("mesh: degenerate or inverted element " + std::to_string(element));
  }
  ElementGeometry g;
  g.area = 0.5 * det;
  // rows of the inverse Jacobian give the gradients of vertices 1 and 2
  g.gradients.col(1) << d2.y() / det, -d2.x() / det;
  g.gradients.col(2) << -d1.y() / det, d1.x() / det;
  g.gradients.col(0) = -g.gradients.col(1) - g.gradients.col(2);
  return g;
}

NodalScalar initial_damage(const Mesh& mesh, const Geometry& geometry, double stripe_value) {
  NodalScalar zeta = NodalScalar::Ones(mesh.num_nodes());
  const double lo = 0.5 * (geometry.height - geometry.damaged_stripe_height);
  const double hi = 0.5 * (geometry.height + geometry.damaged_stripe_height);
  if (geometry.damaged_stripe_height <= 0.0) return zeta;
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    const double y = mesh.nodes()(1, i);
    if (y >= lo && y <= hi) zeta(i) = stripe_value;
  }
  return zeta;
}

}  // namespace epd
