#pragma once

#include "epd/types.hpp"

#include <array>
#include <utility>
#include <vector>

namespace epd {

/// Rectangular domain [0, width] x [0, height] with two horizontal stripes
/// centred at mid-height.
struct Geometry {
  double width = 400.0;
  double height = 100.0;
  double damaged_stripe_height = 8.0;
  double fault_stripe_height = 20.0;

  void validate() const;
};

enum class BoundarySide { bottom, top, left, right };

struct BoundaryEdge {
  std::array<Index, 2> nodes;
  BoundarySide side;
};

/// Triangulation with Dirichlet/Neumann tags. Immutable once built.
class Mesh {
 public:
  Mesh() = default;

  /// Builds a mesh from raw arrays. `plate_sign` is +1/-1 for nodes on the
  /// moving top/bottom plates and 0 elsewhere; a nonzero entry marks the node
  /// as Dirichlet.
  Mesh(Eigen::Matrix2Xd nodes, Eigen::Matrix3Xi triangles, std::vector<int> plate_sign,
       std::vector<BoundaryEdge> neumann_edges = {}, int level = 0);

  Index num_nodes() const { return nodes_.cols(); }
  Index num_elements() const { return triangles_.cols(); }
  Index num_dofs() const { return 2 * nodes_.cols(); }

  const Eigen::Matrix2Xd& nodes() const { return nodes_; }
  const Eigen::Matrix3Xi& triangles() const { return triangles_; }
  Eigen::Vector2d node(Index i) const { return nodes_.col(i); }
  std::array<Index, 3> element(Index e) const {
    return {triangles_(0, e), triangles_(1, e), triangles_(2, e)};
  }

  const std::vector<Index>& dirichlet_nodes() const { return dirichlet_nodes_; }
  bool is_dirichlet(Index node) const { return plate_sign_[node] != 0; }
  int plate_sign(Index node) const { return plate_sign_[node]; }
  const std::vector<BoundaryEdge>& neumann_edges() const { return neumann_edges_; }
  const std::vector<BoundaryEdge>& dirichlet_edges() const { return dirichlet_edges_; }
  int level() const { return level_; }

  /// Free displacement dofs in increasing order.
  const std::vector<Index>& free_dofs() const { return free_dofs_; }
  const std::vector<Index>& dirichlet_dofs() const { return dirichlet_dofs_; }

  Eigen::Vector2d centroid(Index e) const;
  double total_area() const;

 private:
  friend Mesh generate_mesh(const Geometry&, int);

  void index_dofs();

  Eigen::Matrix2Xd nodes_;
  Eigen::Matrix3Xi triangles_;
  std::vector<int> plate_sign_;
  std::vector<Index> dirichlet_nodes_;
  std::vector<BoundaryEdge> neumann_edges_;
  std::vector<BoundaryEdge> dirichlet_edges_;
  std::vector<Index> free_dofs_;
  std::vector<Index> dirichlet_dofs_;
  int level_ = 0;
};

/// Grid dimensions of the criss-cross mesh at a refinement level.
std::pair<Index, Index> grid_size(int level);

/// Criss-cross triangulation: nx x ny rectangles, each split into four
/// triangles through an added centroid node. nx = 9*2^level, ny = 8*2^level.
/// Top/bottom edges (corners included) are Dirichlet, left/right Neumann.
Mesh generate_mesh(const Geometry& geometry, int level);

struct ElementGeometry {
  double area;
  /// Column a is the gradient of the barycentric basis function of vertex a.
  Eigen::Matrix<double, 2, 3> gradients;
};

/// Area and P1 basis gradients; throws on a degenerate or inverted element.
ElementGeometry element_geometry(const Mesh& mesh, Index element);

/// Initial damage: 0.5 inside the centred damaged stripe, 1 elsewhere.
NodalScalar initial_damage(const Mesh& mesh, const Geometry& geometry, double stripe_value = 0.5);

}  // namespace epd
