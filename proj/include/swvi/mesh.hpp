#pragma once

#include "swvi/types.hpp"

#include <filesystem>
#include <optional>

namespace swvi {

using NodeArray = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using TriangleArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Linear triangle mesh in 2D. Node and element ids are 0-based row indices.
struct Mesh {
  NodeArray nodes;
  TriangleArray elements;

  Index num_nodes() const { return nodes.rows(); }
  Index num_elements() const { return elements.rows(); }

  Eigen::Vector2d centroid(Index e) const;
  double area(Index e) const;
  NodeArray centroids() const;
};

struct CircularHole {
  double cx = 0.5;
  double cy = 0.5;
  double radius = 0.2;
};

/// Unit square split into nx*ny cells, two triangles per cell. Elements whose
/// centroid falls inside `hole` are removed together with orphaned nodes.
Mesh structured_unit_square(int nx, int ny, std::optional<CircularHole> hole = std::nullopt);

// "<stem>.node" holds "id x y" lines, "<stem>.ele" holds "id n1 n2 n3" lines.
void write_mesh(const Mesh& mesh, const std::filesystem::path& stem);
Mesh read_mesh(const std::filesystem::path& stem);

}  // namespace swvi
