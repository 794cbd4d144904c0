#include "swvi/mesh.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace swvi {

Eigen::Vector2d Mesh::centroid(Index e) const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int k = 0; k < 3; ++k) c += nodes.row(elements(e, k)).transpose();
  return c / 3.0;
}

double Mesh::area(Index e) const {
  const Eigen::Vector2d a = nodes.row(elements(e, 0)).transpose();
  const Eigen::Vector2d b = nodes.row(elements(e, 1)).transpose();
  const Eigen::Vector2d c = nodes.row(elements(e, 2)).transpose();
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

NodeArray Mesh::centroids() const {
  NodeArray c(num_elements(), 2);
  for (Index e = 0; e < num_elements(); ++e) c.row(e) = centroid(e).transpose();
  return c;
}

Mesh structured_unit_square(int nx, int ny, std::optional<CircularHole> hole) {
  if (nx < 1 || ny < 1) throw ValidationError("mesh needs at least one cell per side");
  const int stride = nx + 1;
  auto node_id = [stride](int i, int j) { return j * stride + i; };

  NodeArray all_nodes((nx + 1) * (ny + 1), 2);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      all_nodes.row(node_id(i, j)) << static_cast<double>(i) / nx, static_cast<double>(j) / ny;

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = node_id(i, j), b = node_id(i + 1, j);
      const int c = node_id(i + 1, j + 1), d = node_id(i, j + 1);
      // counter-clockwise
      triangles.push_back({a, b, c});
      triangles.push_back({a, c, d});
    }
  }

  if (hole) {
    std::vector<std::array<int, 3>> kept;
    for (const auto& t : triangles) {
      Eigen::Vector2d c = Eigen::Vector2d::Zero();
      for (int k : t) c += all_nodes.row(k).transpose();
      c /= 3.0;
      const double dx = c.x() - hole->cx, dy = c.y() - hole->cy;
      if (dx * dx + dy * dy >= hole->radius * hole->radius) kept.push_back(t);
    }
    triangles = std::move(kept);
  }

  std::vector<int> renumber(all_nodes.rows(), -1);
  int next = 0;
  for (const auto& t : triangles)
    for (int k : t)
      if (renumber[k] < 0) renumber[k] = -2;
  for (Index k = 0; k < all_nodes.rows(); ++k)
    if (renumber[k] == -2) renumber[k] = next++;

  Mesh mesh;
  mesh.nodes.resize(next, 2);
  for (Index k = 0; k < all_nodes.rows(); ++k)
    if (renumber[k] >= 0) mesh.nodes.row(renumber[k]) = all_nodes.row(k);
  mesh.elements.resize(static_cast<Index>(triangles.size()), 3);
  for (std::size_t e = 0; e < triangles.size(); ++e)
    for (int k = 0; k < 3; ++k) mesh.elements(static_cast<Index>(e), k) = renumber[triangles[e][k]];
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& stem) {
  std::ofstream nodes(stem.string() + ".node");
  std::ofstream elements(stem.string() + ".ele");
  if (!nodes || !elements) throw Error("cannot write mesh files for " + stem.string());
  nodes << std::setprecision(17);
  for (Index k = 0; k < mesh.num_nodes(); ++k)
    nodes << k << ' ' << mesh.nodes(k, 0) << ' ' << mesh.nodes(k, 1) << '\n';
  for (Index e = 0; e < mesh.num_elements(); ++e)
    elements << e << ' ' << mesh.elements(e, 0) << ' ' << mesh.elements(e, 1) << ' '
             << mesh.elements(e, 2) << '\n';
}

namespace {

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path, std::size_t width) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row(width);
    for (auto& v : row)
      if (!(ss >> v)) throw ValidationError("malformed line in " + path.string() + ": " + line);
    if (static_cast<std::size_t>(row[0]) != rows.size())
      throw ValidationError("ids in " + path.string() + " must be consecutive from 0");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Mesh read_mesh(const std::filesystem::path& stem) {
  const auto node_rows = read_rows(stem.string() + ".node", 3);
  const auto ele_rows = read_rows(stem.string() + ".ele", 4);
  Mesh mesh;
  mesh.nodes.resize(static_cast<Index>(node_rows.size()), 2);
  for (std::size_t k = 0; k < node_rows.size(); ++k)
    mesh.nodes.row(static_cast<Index>(k)) << node_rows[k][1], node_rows[k][2];
  mesh.elements.resize(static_cast<Index>(ele_rows.size()), 3);
  for (std::size_t e = 0; e < ele_rows.size(); ++e) {
    for (int k = 0; k < 3; ++k) {
      const int id = static_cast<int>(ele_rows[e][k + 1]);
      if (id < 0 || id >= mesh.num_nodes())
        throw ValidationError("element " + std::to_string(e) + " references unknown node");
      mesh.elements(static_cast<Index>(e), k) = id;
    }
  }
  return mesh;
}

}  // namespace swvi
