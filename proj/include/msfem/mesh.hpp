#pragma once

#include <array>
#include <iosfwd>
#include <utility>
#include <vector>

#include "msfem/types.hpp"

namespace msfem {

// A coarse face: an edge in 2D, a vertex in 1D (both entries equal).
struct Face {
  std::array<Index, 2> vertices{-1, -1};
  std::array<Index, 2> elements{-1, -1};
  bool boundary = false;
};

struct CoarseMesh {
  int dimension = 2;
  Index n = 0;  // elements per side
  double H = 0.0;
  std::vector<Point> vertices;
  std::vector<std::array<Index, 3>> elements;  // 1D uses the first two entries
  std::vector<Face> faces;
  // Local face f is opposite local vertex f.
  std::vector<std::array<Index, 3>> element_faces;

  int vertices_per_element() const { return dimension + 1; }
  Index num_elements() const { return static_cast<Index>(elements.size()); }
  Index num_faces() const { return static_cast<Index>(faces.size()); }
  double measure(Index k) const;
  Point centroid(Index k) const;
  Point vertex(Index k, int i) const { return vertices[elements[k][i]]; }
  bool is_boundary_vertex(Index v) const;
  // Barycentric coordinate of local vertex i, i.e. the P1 hat restricted to k.
  Affine p1_hat(Index k, int i) const;
  // P1 Crouzeix-Raviart function with mean 1 on local face f and 0 on the others.
  Affine cr_basis(Index k, int f) const;
};

struct Region {
  enum class Kind { full, oble };
  Kind kind = Kind::full;
  double upper = 1.0;  // box (0, upper)^d

  static Region full() { return {}; }
  static Region oble(const CoarseMesh& mesh) { return {Kind::oble, 1.0 - mesh.H}; }
  bool contains(const CoarseMesh& mesh, Index k) const;
};

struct FineMesh {
  int dimension = 2;
  Index parent = -1;  // coarse element, -1 for the global mesh
  double h = 0.0;
  std::vector<Point> vertices;
  std::vector<std::array<Index, 3>> elements;
  std::vector<Index> parent_map;      // local vertex -> global fine vertex
  std::vector<Index> global_element;  // local element -> global fine element
  // Bit f is set when the vertex lies on coarse face f of the parent.
  std::vector<std::uint8_t> face_mask;
  // Trapezoidal weights giving the mean over each coarse face.
  std::array<std::vector<std::pair<Index, double>>, 3> face_mean;

  int vertices_per_element() const { return dimension + 1; }
  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_elements() const { return static_cast<Index>(elements.size()); }
  bool on_boundary(Index v) const { return face_mask[v] != 0; }
  double face_average(int f, const Eigen::VectorXd& values) const;
};

struct NestedMeshes {
  CoarseMesh coarse;
  FineMesh global;
  std::vector<FineMesh> local;
  int levels = 0;
  // Global fine element -> owning coarse element.
  std::vector<Index> owner;
};

CoarseMesh build_coarse(int dimension, Index n);
NestedMeshes refine_nested(const CoarseMesh& mesh, int levels);
NestedMeshes build_meshes(int dimension, int coarse_exponent, int fine_exponent);

// Length of the chord of element k through its centroid in direction b.
double directional_diameter(const CoarseMesh& mesh, Index k, const Vec2& b);

// Plain-text dump: "nv ne", one vertex per line, one element per line.
void write_mesh(std::ostream& out, const FineMesh& mesh);
void write_mesh(std::ostream& out, const CoarseMesh& mesh);

}  // namespace msfem
