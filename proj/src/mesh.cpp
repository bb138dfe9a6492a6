#include "msfem/mesh.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace msfem {

namespace {

void structured_grid(int dimension, Index n, std::vector<Point>& vertices,
                     std::vector<std::array<Index, 3>>& elements) {
  const double step = 1.0 / static_cast<double>(n);
  vertices.clear();
  elements.clear();
  if (dimension == 1) {
    vertices.reserve(n + 1);
    for (Index i = 0; i <= n; ++i) vertices.emplace_back(static_cast<double>(i) * step, 0.0);
    elements.reserve(n);
    for (Index i = 0; i < n; ++i) elements.push_back({i, i + 1, -1});
    return;
  }
  vertices.reserve((n + 1) * (n + 1));
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) * step, static_cast<double>(j) * step);
  auto v = [n](Index i, Index j) { return j * (n + 1) + i; };
  elements.reserve(2 * n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      elements.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
      elements.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
    }
  }
}

bool on_unit_boundary(const Point& p, int dimension) {
  for (int a = 0; a < dimension; ++a)
    if (p[a] == 0.0 || p[a] == 1.0) return true;
  return false;
}

}  // namespace

double CoarseMesh::measure(Index k) const {
  const auto& e = elements[k];
  if (dimension == 1) return std::abs(vertices[e[1]].x() - vertices[e[0]].x());
  const Vec2 a = vertices[e[1]] - vertices[e[0]];
  const Vec2 b = vertices[e[2]] - vertices[e[0]];
  return 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
}

Point CoarseMesh::centroid(Index k) const {
  Point c = Point::Zero();
  for (int i = 0; i < vertices_per_element(); ++i) c += vertex(k, i);
  return c / vertices_per_element();
}

bool CoarseMesh::is_boundary_vertex(Index v) const {
  return on_unit_boundary(vertices[v], dimension);
}

Affine CoarseMesh::p1_hat(Index k, int i) const {
  Affine out;
  if (dimension == 1) {
    const double x0 = vertex(k, 0).x(), x1 = vertex(k, 1).x();
    const double len = x1 - x0;
    if (i == 0) {
      out.c = x1 / len;
      out.g = Vec2(-1.0 / len, 0.0);
    } else {
      out.c = -x0 / len;
      out.g = Vec2(1.0 / len, 0.0);
    }
    return out;
  }
  Eigen::Matrix3d m;
  for (int j = 0; j < 3; ++j) {
    const Point p = vertex(k, j);
    m.row(j) << 1.0, p.x(), p.y();
  }
  const Eigen::Vector3d coeff = m.partialPivLu().solve(Eigen::Vector3d::Unit(i));
  out.c = coeff[0];
  out.g = Vec2(coeff[1], coeff[2]);
  return out;
}

Affine CoarseMesh::cr_basis(Index k, int f) const {
  const Affine lambda = p1_hat(k, f);
  Affine out;
  out.c = 1.0 - dimension * lambda.c;
  out.g = -dimension * lambda.g;
  return out;
}

bool Region::contains(const CoarseMesh& mesh, Index k) const {
  if (kind == Kind::full) return true;
  const double tol = 1e-12;
  for (int i = 0; i < mesh.vertices_per_element(); ++i) {
    const Point p = mesh.vertex(k, i);
    for (int a = 0; a < mesh.dimension; ++a)
      if (p[a] > upper + tol) return false;
  }
  return true;
}

double FineMesh::face_average(int f, const Eigen::VectorXd& values) const {
  double s = 0.0;
  for (const auto& [v, w] : face_mean[f]) s += w * values[v];
  return s;
}

CoarseMesh build_coarse(int dimension, Index n) {
  if (dimension != 1 && dimension != 2) throw InvalidArgument("dimension must be 1 or 2");
  if (n < 2) throw InvalidArgument("coarse mesh needs at least 2 elements per side");
  CoarseMesh mesh;
  mesh.dimension = dimension;
  mesh.n = n;
  mesh.H = 1.0 / static_cast<double>(n);
  structured_grid(dimension, n, mesh.vertices, mesh.elements);

  const Index ne = mesh.num_elements();
  mesh.element_faces.assign(ne, {-1, -1, -1});
  if (dimension == 1) {
    for (Index v = 0; v <= n; ++v) {
      Face f;
      f.vertices = {v, v};
      f.boundary = (v == 0 || v == n);
      mesh.faces.push_back(f);
    }
    for (Index k = 0; k < ne; ++k) {
      const auto& e = mesh.elements[k];
      mesh.element_faces[k] = {e[1], e[0], -1};
      for (int i = 0; i < 2; ++i) {
        Face& f = mesh.faces[e[i]];
        f.elements[f.elements[0] < 0 ? 0 : 1] = k;
      }
    }
    return mesh;
  }

  std::map<std::pair<Index, Index>, Index> ids;
  for (Index k = 0; k < ne; ++k) {
    const auto& e = mesh.elements[k];
    for (int f = 0; f < 3; ++f) {
      Index a = e[(f + 1) % 3], b = e[(f + 2) % 3];
      if (a > b) std::swap(a, b);
      ids.emplace(std::make_pair(a, b), 0);
    }
  }
  Index next = 0;
  for (auto& [key, id] : ids) {
    id = next++;
    Face f;
    f.vertices = {key.first, key.second};
    mesh.faces.push_back(f);
  }
  for (Index k = 0; k < ne; ++k) {
    const auto& e = mesh.elements[k];
    for (int f = 0; f < 3; ++f) {
      Index a = e[(f + 1) % 3], b = e[(f + 2) % 3];
      if (a > b) std::swap(a, b);
      const Index id = ids.at({a, b});
      mesh.element_faces[k][f] = id;
      Face& face = mesh.faces[id];
      face.elements[face.elements[0] < 0 ? 0 : 1] = k;
    }
  }
  for (auto& f : mesh.faces) f.boundary = f.elements[1] < 0;
  return mesh;
}

NestedMeshes refine_nested(const CoarseMesh& mesh, int levels) {
  if (levels < 1) throw InvalidArgument("refinement needs at least one level");
  if (levels > 20) throw InvalidArgument("refinement level too large");
  NestedMeshes out;
  out.coarse = mesh;
  out.levels = levels;
  const int dim = mesh.dimension;
  const Index r = Index{1} << levels;
  const Index N = mesh.n * r;

  FineMesh& global = out.global;
  global.dimension = dim;
  global.h = 1.0 / static_cast<double>(N);
  structured_grid(dim, N, global.vertices, global.elements);
  global.face_mask.resize(global.vertices.size());
  for (Index v = 0; v < global.num_vertices(); ++v)
    global.face_mask[v] = on_unit_boundary(global.vertices[v], dim) ? 1 : 0;

  // Group fine elements by coarse owner using exact integer centroids.
  out.owner.assign(global.elements.size(), -1);
  std::vector<std::vector<Index>> members(mesh.num_elements());
  if (dim == 1) {
    for (Index e = 0; e < N; ++e) out.owner[e] = e / r;
  } else {
    for (Index J = 0; J < N; ++J) {
      for (Index I = 0; I < N; ++I) {
        const Index ci = I / r, cj = J / r;
        const Index a = I % r, b = J % r;
        const Index square = 2 * (cj * mesh.n + ci);
        const Index fine = 2 * (J * N + I);
        out.owner[fine] = square + ((3 * a + 2 > 3 * b + 1) ? 0 : 1);
        out.owner[fine + 1] = square + ((3 * a + 1 > 3 * b + 2) ? 0 : 1);
      }
    }
  }
  for (Index e = 0; e < global.num_elements(); ++e) members[out.owner[e]].push_back(e);

  out.local.resize(mesh.num_elements());
  const int nv = dim + 1;
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    FineMesh& loc = out.local[k];
    loc.dimension = dim;
    loc.parent = k;
    loc.h = global.h;
    loc.global_element = members[k];
    std::vector<Index> gv;
    gv.reserve(members[k].size() * nv);
    for (Index e : members[k])
      for (int i = 0; i < nv; ++i) gv.push_back(global.elements[e][i]);
    std::sort(gv.begin(), gv.end());
    gv.erase(std::unique(gv.begin(), gv.end()), gv.end());
    loc.parent_map = gv;
    loc.vertices.reserve(gv.size());
    for (Index g : gv) loc.vertices.push_back(global.vertices[g]);
    auto local_id = [&gv](Index g) {
      return static_cast<Index>(std::lower_bound(gv.begin(), gv.end(), g) - gv.begin());
    };
    loc.elements.reserve(members[k].size());
    for (Index e : members[k]) {
      std::array<Index, 3> t{-1, -1, -1};
      for (int i = 0; i < nv; ++i) t[i] = local_id(global.elements[e][i]);
      loc.elements.push_back(t);
    }

    std::array<Affine, 3> lambda;
    for (int f = 0; f < nv; ++f) lambda[f] = mesh.p1_hat(k, f);
    const double tol = 1e-10;
    loc.face_mask.assign(loc.vertices.size(), 0);
    for (Index v = 0; v < loc.num_vertices(); ++v)
      for (int f = 0; f < nv; ++f)
        if (std::abs(lambda[f](loc.vertices[v])) < tol) loc.face_mask[v] |= std::uint8_t(1u << f);

    if (dim == 1) {
      for (int f = 0; f < 2; ++f)
        for (Index v = 0; v < loc.num_vertices(); ++v)
          if (loc.face_mask[v] & (1u << f)) loc.face_mean[f].push_back({v, 1.0});
      continue;
    }
    for (int f = 0; f < 3; ++f) {
      const Face& face = mesh.faces[mesh.element_faces[k][f]];
      const double length = (mesh.vertices[face.vertices[0]] - mesh.vertices[face.vertices[1]]).norm();
      std::map<Index, double> weights;
      const std::uint8_t bit = std::uint8_t(1u << f);
      for (const auto& t : loc.elements) {
        for (int i = 0; i < 3; ++i) {
          const Index a = t[(i + 1) % 3], b = t[(i + 2) % 3];
          if ((loc.face_mask[a] & bit) && (loc.face_mask[b] & bit)) {
            const double len = (loc.vertices[a] - loc.vertices[b]).norm();
            weights[a] += 0.5 * len / length;
            weights[b] += 0.5 * len / length;
          }
        }
      }
      loc.face_mean[f].assign(weights.begin(), weights.end());
    }
  }
  return out;
}

NestedMeshes build_meshes(int dimension, int coarse_exponent, int fine_exponent) {
  if (coarse_exponent < 1) throw InvalidArgument("coarse exponent must be at least 1");
  if (fine_exponent <= coarse_exponent)
    throw InvalidArgument("fine exponent must exceed the coarse exponent");
  return refine_nested(build_coarse(dimension, Index{1} << coarse_exponent),
                       fine_exponent - coarse_exponent);
}

double directional_diameter(const CoarseMesh& mesh, Index k, const Vec2& b) {
  const double nb = b.norm();
  if (!(nb > 0.0)) throw InvalidArgument("directional diameter needs a nonzero direction");
  if (mesh.dimension == 1) return mesh.measure(k);
  const Vec2 d = b / nb;
  const Point c = mesh.centroid(k);
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  // Clip c + t d against each half-plane lambda_i >= 0.
  for (int i = 0; i < 3; ++i) {
    const Affine l = mesh.p1_hat(k, i);
    const double slope = l.g.dot(d);
    const double value = l(c);
    if (std::abs(slope) < 1e-300) continue;
    const double t = -value / slope;
    if (slope > 0.0)
      tmin = std::max(tmin, t);
    else
      tmax = std::min(tmax, t);
  }
  return tmax - tmin;
}

namespace {
template <class M>
void write_any(std::ostream& out, const M& mesh) {
  const int nv = mesh.dimension + 1;
  out << mesh.vertices.size() << ' ' << mesh.elements.size() << '\n';
  out.precision(17);
  for (const auto& p : mesh.vertices) {
    out << p.x();
    if (mesh.dimension == 2) out << ' ' << p.y();
    out << '\n';
  }
  for (const auto& e : mesh.elements) {
    for (int i = 0; i < nv; ++i) out << (i ? " " : "") << e[i];
    out << '\n';
  }
}
}  // namespace

void write_mesh(std::ostream& out, const FineMesh& mesh) { write_any(out, mesh); }
void write_mesh(std::ostream& out, const CoarseMesh& mesh) { write_any(out, mesh); }

}  // namespace msfem
