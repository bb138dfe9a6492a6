#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "msfem/mesh.hpp"

using namespace msfem;

namespace {
double total_measure(const CoarseMesh& m) {
  double s = 0.0;
  for (Index k = 0; k < m.num_elements(); ++k) s += m.measure(k);
  return s;
}
Index interior_faces(const CoarseMesh& m) {
  Index c = 0;
  for (const auto& f : m.faces) c += f.boundary ? 0 : 1;
  return c;
}
}  // namespace

TEST(BuildCoarse, Interval) {
  const CoarseMesh m = build_coarse(1, 8);
  EXPECT_EQ(m.num_elements(), 8);
  Index interior = 0;
  for (Index v = 0; v < static_cast<Index>(m.vertices.size()); ++v)
    interior += m.is_boundary_vertex(v) ? 0 : 1;
  EXPECT_EQ(interior, 7);
  EXPECT_DOUBLE_EQ(m.H, 0.125);
}

TEST(BuildCoarse, TwoByTwo) {
  const CoarseMesh m = build_coarse(2, 2);
  EXPECT_EQ(m.vertices.size(), 9u);
  EXPECT_EQ(m.faces.size(), 16u);
  EXPECT_EQ(m.elements.size(), 8u);
  EXPECT_EQ(interior_faces(m), 8);
}

TEST(BuildCoarse, RejectsTooFewElements) {
  EXPECT_THROW(build_coarse(2, 1), InvalidArgument);
  EXPECT_THROW(build_coarse(3, 4), InvalidArgument);
}

TEST(BuildCoarse, OverallStructure) {
  for (Index n = 2; n <= 8; ++n) {
    const CoarseMesh m = build_coarse(2, n);
    EXPECT_EQ(m.num_elements(), 2 * n * n);
    const Index v = static_cast<Index>(m.vertices.size());
    EXPECT_EQ(v - m.num_faces() + m.num_elements(), 1);
    EXPECT_EQ(interior_faces(m), 3 * n * n - 2 * n);
    EXPECT_NEAR(total_measure(m), 1.0, 1e-12);
    for (Index k = 0; k < m.num_elements(); ++k) EXPECT_NEAR(m.measure(k), m.H * m.H / 2, 1e-15);
    for (const auto& f : m.faces) {
      const int owners = (f.elements[0] >= 0) + (f.elements[1] >= 0);
      EXPECT_EQ(owners, f.boundary ? 1 : 2);
    }
  }
  EXPECT_NEAR(total_measure(build_coarse(1, 16)), 1.0, 1e-12);
}

TEST(BuildCoarse, DiagonalsRunBottomLeftToTopRight) {
  const CoarseMesh m = build_coarse(2, 4);
  for (Index k = 0; k < m.num_elements(); ++k) {
    const Point a = m.vertex(k, 0), b = m.vertex(k, k % 2 == 0 ? 2 : 1);
    EXPECT_DOUBLE_EQ(b.x() - a.x(), m.H);
    EXPECT_DOUBLE_EQ(b.y() - a.y(), m.H);
  }
}

TEST(BuildCoarse, LocalFaceIsOppositeLocalVertex) {
  const CoarseMesh m = build_coarse(2, 3);
  for (Index k = 0; k < m.num_elements(); ++k)
    for (int f = 0; f < 3; ++f) {
      const Face& face = m.faces[m.element_faces[k][f]];
      EXPECT_NE(face.vertices[0], m.elements[k][f]);
      EXPECT_NE(face.vertices[1], m.elements[k][f]);
    }
}

TEST(BuildCoarse, CrBasisHasUnitMeanOnItsFace) {
  const CoarseMesh m = build_coarse(2, 2);
  for (Index k = 0; k < m.num_elements(); ++k)
    for (int f = 0; f < 3; ++f) {
      const Affine phi = m.cr_basis(k, f);
      for (int g = 0; g < 3; ++g) {
        const Face& face = m.faces[m.element_faces[k][g]];
        const Point mid = 0.5 * (m.vertices[face.vertices[0]] + m.vertices[face.vertices[1]]);
        EXPECT_NEAR(phi(mid), f == g ? 1.0 : 0.0, 1e-14);
      }
    }
}

TEST(Region, ObleBox) {
  const CoarseMesh m = build_coarse(2, 16);
  const Region r = Region::oble(m);
  EXPECT_DOUBLE_EQ(r.upper, 0.9375);
  Index inside = 0;
  for (Index k = 0; k < m.num_elements(); ++k) inside += r.contains(m, k) ? 1 : 0;
  EXPECT_EQ(inside, 2 * 15 * 15);
}

TEST(RefineNested, Counts) {
  const NestedMeshes t = refine_nested(build_coarse(2, 2), 3);
  for (const auto& loc : t.local) EXPECT_EQ(loc.num_elements(), 64);
  const NestedMeshes i = refine_nested(build_coarse(1, 8), 5);
  EXPECT_DOUBLE_EQ(i.global.h, 0.125 / 32);
  for (const auto& loc : i.local) EXPECT_EQ(loc.num_elements(), 32);
  EXPECT_THROW(refine_nested(build_coarse(1, 8), 0), InvalidArgument);
}

TEST(RefineNested, LocalMeshesAreRestrictions) {
  for (int dim : {1, 2}) {
    const NestedMeshes t = refine_nested(build_coarse(dim, 4), 3);
    std::vector<int> covered(t.global.elements.size(), 0);
    for (const auto& loc : t.local) {
      std::set<Index> seen(loc.parent_map.begin(), loc.parent_map.end());
      EXPECT_EQ(seen.size(), loc.parent_map.size());
      double mismatch = 0.0;
      for (Index v = 0; v < loc.num_vertices(); ++v)
        mismatch = std::max(mismatch, (loc.vertices[v] - t.global.vertices[loc.parent_map[v]]).norm());
      EXPECT_EQ(mismatch, 0.0);
      for (Index e = 0; e < loc.num_elements(); ++e) {
        const Index g = loc.global_element[e];
        ++covered[g];
        for (int i = 0; i < dim + 1; ++i)
          EXPECT_EQ(loc.parent_map[loc.elements[e][i]], t.global.elements[g][i]);
      }
    }
    for (int c : covered) EXPECT_EQ(c, 1);
  }
}

TEST(RefineNested, FineElementsTileTheirParent) {
  const NestedMeshes t = refine_nested(build_coarse(2, 4), 2);
  for (Index k = 0; k < t.coarse.num_elements(); ++k) {
    const FineMesh& loc = t.local[k];
    double area = 0.0;
    for (const auto& e : loc.elements) {
      const Vec2 a = loc.vertices[e[1]] - loc.vertices[e[0]];
      const Vec2 b = loc.vertices[e[2]] - loc.vertices[e[0]];
      area += 0.5 * (a.x() * b.y() - a.y() * b.x());
    }
    EXPECT_NEAR(area, t.coarse.measure(k), 1e-15);
    for (const auto& p : loc.vertices)
      for (int i = 0; i < 3; ++i) EXPECT_GE(t.coarse.p1_hat(k, i)(p), -1e-12);
  }
}

TEST(RefineNested, FaceMasksAndMeans) {
  const int levels = 3;
  const NestedMeshes t = refine_nested(build_coarse(2, 2), levels);
  const Index r = 1 << levels;
  for (const auto& loc : t.local) {
    Index boundary = 0;
    for (auto m : loc.face_mask) boundary += m != 0;
    EXPECT_EQ(boundary, 3 * r);
    for (int f = 0; f < 3; ++f) {
      double sum = 0.0;
      for (const auto& [v, w] : loc.face_mean[f]) sum += w;
      EXPECT_NEAR(sum, 1.0, 1e-14);
      EXPECT_EQ(static_cast<Index>(loc.face_mean[f].size()), r + 1);
    }
  }
}

TEST(DirectionalDiameter, RightTriangle) {
  const CoarseMesh m = build_coarse(2, 4);
  const double H = m.H;
  EXPECT_NEAR(directional_diameter(m, 0, Vec2(1, 0)), 2 * H / 3, 1e-15);
  EXPECT_NEAR(directional_diameter(m, 1, Vec2(1, 0)), 2 * H / 3, 1e-15);
  EXPECT_NEAR(directional_diameter(m, 0, Vec2(0, 1)), 2 * H / 3, 1e-15);
  EXPECT_NEAR(directional_diameter(m, 0, Vec2(1, 1)), std::sqrt(2.0) * 2 * H / 3, 1e-15);
  const Vec2 b(0.3, -0.7);
  EXPECT_NEAR(directional_diameter(m, 5, b), directional_diameter(m, 5, -b), 1e-15);
  EXPECT_THROW(directional_diameter(m, 0, Vec2::Zero()), InvalidArgument);
}

TEST(DirectionalDiameter, DenseSamplingAgrees) {
  const CoarseMesh m = build_coarse(2, 2);
  const Vec2 b(std::cos(0.3), std::sin(0.3));
  const Point c = m.centroid(0);
  const int n = 200000;
  double lo = 0.0, hi = 0.0;
  for (int s = -n; s <= n; ++s) {
    const double t = s * (m.H / n);
    const Point p = c + t * b;
    bool inside = true;
    for (int i = 0; i < 3; ++i) inside = inside && m.p1_hat(0, i)(p) >= 0.0;
    if (inside) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  EXPECT_NEAR(directional_diameter(m, 0, b), hi - lo, 2 * m.H / n);
}

TEST(DirectionalDiameter, IntervalIsH) {
  const CoarseMesh m = build_coarse(1, 8);
  EXPECT_DOUBLE_EQ(directional_diameter(m, 3, Vec2(-2, 0)), 0.125);
}

TEST(WriteMesh, Format) {
  std::ostringstream s;
  write_mesh(s, build_coarse(2, 2));
  std::istringstream in(s.str());
  Index nv = 0, ne = 0;
  in >> nv >> ne;
  EXPECT_EQ(nv, 9);
  EXPECT_EQ(ne, 8);
  double x, y;
  in >> x >> y;
  EXPECT_EQ(x, 0.0);
  EXPECT_EQ(y, 0.0);
}
