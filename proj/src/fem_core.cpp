#include "msfem/fem_core.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "msfem/log.hpp"

namespace msfem {

namespace {

using Triplet = Eigen::Triplet<double>;

// Exposes the U diagonal, which SparseLU keeps in the supernodal L store.
class PivotLU : public Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> {
 public:
  double pivot_ratio() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Index j = 0; j < this->cols(); ++j) {
      double d = 0.0;
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
        if (it.index() == j) {
          d = std::abs(it.value());
          break;
        }
      }
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (this->cols() == 0) return 1.0;
    return hi > 0.0 ? lo / hi : 0.0;
  }
};

}  // namespace

struct LuFactor::Impl {
  PivotLU lu;
};

LuFactor::LuFactor(const SparseMatrix& matrix) : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols()) throw InvalidArgument("LU needs a square matrix");
  size_ = matrix.rows();
  SparseMatrix a = matrix;
  a.makeCompressed();
  impl_->lu.compute(a);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularSystem("sparse LU failed: " + impl_->lu.lastErrorMessage());
  pivot_ratio_ = impl_->lu.pivot_ratio();
  if (!(pivot_ratio_ >= 1e-14)) {
    std::ostringstream s;
    s << "pivot ratio " << pivot_ratio_ << " below 1e-14 (n = " << size_ << ")";
    throw SingularSystem(s.str());
  }
}

LuFactor::~LuFactor() = default;
LuFactor::LuFactor(LuFactor&&) noexcept = default;
LuFactor& LuFactor::operator=(LuFactor&&) noexcept = default;

Vector LuFactor::solve(const Vector& rhs) const {
  Vector x = impl_->lu.solve(rhs);
  return x;
}

Eigen::MatrixXd LuFactor::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd x = impl_->lu.solve(rhs);
  return x;
}

Vector solve_linear(const SparseSystem& system) {
  if (system.matrix.rows() != system.rhs.size())
    throw InvalidArgument("system dimensions do not match");
  return LuFactor(system.matrix).solve(system.rhs);
}

FineElement fine_element(const FineMesh& mesh, Index e) {
  FineElement t;
  const auto& v = mesh.elements[e];
  if (mesh.dimension == 1) {
    const double x0 = mesh.vertices[v[0]].x(), x1 = mesh.vertices[v[1]].x();
    t.measure = x1 - x0;
    if (!(t.measure > 0.0)) throw InvalidArgument("degenerate fine element");
    t.grad[0] = Vec2(-1.0 / t.measure, 0.0);
    t.grad[1] = Vec2(1.0 / t.measure, 0.0);
    t.centroid = Point(0.5 * (x0 + x1), 0.0);
    return t;
  }
  const Point& p0 = mesh.vertices[v[0]];
  const Point& p1 = mesh.vertices[v[1]];
  const Point& p2 = mesh.vertices[v[2]];
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  if (std::abs(det) <= 0.0) throw InvalidArgument("degenerate fine element");
  t.measure = 0.5 * std::abs(det);
  // grad lambda_i = rot(p_{i+2} - p_{i+1}) / det
  const std::array<Point, 3> p{p0, p1, p2};
  for (int i = 0; i < 3; ++i) {
    const Point& a = p[(i + 1) % 3];
    const Point& b = p[(i + 2) % 3];
    t.grad[i] = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
  }
  t.centroid = (p0 + p1 + p2) / 3.0;
  return t;
}

Eigen::Matrix3d element_matrix(const FineElement& t, int nv, const Mat2& a, const Vec2& b,
                               FormKind form) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  const double w = t.measure / nv;  // int phi_i
  for (int i = 0; i < nv; ++i) {
    const double bi = b.dot(t.grad[i]);
    for (int j = 0; j < nv; ++j) {
      const double bj = b.dot(t.grad[j]);
      double v = t.measure * t.grad[i].dot(a * t.grad[j]);
      if (form == FormKind::standard)
        v += w * bj;
      else
        v += 0.5 * w * (bj - bi);
      k(i, j) = v;
    }
  }
  return k;
}

SparseMatrix assemble_bilinear(const FineMesh& mesh, const CoefficientField& fields, FormKind form) {
  const int nv = mesh.vertices_per_element();
  std::vector<Triplet> trip;
  trip.reserve(mesh.elements.size() * nv * nv);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const FineElement t = fine_element(mesh, e);
    const Eigen::Matrix3d k =
        element_matrix(t, nv, fields.diffusion(t.centroid), fields.advection(t.centroid), form);
    const auto& v = mesh.elements[e];
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) trip.emplace_back(v[i], v[j], k(i, j));
  }
  SparseMatrix a(mesh.num_vertices(), mesh.num_vertices());
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

namespace {

// Local load contributions F_i of fine element e.
std::array<double, 3> element_load(const FineMesh& mesh, Index e,
                                   const std::function<double(const Point&)>& f) {
  const auto& v = mesh.elements[e];
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (mesh.dimension == 1) {
    const Point& a = mesh.vertices[v[0]];
    const Point& b = mesh.vertices[v[1]];
    const double h = b.x() - a.x();
    const double fm = f(0.5 * (a + b));
    out[0] = h / 6.0 * (f(a) + 2.0 * fm);
    out[1] = h / 6.0 * (f(b) + 2.0 * fm);
    return out;
  }
  const Point& p0 = mesh.vertices[v[0]];
  const Point& p1 = mesh.vertices[v[1]];
  const Point& p2 = mesh.vertices[v[2]];
  const double area =
      0.5 * std::abs((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
  const double f01 = f(0.5 * (p0 + p1)), f12 = f(0.5 * (p1 + p2)), f02 = f(0.5 * (p0 + p2));
  out[0] = area / 6.0 * (f01 + f02);
  out[1] = area / 6.0 * (f01 + f12);
  out[2] = area / 6.0 * (f12 + f02);
  return out;
}

}  // namespace

Vector assemble_load(const FineMesh& mesh, const std::function<double(const Point&)>& f) {
  Vector out = Vector::Zero(mesh.num_vertices());
  const int nv = mesh.vertices_per_element();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto le = element_load(mesh, e, f);
    for (int i = 0; i < nv; ++i) out[mesh.elements[e][i]] += le[i];
  }
  return out;
}

std::vector<double> element_load_integrals(const FineMesh& mesh,
                                           const std::function<double(const Point&)>& f) {
  std::vector<double> out(mesh.elements.size());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto le = element_load(mesh, e, f);
    out[e] = le[0] + le[1] + le[2];
  }
  return out;
}

Eigen::SparseVector<double> face_mean_row(const FineMesh& local, int f) {
  Eigen::SparseVector<double> row(local.num_vertices());
  for (const auto& [v, w] : local.face_mean[f]) row.coeffRef(v) += w;
  return row;
}

std::vector<bool> boundary_mask(const FineMesh& mesh) {
  std::vector<bool> out(mesh.vertices.size());
  for (Index v = 0; v < mesh.num_vertices(); ++v) out[v] = mesh.face_mask[v] != 0;
  return out;
}

namespace {

SparseMatrix extract(const SparseMatrix& a, const std::vector<Index>& rows,
                     const std::vector<Index>& cols) {
  std::vector<Index> col_pos(a.cols(), -1), row_pos(a.rows(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = static_cast<Index>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<Index>(j);
  std::vector<Triplet> trip;
  for (int j = 0; j < a.outerSize(); ++j) {
    if (col_pos[j] < 0) continue;
    for (SparseMatrix::InnerIterator it(a, j); it; ++it)
      if (row_pos[it.row()] >= 0) trip.emplace_back(row_pos[it.row()], col_pos[j], it.value());
  }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

}  // namespace

DirichletSolver::DirichletSolver(SparseMatrix matrix, std::vector<bool> fixed)
    : a_(std::move(matrix)) {
  if (static_cast<Index>(fixed.size()) != a_.rows())
    throw InvalidArgument("boundary mask size does not match the matrix");
  for (Index i = 0; i < a_.rows(); ++i) (fixed[i] ? fixed_ : interior_).push_back(i);
  a_ii_ = extract(a_, interior_, interior_);
  a_ib_ = extract(a_, interior_, fixed_);
  if (!interior_.empty()) lu_ = std::make_unique<LuFactor>(a_ii_);
}

Vector DirichletSolver::solve(const Vector& boundary, const Vector& load) const {
  Vector u = Vector::Zero(a_.rows());
  Vector g(static_cast<Index>(fixed_.size()));
  for (std::size_t i = 0; i < fixed_.size(); ++i) g[i] = boundary[fixed_[i]];
  for (std::size_t i = 0; i < fixed_.size(); ++i) u[fixed_[i]] = g[i];
  if (interior_.empty()) return u;
  Vector rhs(static_cast<Index>(interior_.size()));
  for (std::size_t i = 0; i < interior_.size(); ++i) rhs[i] = load[interior_[i]];
  if (g.size() > 0) rhs -= a_ib_ * g;
  const Vector ui = lu_->solve(rhs);
  for (std::size_t i = 0; i < interior_.size(); ++i) u[interior_[i]] = ui[i];
  return u;
}

WeakSolver::WeakSolver(SparseMatrix matrix, const FineMesh& local)
    : a_(std::move(matrix)), n_(a_.rows()), faces_(local.vertices_per_element()) {
  std::vector<Triplet> trip;
  trip.reserve(a_.nonZeros() + 4 * local.face_mean[0].size() * faces_);
  for (int j = 0; j < a_.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(a_, j); it; ++it) trip.emplace_back(it.row(), j, it.value());
  for (int f = 0; f < faces_; ++f) {
    for (const auto& [v, w] : local.face_mean[f]) {
      trip.emplace_back(n_ + f, v, w);
      trip.emplace_back(v, n_ + f, w);
    }
  }
  SparseMatrix s(n_ + faces_, n_ + faces_);
  s.setFromTriplets(trip.begin(), trip.end());
  lu_ = std::make_unique<LuFactor>(s);
}

Vector WeakSolver::solve(const std::vector<double>& means, const Vector& load) const {
  if (static_cast<int>(means.size()) != faces_)
    throw InvalidArgument("weak solve needs one mean per face");
  Vector rhs(n_ + faces_);
  rhs.head(n_) = load;
  for (int f = 0; f < faces_; ++f) rhs[n_ + f] = means[f];
  return lu_->solve(rhs).head(n_);
}

Vector solve_local_dirichlet(const FineMesh& local, const CoefficientField& fields,
                             const Vector& boundary, const Vector& load, FormKind form) {
  DirichletSolver s(assemble_bilinear(local, fields, form), boundary_mask(local));
  return s.solve(boundary, load);
}

Vector solve_local_weak(const FineMesh& local, const CoefficientField& fields,
                        const std::vector<double>& means, const Vector& load, FormKind form) {
  WeakSolver s(assemble_bilinear(local, fields, form), local);
  return s.solve(means, load);
}

double fine_peclet(const Problem& problem, const FineMesh& mesh) {
  double bmax = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const FineElement t = fine_element(mesh, e);
    bmax = std::max(bmax, problem.fields.advection(t.centroid).norm());
  }
  return bmax * mesh.h / (2.0 * problem.fields.m);
}

ReferenceSolution reference_fine(const Problem& problem, const FineMesh& global, FormKind form) {
  ReferenceSolution out;
  out.fine_peclet = fine_peclet(problem, global);
  if (out.fine_peclet >= 1.0) {
    std::ostringstream s;
    s << "fine Peclet number " << out.fine_peclet << " >= 1 (h = " << global.h << ")";
    warn("FinePecletTooLarge", s.str());
  }
  Vector g = Vector::Zero(global.num_vertices());
  if (problem.dimension == 1) {
    for (Index v = 0; v < global.num_vertices(); ++v) {
      if (global.vertices[v].x() == 0.0) g[v] = problem.u0;
      if (global.vertices[v].x() == 1.0) g[v] = problem.u1;
    }
  }
  DirichletSolver s(assemble_bilinear(global, problem.fields, form), boundary_mask(global));
  out.values = s.solve(g, assemble_load(global, problem.fields.load));
  return out;
}

int local_face_index(const CoarseMesh& mesh, Index k, Index face) {
  for (int f = 0; f < mesh.vertices_per_element(); ++f)
    if (mesh.element_faces[k][f] == face) return f;
  throw InvalidArgument("face does not belong to element");
}

BrokenField reference_weak_fine(const Problem& problem, const NestedMeshes& meshes, FormKind form) {
  const CoarseMesh& coarse = meshes.coarse;
  const Index ne = coarse.num_elements();
  std::vector<Index> offset(ne + 1, 0);
  for (Index k = 0; k < ne; ++k) offset[k + 1] = offset[k] + meshes.local[k].num_vertices();
  const Index n = offset[ne];
  const Index nf = coarse.num_faces();

  std::vector<Triplet> trip;
  Vector rhs = Vector::Zero(n + nf);
  for (Index k = 0; k < ne; ++k) {
    const FineMesh& loc = meshes.local[k];
    const SparseMatrix a = assemble_bilinear(loc, problem.fields, form);
    for (int j = 0; j < a.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(a, j); it; ++it)
        trip.emplace_back(offset[k] + it.row(), offset[k] + j, it.value());
    rhs.segment(offset[k], loc.num_vertices()) = assemble_load(loc, problem.fields.load);
  }
  for (Index face = 0; face < nf; ++face) {
    const Face& fc = coarse.faces[face];
    for (int side = 0; side < 2; ++side) {
      const Index k = fc.elements[side];
      if (k < 0) continue;
      const int f = local_face_index(coarse, k, face);
      const double sign = side == 0 ? 1.0 : -1.0;
      for (const auto& [v, w] : meshes.local[k].face_mean[f]) {
        trip.emplace_back(n + face, offset[k] + v, sign * w);
        trip.emplace_back(offset[k] + v, n + face, sign * w);
      }
    }
    if (fc.boundary && problem.dimension == 1) {
      const double x = coarse.vertices[fc.vertices[0]].x();
      rhs[n + face] = x == 0.0 ? problem.u0 : problem.u1;
    }
  }
  SparseMatrix s(n + nf, n + nf);
  s.setFromTriplets(trip.begin(), trip.end());
  const Vector sol = LuFactor(s).solve(rhs);
  BrokenField out(ne);
  for (Index k = 0; k < ne; ++k) out[k] = sol.segment(offset[k], meshes.local[k].num_vertices());
  return out;
}

BrokenField restrict_to_elements(const NestedMeshes& meshes, const Vector& global) {
  BrokenField out(meshes.local.size());
  for (std::size_t k = 0; k < meshes.local.size(); ++k) {
    const auto& map = meshes.local[k].parent_map;
    out[k].resize(static_cast<Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) out[k][i] = global[map[i]];
  }
  return out;
}

}  // namespace msfem
