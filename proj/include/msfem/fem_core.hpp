#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "msfem/mesh.hpp"
#include "msfem/problem.hpp"

namespace msfem {

enum class FormKind { standard, skew_symmetric };

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
// One fine nodal vector per coarse element, on that element's local mesh.
using BrokenField = std::vector<Vector>;

struct DofLabel {
  enum class Kind { fine_vertex, multiplier, coarse_vertex, coarse_face, bubble };
  Kind kind = Kind::fine_vertex;
  Index id = 0;
};

struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<DofLabel> dof_map;
};

// Sparse LU with partial pivoting. Throws SingularSystem when the
// factorization fails or min |U_jj| / max |U_jj| < 1e-14.
class LuFactor {
 public:
  explicit LuFactor(const SparseMatrix& matrix);
  ~LuFactor();
  LuFactor(LuFactor&&) noexcept;
  LuFactor& operator=(LuFactor&&) noexcept;

  Vector solve(const Vector& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  double pivot_ratio() const { return pivot_ratio_; }
  Index size() const { return size_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double pivot_ratio_ = 0.0;
  Index size_ = 0;
};

Vector solve_linear(const SparseSystem& system);

struct FineElement {
  double measure = 0.0;
  std::array<Vec2, 3> grad{};
  Point centroid = Point::Zero();
};

FineElement fine_element(const FineMesh& mesh, Index e);

// Row = test function, column = trial function.
Eigen::Matrix3d element_matrix(const FineElement& t, int nv, const Mat2& a, const Vec2& b,
                               FormKind form);

SparseMatrix assemble_bilinear(const FineMesh& mesh, const CoefficientField& fields, FormKind form);

// Load vector F_i = int f phi_i (midedge rule on triangles, Simpson in 1D).
Vector assemble_load(const FineMesh& mesh, const std::function<double(const Point&)>& f);

// int_T f per fine element, consistent with assemble_load.
std::vector<double> element_load_integrals(const FineMesh& mesh,
                                           const std::function<double(const Point&)>& f);

// Weights c with c . u = mean of u over coarse face f, for every fine u.
Eigen::SparseVector<double> face_mean_row(const FineMesh& local, int f);

// Dirichlet solves on a fixed matrix: the interior block is factored once.
class DirichletSolver {
 public:
  DirichletSolver(SparseMatrix matrix, std::vector<bool> fixed);

  // Entries of `boundary` at fixed nodes are copied; the rest is solved for.
  Vector solve(const Vector& boundary, const Vector& load) const;
  const SparseMatrix& matrix() const { return a_; }

 private:
  SparseMatrix a_;
  SparseMatrix a_ii_, a_ib_;
  std::vector<Index> interior_, fixed_;
  std::unique_ptr<LuFactor> lu_;
};

// Weakly constrained local solves: one multiplier per coarse face.
class WeakSolver {
 public:
  WeakSolver(SparseMatrix matrix, const FineMesh& local);

  Vector solve(const std::vector<double>& means, const Vector& load) const;
  const SparseMatrix& matrix() const { return a_; }

 private:
  SparseMatrix a_;
  Index n_ = 0;
  int faces_ = 0;
  std::unique_ptr<LuFactor> lu_;
};

std::vector<bool> boundary_mask(const FineMesh& mesh);

Vector solve_local_dirichlet(const FineMesh& local, const CoefficientField& fields,
                             const Vector& boundary, const Vector& load, FormKind form);
Vector solve_local_weak(const FineMesh& local, const CoefficientField& fields,
                        const std::vector<double>& means, const Vector& load, FormKind form);

struct ReferenceSolution {
  Vector values;  // global fine nodal values
  double fine_peclet = 0.0;
};

// Max over fine elements of |b| h / (2 m).
double fine_peclet(const Problem& problem, const FineMesh& mesh);

ReferenceSolution reference_fine(const Problem& problem, const FineMesh& global,
                                 FormKind form = FormKind::standard);

BrokenField reference_weak_fine(const Problem& problem, const NestedMeshes& meshes,
                                FormKind form = FormKind::standard);

BrokenField restrict_to_elements(const NestedMeshes& meshes, const Vector& global);

// Index of the local face of element k that is coarse face `face`.
int local_face_index(const CoarseMesh& mesh, Index k, Index face);

}  // namespace msfem
