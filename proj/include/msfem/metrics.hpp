#pragma once

#include "msfem/fem_core.hpp"
#include "msfem/mesh.hpp"

namespace msfem {

struct ErrorReport {
  double err_oble = 0.0;
  double err_full = 0.0;
  double norm_oble = 0.0;  // reference norms used as denominators
  double norm_full = 0.0;
  double overshoot = 0.0;
};

// Squared full H^1 norm (gradient plus L^2 part) of a fine P1 field on one local mesh.
double h1_norm_squared(const FineMesh& local, const Vector& values);

// Sum over the coarse elements inside `region` of the squared H^1(K) norms of the difference.
double broken_h1_squared(const NestedMeshes& meshes, const BrokenField& field,
                         const BrokenField& reference, const Region& region);

// Relative broken H^1 errors on the OBLE box and on the whole domain.
ErrorReport broken_h1_error(const NestedMeshes& meshes, const BrokenField& field,
                            const BrokenField& reference);

// Largest excess of p1_part over the reference range, on region nodes, over the range on all of Omega.
double overshoot(const NestedMeshes& meshes, const BrokenField& p1_part, const BrokenField& reference,
                 const Region& region);

ErrorReport error_report(const NestedMeshes& meshes, const BrokenField& field,
                         const BrokenField& p1_part, const BrokenField& reference);

}  // namespace msfem
