#include "msfem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msfem {

namespace {

void check_shape(const NestedMeshes& meshes, const BrokenField& a, const BrokenField& b) {
  const std::size_t ne = meshes.local.size();
  if (a.size() != ne || b.size() != ne) throw InvalidArgument("field does not match the coarse mesh");
  for (std::size_t k = 0; k < ne; ++k) {
    const Index nv = meshes.local[k].num_vertices();
    if (a[k].size() != nv || b[k].size() != nv)
      throw InvalidArgument("field does not match the local mesh of element " + std::to_string(k));
  }
}

}  // namespace

double h1_norm_squared(const FineMesh& local, const Vector& values) {
  const int nv = local.vertices_per_element();
  const double mass = 1.0 / ((nv) * (nv + 1));
  double sum = 0.0;
  for (Index e = 0; e < local.num_elements(); ++e) {
    const FineElement t = fine_element(local, e);
    Vec2 g = Vec2::Zero();
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < nv; ++i) {
      const double v = values[local.elements[e][i]];
      g += v * t.grad[i];
      s += v;
      s2 += v * v;
    }
    sum += t.measure * (g.squaredNorm() + mass * (s2 + s * s));
  }
  return sum;
}

double broken_h1_squared(const NestedMeshes& meshes, const BrokenField& field,
                         const BrokenField& reference, const Region& region) {
  check_shape(meshes, field, reference);
  double sum = 0.0;
  for (Index k = 0; k < meshes.coarse.num_elements(); ++k) {
    if (!region.contains(meshes.coarse, k)) continue;
    sum += h1_norm_squared(meshes.local[k], field[k] - reference[k]);
  }
  return sum;
}

ErrorReport broken_h1_error(const NestedMeshes& meshes, const BrokenField& field,
                            const BrokenField& reference) {
  const Region oble = Region::oble(meshes.coarse), full = Region::full();
  BrokenField zero(reference.size());
  for (std::size_t k = 0; k < zero.size(); ++k) zero[k] = Vector::Zero(reference[k].size());
  ErrorReport r;
  r.norm_oble = std::sqrt(broken_h1_squared(meshes, reference, zero, oble));
  r.norm_full = std::sqrt(broken_h1_squared(meshes, reference, zero, full));
  if (!(r.norm_oble > 0.0) || !(r.norm_full > 0.0)) throw InvalidArgument("reference has zero norm");
  r.err_oble = std::sqrt(broken_h1_squared(meshes, field, reference, oble)) / r.norm_oble;
  r.err_full = std::sqrt(broken_h1_squared(meshes, field, reference, full)) / r.norm_full;
  return r;
}

double overshoot(const NestedMeshes& meshes, const BrokenField& p1_part, const BrokenField& reference,
                 const Region& region) {
  check_shape(meshes, p1_part, reference);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vector& v : reference) {
    lo = std::min(lo, v.minCoeff());
    hi = std::max(hi, v.maxCoeff());
  }
  const double range = hi - lo;
  if (!(range > 0.0)) return 0.0;
  double worst = 0.0;
  for (Index k = 0; k < meshes.coarse.num_elements(); ++k) {
    if (!region.contains(meshes.coarse, k)) continue;
    for (Index i = 0; i < p1_part[k].size(); ++i)
      worst = std::max({worst, p1_part[k][i] - hi, lo - p1_part[k][i]});
  }
  return worst / range;
}

ErrorReport error_report(const NestedMeshes& meshes, const BrokenField& field,
                         const BrokenField& p1_part, const BrokenField& reference) {
  ErrorReport r = broken_h1_error(meshes, field, reference);
  r.overshoot = overshoot(meshes, p1_part, reference, Region::oble(meshes.coarse));
  return r;
}

}  // namespace msfem
