#include "msfem/offline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "msfem/parallel.hpp"

namespace msfem {

MuBarRule parse_mu_bar(const std::string& name) {
  if (name == "auto") return MuBarRule::automatic;
  if (name == "minmax-mean") return MuBarRule::minmax_mean;
  if (name == "arithmetic-mean") return MuBarRule::arithmetic_mean;
  if (name == "harmonic-mean") return MuBarRule::harmonic_mean;
  if (name == "minimum") return MuBarRule::minimum;
  throw InvalidArgument("unknown mu_bar rule '" + name + "'");
}

std::string to_string(MuBarRule rule) {
  switch (rule) {
    case MuBarRule::automatic: return "auto";
    case MuBarRule::minmax_mean: return "minmax-mean";
    case MuBarRule::arithmetic_mean: return "arithmetic-mean";
    case MuBarRule::harmonic_mean: return "harmonic-mean";
    case MuBarRule::minimum: return "minimum";
  }
  return "auto";
}

Vector coordinate(const FineMesh& local, int a) {
  Vector out(local.num_vertices());
  for (Index v = 0; v < local.num_vertices(); ++v) out[v] = local.vertices[v][a];
  return out;
}

Vector interpolate(const FineMesh& local, const Affine& f) {
  Vector out(local.num_vertices());
  for (Index v = 0; v < local.num_vertices(); ++v) out[v] = f(local.vertices[v]);
  return out;
}

Vector unit_load(const FineMesh& local) {
  return assemble_load(local, [](const Point&) { return 1.0; });
}

namespace {

std::array<Vector, 2> correctors(const FineMesh& local, const SparseMatrix& a,
                                 const DirichletSolver* strong, const WeakSolver* weak) {
  std::array<Vector, 2> out;
  const Vector zero = Vector::Zero(local.num_vertices());
  const std::vector<double> zero_means(local.vertices_per_element(), 0.0);
  for (int d = 0; d < local.dimension; ++d) {
    const Vector rhs = -(a * coordinate(local, d));
    out[d] = strong ? strong->solve(zero, rhs) : weak->solve(zero_means, rhs);
  }
  return out;
}

std::vector<Vector> lin_basis(const CoarseMesh& coarse, Index k, const FineMesh& local,
                              const DirichletSolver& s) {
  std::vector<Vector> out;
  const Vector zero = Vector::Zero(local.num_vertices());
  for (int i = 0; i < coarse.vertices_per_element(); ++i)
    out.push_back(s.solve(interpolate(local, coarse.p1_hat(k, i)), zero));
  return out;
}

std::vector<Vector> cr_basis(const FineMesh& local, const WeakSolver& s) {
  std::vector<Vector> out;
  const Vector zero = Vector::Zero(local.num_vertices());
  const int nf = local.vertices_per_element();
  for (int f = 0; f < nf; ++f) {
    std::vector<double> means(nf, 0.0);
    means[f] = 1.0;
    out.push_back(s.solve(means, zero));
  }
  return out;
}

}  // namespace

std::array<Vector, 2> compute_correctors(const FineMesh& local, const CoefficientField& fields,
                                         Constraint bc, FormKind form) {
  const SparseMatrix a = assemble_bilinear(local, fields, form);
  if (bc == Constraint::strong) {
    const DirichletSolver s(a, boundary_mask(local));
    return correctors(local, a, &s, nullptr);
  }
  const WeakSolver s(a, local);
  return correctors(local, a, nullptr, &s);
}

std::vector<Vector> compute_element_basis(BasisKind kind, const CoarseMesh& coarse, Index k,
                                          const FineMesh& local, const CoefficientField& fields,
                                          FormKind form) {
  switch (kind) {
    case BasisKind::msfem_lin:
      return lin_basis(coarse, k, local,
                       DirichletSolver(assemble_bilinear(local, diffusion_only(fields), form),
                                       boundary_mask(local)));
    case BasisKind::adv_lin:
      return lin_basis(coarse, k, local,
                       DirichletSolver(assemble_bilinear(local, fields, form), boundary_mask(local)));
    case BasisKind::adv_cr:
      return cr_basis(local, WeakSolver(assemble_bilinear(local, fields, form), local));
  }
  return {};
}

std::vector<std::pair<Index, Vector>> compute_basis(BasisKind kind, const NestedMeshes& meshes,
                                                    Index dof, const CoefficientField& fields,
                                                    FormKind form) {
  const CoarseMesh& coarse = meshes.coarse;
  std::vector<std::pair<Index, Vector>> out;
  if (kind == BasisKind::adv_cr) {
    if (dof < 0 || dof >= coarse.num_faces()) throw InvalidArgument("unknown coarse face");
    for (Index k : coarse.faces[dof].elements) {
      if (k < 0) continue;
      const int f = local_face_index(coarse, k, dof);
      out.emplace_back(k, compute_element_basis(kind, coarse, k, meshes.local[k], fields, form)[f]);
    }
    return out;
  }
  if (dof < 0 || dof >= static_cast<Index>(coarse.vertices.size()))
    throw InvalidArgument("unknown coarse vertex");
  for (Index k = 0; k < coarse.num_elements(); ++k) {
    for (int i = 0; i < coarse.vertices_per_element(); ++i) {
      if (coarse.elements[k][i] != dof) continue;
      out.emplace_back(k, compute_element_basis(kind, coarse, k, meshes.local[k], fields, form)[i]);
    }
  }
  return out;
}

Vector compute_bubble(const FineMesh& local, const CoefficientField& fields, Constraint bc,
                      FormKind form) {
  const SparseMatrix a = assemble_bilinear(local, fields, form);
  const Vector load = unit_load(local);
  if (bc == Constraint::strong)
    return DirichletSolver(a, boundary_mask(local)).solve(Vector::Zero(load.size()), load);
  return WeakSolver(a, local).solve(std::vector<double>(local.vertices_per_element(), 0.0), load);
}

double tau_closed_form(double diam, double b_norm, double mu) {
  if (!(b_norm > 0.0)) return 0.0;
  const double pe = b_norm * diam / (2.0 * mu);
  double xi;
  if (pe < 0.05) {
    // coth x - 1/x loses digits to cancellation here
    const double x2 = pe * pe;
    xi = pe * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)));
  } else
    xi = 1.0 / std::tanh(pe) - 1.0 / pe;
  return diam / (2.0 * b_norm) * xi;
}

double compute_mu_bar(const FineMesh& local, const CoefficientField& fields, MuBarRule rule) {
  if (rule == MuBarRule::automatic)
    rule = local.dimension == 1 ? MuBarRule::minimum : MuBarRule::minmax_mean;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0, inv = 0.0;
  for (Index e = 0; e < local.num_elements(); ++e) {
    const double mu = scalar_diffusion(fields.diffusion(fine_element(local, e).centroid));
    lo = std::min(lo, mu);
    hi = std::max(hi, mu);
    sum += mu;
    inv += 1.0 / mu;
  }
  const double n = static_cast<double>(local.num_elements());
  switch (rule) {
    case MuBarRule::minmax_mean: return 0.5 * (lo + hi);
    case MuBarRule::arithmetic_mean: return sum / n;
    case MuBarRule::harmonic_mean: return n / inv;
    case MuBarRule::minimum:
    case MuBarRule::automatic: return lo;
  }
  return lo;
}

TauSupg compute_tau_supg(const CoarseMesh& coarse, Index k, const FineMesh& local,
                         const CoefficientField& fields, MuBarRule rule) {
  TauSupg out;
  out.mu_bar = compute_mu_bar(local, fields, rule);
  const Vec2 b = fields.advection(coarse.centroid(k));
  const double nb = b.norm();
  if (!(nb > 0.0)) return out;
  const double diam = directional_diameter(coarse, k, b);
  out.peclet = nb * diam / (2.0 * out.mu_bar);
  out.tau = tau_closed_form(diam, nb, out.mu_bar);
  return out;
}

double compute_tau_bubble(const CoarseMesh& coarse, Index k, const FineMesh& local,
                          const Vector& bubble) {
  return unit_load(local).dot(bubble) / coarse.measure(k);
}

Effective compute_effective_coefficients(const CoarseMesh& coarse, Index k, const FineMesh& local,
                                         const SparseMatrix& a_k,
                                         const std::array<Vector, 2>* chi) {
  Effective out;
  const int dim = coarse.dimension;
  const double area = coarse.measure(k);
  const Point c = coarse.centroid(k);
  const Vector ones = Vector::Ones(local.num_vertices());
  std::array<Vector, 2> x;
  for (int a = 0; a < dim; ++a) x[a] = coordinate(local, a).array() - c[a];
  for (int a = 0; a < dim; ++a) {
    Vector u = x[a];
    if (chi) u += (*chi)[a];
    const Vector au = a_k * u;
    for (int b = 0; b < dim; ++b) out.a_bar(b, a) = x[b].dot(au) / area;
    out.b_bar[a] = ones.dot(au) / area;
  }
  return out;
}

BubbleMoments compute_bubble_moments(const CoarseMesh& coarse, Index k, const FineMesh& local,
                                     const SparseMatrix& a_k, const Vector& weak_bubble,
                                     const std::array<Vector, 2>& chi_weak) {
  BubbleMoments out;
  const double area = coarse.measure(k);
  const Point c = coarse.centroid(k);
  const Vector ab = a_k * weak_bubble;
  out.r0 = ab.sum() / area;
  for (int a = 0; a < coarse.dimension; ++a) {
    const Vector x = coordinate(local, a).array() - c[a];
    out.r[a] = x.dot(ab) / area;
    out.r_g[a] = out.r[a] + chi_weak[a].dot(ab) / area;
  }
  return out;
}

std::string store_key(const Problem& problem, const NestedMeshes& meshes,
                      const OfflineOptions& options) {
  std::ostringstream s;
  s << problem.descriptor << "|d=" << meshes.coarse.dimension << "|n=" << meshes.coarse.n
    << "|levels=" << meshes.levels << "|form=" << (options.form == FormKind::standard ? "standard" : "skew")
    << "|mu=" << to_string(options.mu_bar) << "|flavors=" << options.diffusion_lin << options.strong
    << options.weak;
  const std::string text = s.str();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream hex;
  hex << std::hex;
  hex.width(16);
  hex.fill('0');
  hex << h;
  return hex.str();
}

BasisStore compute_offline(const Problem& problem, const NestedMeshes& meshes,
                           const OfflineOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (problem.dimension != meshes.coarse.dimension)
    throw InvalidArgument("problem and mesh dimensions differ");
  BasisStore store;
  store.options = options;
  store.key = store_key(problem, meshes, options);
  store.dimension = problem.dimension;
  const CoarseMesh& coarse = meshes.coarse;
  store.elements.resize(coarse.num_elements());
  const CoefficientField& fields = problem.fields;

  parallel_for(coarse.num_elements(), options.workers, [&](Index k) {
    const FineMesh& local = meshes.local[k];
    ElementBasis& e = store.elements[k];
    const SparseMatrix a = assemble_bilinear(local, fields, options.form);
    const Vector load = unit_load(local);
    const Vector zero = Vector::Zero(local.num_vertices());

    const TauSupg tau = compute_tau_supg(coarse, k, local, fields, options.mu_bar);
    e.tau_supg = tau.tau;
    e.peclet = tau.peclet;
    e.mu_bar = tau.mu_bar;
    const Effective p1 = compute_effective_coefficients(coarse, k, local, a, nullptr);
    e.a_bar_p1 = p1.a_bar;
    e.b_bar_p1 = p1.b_bar;

    if (options.diffusion_lin) {
      const SparseMatrix ad = assemble_bilinear(local, diffusion_only(fields), options.form);
      const DirichletSolver s(ad, boundary_mask(local));
      e.msfem_lin = lin_basis(coarse, k, local, s);
      e.chi_diffusion = correctors(local, ad, &s, nullptr);
      const Effective eff = compute_effective_coefficients(coarse, k, local, a, &e.chi_diffusion);
      e.a_bar_msfem_lin = eff.a_bar;
      e.b_bar_msfem_lin = eff.b_bar;
    }
    if (options.strong) {
      const DirichletSolver s(a, boundary_mask(local));
      e.adv_lin = lin_basis(coarse, k, local, s);
      e.chi_strong = correctors(local, a, &s, nullptr);
      e.bubble_strong = s.solve(zero, load);
      e.bubble_integral = load.dot(e.bubble_strong);
      e.tau_bubble = e.bubble_integral / coarse.measure(k);
    }
    if (options.weak) {
      const WeakSolver s(a, local);
      e.adv_cr = cr_basis(local, s);
      e.chi_weak = correctors(local, a, nullptr, &s);
      e.bubble_weak = s.solve(std::vector<double>(local.vertices_per_element(), 0.0), load);
      e.weak_bubble_integral = load.dot(e.bubble_weak);
      const Effective eff = compute_effective_coefficients(coarse, k, local, a, &e.chi_weak);
      e.a_bar_cr = eff.a_bar;
      e.b_bar_cr = eff.b_bar;
      const BubbleMoments mom = compute_bubble_moments(coarse, k, local, a, e.bubble_weak, e.chi_weak);
      e.r0 = mom.r0;
      e.r = mom.r;
      e.r_g = mom.r_g;
    }
  });
  store.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return store;
}

}  // namespace msfem
