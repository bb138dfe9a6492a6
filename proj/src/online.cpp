#include "msfem/online.hpp"

#include <chrono>
#include <cmath>

#include "msfem/parallel.hpp"

namespace msfem {

namespace {

struct MethodName {
  Method method;
  const char* name;
};

const MethodName method_names[] = {
    {Method::P1, "P1"},
    {Method::P1_SUPG, "P1_SUPG"},
    {Method::MsFEM_lin, "MsFEM_lin"},
    {Method::MsFEM_lin_SUPG, "MsFEM_lin_SUPG"},
    {Method::Adv_MsFEM_lin, "Adv_MsFEM_lin"},
    {Method::Adv_MsFEM_lin_B, "Adv_MsFEM_lin_B"},
    {Method::Adv_MsFEM_CR, "Adv_MsFEM_CR"},
    {Method::Adv_MsFEM_CR_B, "Adv_MsFEM_CR_B"},
    {Method::Adv_MsFEM_CR_beta, "Adv_MsFEM_CR_beta"},
    {Method::PG_Adv_MsFEM_CR, "PG_Adv_MsFEM_CR"},
    {Method::PG_Adv_MsFEM_CR_beta, "PG_Adv_MsFEM_CR_beta"},
};

using Family = MethodTraits::Family;

bool uses_diffusion_basis(Method m) { return m == Method::MsFEM_lin || m == Method::MsFEM_lin_SUPG; }

struct Numbering {
  std::vector<Index> dof;      // per vertex (p1, lin) or face (cr)
  std::vector<double> fixed;   // boundary value where dof < 0
  std::vector<DofLabel> labels;
};

double boundary_value(const Problem& problem, const Point& p) {
  if (problem.dimension != 1) return 0.0;
  return p.x() == 0.0 ? problem.u0 : problem.u1;
}

Numbering number_dofs(Family family, const Problem& problem, const CoarseMesh& coarse) {
  Numbering n;
  if (family == Family::cr) {
    n.dof.assign(coarse.num_faces(), -1);
    n.fixed.assign(coarse.num_faces(), 0.0);
    for (Index f = 0; f < coarse.num_faces(); ++f) {
      const Face& face = coarse.faces[f];
      if (face.boundary) {
        n.fixed[f] = boundary_value(problem, coarse.vertices[face.vertices[0]]);
      } else {
        n.dof[f] = static_cast<Index>(n.labels.size());
        n.labels.push_back({DofLabel::Kind::coarse_face, f});
      }
    }
    return n;
  }
  const Index nv = static_cast<Index>(coarse.vertices.size());
  n.dof.assign(nv, -1);
  n.fixed.assign(nv, 0.0);
  for (Index v = 0; v < nv; ++v) {
    if (coarse.is_boundary_vertex(v)) {
      n.fixed[v] = boundary_value(problem, coarse.vertices[v]);
    } else {
      n.dof[v] = static_cast<Index>(n.labels.size());
      n.labels.push_back({DofLabel::Kind::coarse_vertex, v});
    }
  }
  return n;
}

struct LocalSpace {
  int n = 0;
  std::array<Index, 3> dof{-1, -1, -1};
  std::array<double, 3> fixed{0, 0, 0};
  std::array<Vector, 3> trial, test;
  std::array<Affine, 3> trial_p1, test_p1;
  const Vector* bubble = nullptr;
  double bubble_integral = 0.0;
};

[[noreturn]] void missing(const char* what) {
  throw InvalidArgument(std::string("basis store lacks the ") + what + " flavor");
}

LocalSpace local_space(Method method, const MethodTraits& tr, const NestedMeshes& meshes,
                       const BasisStore& store, const Numbering& num, Index k) {
  const CoarseMesh& coarse = meshes.coarse;
  const FineMesh& local = meshes.local[k];
  const ElementBasis& e = store.elements.at(k);
  LocalSpace s;
  s.n = coarse.vertices_per_element();
  for (int i = 0; i < s.n; ++i) {
    const Index entity = tr.family == Family::cr ? coarse.element_faces[k][i] : coarse.elements[k][i];
    s.dof[i] = num.dof[entity];
    s.fixed[i] = num.fixed[entity];
    const Affine p1 = tr.family == Family::cr ? coarse.cr_basis(k, i) : coarse.p1_hat(k, i);
    s.trial_p1[i] = s.test_p1[i] = p1;
    switch (tr.family) {
      case Family::p1:
        s.trial[i] = interpolate(local, p1);
        break;
      case Family::lin:
        if (uses_diffusion_basis(method)) {
          if (e.msfem_lin.empty()) missing("MsFEM-lin");
          s.trial[i] = e.msfem_lin[i];
        } else {
          if (e.adv_lin.empty()) missing("strong");
          s.trial[i] = e.adv_lin[i];
        }
        break;
      case Family::cr:
        if (e.adv_cr.empty()) missing("weak");
        s.trial[i] = e.adv_cr[i];
        break;
    }
    s.test[i] = tr.petrov_galerkin ? interpolate(local, p1) : s.trial[i];
  }
  if (tr.bubble) {
    if (tr.family == Family::cr) {
      s.bubble = &e.bubble_weak;
      s.bubble_integral = e.weak_bubble_integral;
    } else {
      s.bubble = &e.bubble_strong;
      s.bubble_integral = e.bubble_integral;
    }
    if (s.bubble->size() == 0) missing(tr.family == Family::cr ? "weak" : "strong");
  }
  return s;
}

struct Contribution {
  Eigen::Matrix3d ww = Eigen::Matrix3d::Zero();
  Eigen::Vector3d wb = Eigen::Vector3d::Zero();
  Eigen::Vector3d bw = Eigen::Vector3d::Zero();
  double bb = 0.0;
  Eigen::Vector3d rhs_w = Eigen::Vector3d::Zero();
  double bubble_load = 0.0;
  double bubble_integral = 0.0;
  double load_mean = 0.0;
  LocalSpace space;
};

Contribution element_contribution(const Problem& problem, const NestedMeshes& meshes,
                                  const BasisStore& store, const MethodSpec& spec,
                                  const MethodTraits& tr, const Numbering& num,
                                  const AssemblyOptions& options, Index k) {
  const FineMesh& local = meshes.local[k];
  Contribution c;
  c.space = local_space(spec.method, tr, meshes, store, num, k);
  const LocalSpace& s = c.space;
  const SparseMatrix a = assemble_bilinear(local, problem.fields, spec.form);
  const Vector load = assemble_load(local, problem.fields.load);
  const double area = meshes.coarse.measure(k);
  c.load_mean = load.sum() / area;

  std::array<Vector, 3> at;
  for (int j = 0; j < s.n; ++j) at[j] = a * s.trial[j];
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) c.ww(i, j) = s.test[i].dot(at[j]);
    c.rhs_w[i] = load.dot(s.test[i]);
  }
  if (tr.supg) {
    const double tau = options.tau ? options.tau->at(k) : store.elements[k].tau_supg;
    const std::vector<double> fint = element_load_integrals(local, problem.fields.load);
    Mat2 bt = Mat2::Zero();
    Vec2 fb = Vec2::Zero();
    for (Index e = 0; e < local.num_elements(); ++e) {
      const FineElement t = fine_element(local, e);
      const Vec2 b = problem.fields.advection(t.centroid);
      bt += t.measure * b * b.transpose();
      fb += fint[e] * b;
    }
    for (int i = 0; i < s.n; ++i) {
      const Vec2& gi = s.test_p1[i].g;
      for (int j = 0; j < s.n; ++j) c.ww(i, j) += tau * gi.dot(bt * s.trial_p1[j].g);
      c.rhs_w[i] += options.supg_rhs_sign * tau * gi.dot(fb);
    }
  }
  if (tr.bubble) {
    const Vector& bub = *s.bubble;
    const Vector ab = a * bub;
    for (int i = 0; i < s.n; ++i) {
      c.wb[i] = s.test[i].dot(ab);
      c.bw[i] = bub.dot(at[i]);
    }
    c.bb = bub.dot(ab);
    c.bubble_load = load.dot(bub);
    c.bubble_integral = s.bubble_integral;
  }
  return c;
}

SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& n : method_names)
    if (n.method == m) return n.name;
  return "?";
}

std::string to_string(Pathway p) { return p == Pathway::intrusive ? "intrusive" : "nonintrusive"; }

Method parse_method(const std::string& name) {
  for (const auto& n : method_names)
    if (name == n.name) return n.method;
  throw InvalidArgument("unknown method '" + name + "'");
}

MethodSpec parse_method_spec(const std::string& text, FormKind form) {
  MethodSpec spec;
  spec.form = form;
  const auto colon = text.find(':');
  spec.method = parse_method(text.substr(0, colon));
  if (colon != std::string::npos) {
    const std::string path = text.substr(colon + 1);
    if (path == "nonintrusive")
      spec.pathway = Pathway::nonintrusive;
    else if (path != "intrusive")
      throw InvalidArgument("unknown pathway '" + path + "'");
  }
  validate(spec);
  return spec;
}

void validate(const MethodSpec& spec) {
  if (spec.pathway == Pathway::nonintrusive && spec.method != Method::PG_Adv_MsFEM_CR &&
      spec.method != Method::PG_Adv_MsFEM_CR_beta)
    throw InvalidArgument("the nonintrusive pathway only applies to the PG CR methods, not " +
                          to_string(spec.method));
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> list = [] {
    std::vector<Method> v;
    for (const auto& n : method_names) v.push_back(n.method);
    return v;
  }();
  return list;
}

MethodTraits traits(Method m) {
  MethodTraits t;
  switch (m) {
    case Method::P1: break;
    case Method::P1_SUPG: t.supg = true; break;
    case Method::MsFEM_lin: t.family = Family::lin; break;
    case Method::MsFEM_lin_SUPG: t.family = Family::lin; t.supg = true; break;
    case Method::Adv_MsFEM_lin: t.family = Family::lin; break;
    case Method::Adv_MsFEM_lin_B: t.family = Family::lin; t.bubble = true; break;
    case Method::Adv_MsFEM_CR: t.family = Family::cr; break;
    case Method::Adv_MsFEM_CR_B: t.family = Family::cr; t.bubble = true; break;
    case Method::Adv_MsFEM_CR_beta:
      t.family = Family::cr;
      t.bubble = true;
      t.rule = BubbleRule::average;
      break;
    case Method::PG_Adv_MsFEM_CR:
      t.family = Family::cr;
      t.petrov_galerkin = true;
      break;
    case Method::PG_Adv_MsFEM_CR_beta:
      t.family = Family::cr;
      t.petrov_galerkin = true;
      t.bubble = true;
      t.rule = BubbleRule::average;
      break;
  }
  return t;
}

OfflineOptions required_options(const std::vector<MethodSpec>& specs, OfflineOptions base) {
  for (const auto& s : specs) {
    const MethodTraits t = traits(s.method);
    if (uses_diffusion_basis(s.method)) base.diffusion_lin = true;
    else if (t.family == Family::lin) base.strong = true;
    else if (t.family == Family::cr) base.weak = true;
  }
  return base;
}

CoarseSystem assemble_method(const Problem& problem, const NestedMeshes& meshes,
                             const BasisStore& store, const MethodSpec& spec,
                             const AssemblyOptions& options) {
  validate(spec);
  const MethodTraits tr = traits(spec.method);
  const CoarseMesh& coarse = meshes.coarse;
  if (static_cast<Index>(store.elements.size()) != coarse.num_elements())
    throw InvalidArgument("basis store does not match the mesh");
  const Numbering num = number_dofs(tr.family, problem, coarse);
  const Index nd = static_cast<Index>(num.labels.size());
  const Index ne = coarse.num_elements();

  std::vector<Contribution> parts(ne);
  parallel_for(ne, options.workers, [&](Index k) {
    parts[k] = element_contribution(problem, meshes, store, spec, tr, num, options, k);
  });

  CoarseSystem sys;
  sys.dof_map = num.labels;
  sys.bordered = tr.bubble;
  sys.rhs_w = Vector::Zero(nd);
  sys.rhs_b = Vector::Zero(ne);
  sys.bubble_load = Vector::Zero(ne);
  sys.bubble_integral = Vector::Zero(ne);
  sys.load_mean = Vector::Zero(ne);
  std::vector<Eigen::Triplet<double>> ww, wb, bw, bb;
  for (Index k = 0; k < ne; ++k) {
    const Contribution& c = parts[k];
    const LocalSpace& s = c.space;
    sys.load_mean[k] = c.load_mean;
    for (int i = 0; i < s.n; ++i) {
      const Index di = s.dof[i];
      if (di < 0) continue;
      sys.rhs_w[di] += c.rhs_w[i];
      for (int j = 0; j < s.n; ++j) {
        if (s.dof[j] >= 0)
          ww.emplace_back(di, s.dof[j], c.ww(i, j));
        else
          sys.rhs_w[di] -= s.fixed[j] * c.ww(i, j);
      }
      if (tr.bubble) wb.emplace_back(di, k, c.wb[i]);
    }
    if (tr.bubble) {
      sys.rhs_b[k] += c.bubble_load;
      sys.bubble_load[k] = c.bubble_load;
      sys.bubble_integral[k] = c.bubble_integral;
      for (int j = 0; j < s.n; ++j) {
        if (s.dof[j] >= 0)
          bw.emplace_back(k, s.dof[j], c.bw[j]);
        else
          sys.rhs_b[k] -= s.fixed[j] * c.bw[j];
      }
      bb.emplace_back(k, k, c.bb);
    }
  }
  sys.ww = from_triplets(nd, nd, ww);
  if (tr.bubble) {
    sys.wb = from_triplets(nd, ne, wb);
    sys.bw = from_triplets(ne, nd, bw);
    sys.bb = from_triplets(ne, ne, bb);
  }
  return sys;
}

Condensed condense_bubbles(const CoarseSystem& system, BubbleRule rule) {
  if (!system.bordered) throw InvalidArgument("system has no bubble block");
  const Index ne = system.rhs_b.size();
  Condensed out;
  out.beta = Vector::Zero(ne);
  for (Index k = 0; k < ne; ++k) {
    if (rule == BubbleRule::average) {
      out.beta[k] = system.load_mean[k];
    } else {
      if (system.bubble_integral[k] == 0.0)
        throw SingularSystem("bubble of element " + std::to_string(k) + " has zero integral");
      out.beta[k] = system.bubble_load[k] / system.bubble_integral[k];
    }
  }
  out.system.matrix = system.ww;
  out.system.rhs = system.rhs_w - system.wb * out.beta;
  out.system.dof_map = system.dof_map;
  return out;
}

std::pair<Vector, Vector> solve_bordered(const CoarseSystem& system) {
  if (!system.bordered) throw InvalidArgument("system has no bubble block");
  const Index nd = system.ww.rows(), ne = system.bb.rows();
  std::vector<Eigen::Triplet<double>> t;
  auto add = [&t](const SparseMatrix& m, Index r0, Index c0) {
    for (int j = 0; j < m.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(m, j); it; ++it) t.emplace_back(r0 + it.row(), c0 + j, it.value());
  };
  add(system.ww, 0, 0);
  add(system.wb, 0, nd);
  add(system.bw, nd, 0);
  add(system.bb, nd, nd);
  SparseSystem s;
  s.matrix = from_triplets(nd + ne, nd + ne, t);
  s.rhs.resize(nd + ne);
  s.rhs << system.rhs_w, system.rhs_b;
  const Vector x = solve_linear(s);
  return {x.head(nd), x.tail(ne)};
}

namespace {

SolveResult reconstruct(const Problem& problem, const NestedMeshes& meshes, const BasisStore& store,
                        const MethodSpec& spec, const Vector& coarse_values, const Vector& beta,
                        bool via_correctors) {
  const MethodTraits tr = traits(spec.method);
  const CoarseMesh& coarse = meshes.coarse;
  const Numbering num = number_dofs(tr.family, problem, coarse);
  SolveResult r;
  r.spec = spec;
  r.coarse = coarse_values;
  r.bubble = beta;
  r.dof_map = num.labels;
  const Index ne = coarse.num_elements();
  r.p1_part.resize(ne);
  r.fine.resize(ne);
  for (Index k = 0; k < ne; ++k) {
    const FineMesh& local = meshes.local[k];
    const ElementBasis& e = store.elements[k];
    Affine p1;
    Vector fine = Vector::Zero(local.num_vertices());
    const int n = coarse.vertices_per_element();
    for (int i = 0; i < n; ++i) {
      const Index entity = tr.family == Family::cr ? coarse.element_faces[k][i] : coarse.elements[k][i];
      const double c = num.dof[entity] >= 0 ? coarse_values[num.dof[entity]] : num.fixed[entity];
      const Affine phi = tr.family == Family::cr ? coarse.cr_basis(k, i) : coarse.p1_hat(k, i);
      p1.c += c * phi.c;
      p1.g += c * phi.g;
    }
    if (via_correctors) {
      fine = interpolate(local, p1);
      for (int a = 0; a < coarse.dimension; ++a) fine += p1.g[a] * e.chi_weak[a];
    } else {
      const LocalSpace s = local_space(spec.method, tr, meshes, store, num, k);
      for (int i = 0; i < n; ++i) {
        const double c = s.dof[i] >= 0 ? coarse_values[s.dof[i]] : s.fixed[i];
        fine += c * s.trial[i];
      }
    }
    if (tr.bubble && beta.size() == ne && beta[k] != 0.0)
      fine += beta[k] * (tr.family == Family::cr ? e.bubble_weak : e.bubble_strong);
    r.p1_part[k] = p1;
    r.fine[k] = std::move(fine);
  }
  return r;
}

}  // namespace

SolveResult solve_method(const Problem& problem, const NestedMeshes& meshes,
                         const BasisStore& store, const MethodSpec& spec,
                         const AssemblyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const MethodTraits tr = traits(spec.method);
  const CoarseSystem sys = assemble_method(problem, meshes, store, spec, options);
  Vector beta = Vector::Zero(meshes.coarse.num_elements());
  SparseSystem reduced;
  if (tr.bubble) {
    Condensed c = condense_bubbles(sys, tr.rule);
    beta = std::move(c.beta);
    reduced = std::move(c.system);
  } else {
    reduced.matrix = sys.ww;
    reduced.rhs = sys.rhs_w;
    reduced.dof_map = sys.dof_map;
  }
  const Vector w = solve_linear(reduced);
  SolveResult r = reconstruct(problem, meshes, store, spec, w, beta, false);
  r.seconds = elapsed(start);
  return r;
}

SparseSystem assemble_nonintrusive(const Problem& problem, const NestedMeshes& meshes,
                                   const BasisStore& store, const MethodSpec& spec, Vector* beta_out) {
  if (spec.method != Method::PG_Adv_MsFEM_CR && spec.method != Method::PG_Adv_MsFEM_CR_beta)
    throw InvalidArgument("the nonintrusive pathway only applies to the PG CR methods");
  const MethodTraits tr = traits(spec.method);
  const CoarseMesh& coarse = meshes.coarse;
  const Numbering num = number_dofs(Family::cr, problem, coarse);
  const Index nd = static_cast<Index>(num.labels.size());
  const Index ne = coarse.num_elements();
  const int n = coarse.vertices_per_element();
  SparseSystem s;
  s.rhs = Vector::Zero(nd);
  s.dof_map = num.labels;
  Vector beta = Vector::Zero(ne);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index k = 0; k < ne; ++k) {
    const ElementBasis& e = store.elements.at(k);
    if (e.chi_weak[0].size() == 0) missing("weak");
    const FineMesh& local = meshes.local[k];
    const double area = coarse.measure(k);
    const Point xc = coarse.centroid(k);
    const Vector load = assemble_load(local, problem.fields.load);
    if (tr.bubble) beta[k] = load.sum() / area;
    std::array<Affine, 3> phi;
    for (int i = 0; i < n; ++i) phi[i] = coarse.cr_basis(k, i);
    for (int f = 0; f < n; ++f) {
      const Index df = num.dof[coarse.element_faces[k][f]];
      if (df < 0) continue;
      const Vec2& kf = phi[f].g;
      const double d = phi[f](xc);
      s.rhs[df] += load.dot(interpolate(local, phi[f]));
      if (tr.bubble) s.rhs[df] -= beta[k] * area * (e.r0 * d + e.r.dot(kf));
      for (int j = 0; j < n; ++j) {
        const Vec2& g = phi[j].g;
        const double v = area * (kf.dot(e.a_bar_cr * g) + d * e.b_bar_cr.dot(g));
        const Index entity = coarse.element_faces[k][j];
        if (num.dof[entity] >= 0)
          trip.emplace_back(df, num.dof[entity], v);
        else
          s.rhs[df] -= num.fixed[entity] * v;
      }
    }
  }
  s.matrix = from_triplets(nd, nd, trip);
  if (beta_out) *beta_out = beta;
  return s;
}

SolveResult solve_nonintrusive(const Problem& problem, const NestedMeshes& meshes,
                               const BasisStore& store, const MethodSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  Vector beta;
  const SparseSystem s = assemble_nonintrusive(problem, meshes, store, spec, &beta);
  const Vector w = solve_linear(s);
  MethodSpec tagged = spec;
  tagged.pathway = Pathway::nonintrusive;
  SolveResult r = reconstruct(problem, meshes, store, tagged, w, beta, true);
  r.seconds = elapsed(start);
  return r;
}

SolveResult solve(const Problem& problem, const NestedMeshes& meshes, const BasisStore& store,
                  const MethodSpec& spec, const AssemblyOptions& options) {
  if (spec.pathway == Pathway::nonintrusive) return solve_nonintrusive(problem, meshes, store, spec);
  return solve_method(problem, meshes, store, spec, options);
}

BrokenField extract_p1_part(const SolveResult& result, const NestedMeshes& meshes) {
  BrokenField out(result.p1_part.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = interpolate(meshes.local[k], result.p1_part[k]);
  return out;
}

EquivalenceReport effective_equivalence_check(const Problem& problem, const NestedMeshes& meshes,
                                              FormKind form) {
  OfflineOptions o;
  o.strong = true;
  o.form = form;
  const BasisStore store = compute_offline(problem, meshes, o);
  std::vector<double> tau_b;
  for (const auto& e : store.elements) tau_b.push_back(e.tau_bubble);
  AssemblyOptions supg;
  supg.tau = tau_b;
  AssemblyOptions flipped = supg;
  flipped.supg_rhs_sign = -1.0;

  auto run = [&](Method m, const AssemblyOptions& opt) {
    return solve_method(problem, meshes, store, MethodSpec{m, form, Pathway::intrusive}, opt).coarse;
  };
  EquivalenceReport r;
  const Vector lin_b = run(Method::Adv_MsFEM_lin_B, {});
  const Vector lin = run(Method::Adv_MsFEM_lin, {});
  const Vector p1_supg = run(Method::P1_SUPG, supg);
  const Vector p1_flip = run(Method::P1_SUPG, flipped);
  r.deviation_bubble = (lin_b - p1_supg).cwiseAbs().maxCoeff();
  r.deviation_flipped = (lin - p1_flip).cwiseAbs().maxCoeff();
  r.supg_tau_min = *std::min_element(tau_b.begin(), tau_b.end());
  r.supg_tau_max = *std::max_element(tau_b.begin(), tau_b.end());
  return r;
}

}  // namespace msfem
