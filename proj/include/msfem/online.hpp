#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msfem/offline.hpp"

namespace msfem {

enum class Method {
  P1,
  P1_SUPG,
  MsFEM_lin,
  MsFEM_lin_SUPG,
  Adv_MsFEM_lin,
  Adv_MsFEM_lin_B,
  Adv_MsFEM_CR,
  Adv_MsFEM_CR_B,
  Adv_MsFEM_CR_beta,
  PG_Adv_MsFEM_CR,
  PG_Adv_MsFEM_CR_beta,
};

enum class Pathway { intrusive, nonintrusive };
enum class BubbleRule { exact, average };

struct MethodSpec {
  Method method = Method::P1;
  FormKind form = FormKind::standard;
  Pathway pathway = Pathway::intrusive;
};

std::string to_string(Method m);
std::string to_string(Pathway p);
Method parse_method(const std::string& name);
// "NAME" or "NAME:nonintrusive".
MethodSpec parse_method_spec(const std::string& text, FormKind form = FormKind::standard);
void validate(const MethodSpec& spec);
const std::vector<Method>& all_methods();

struct MethodTraits {
  enum class Family { p1, lin, cr };
  Family family = Family::p1;
  bool supg = false;
  bool bubble = false;
  BubbleRule rule = BubbleRule::exact;
  bool petrov_galerkin = false;
};
MethodTraits traits(Method m);

// Offline flavors needed to run the given methods.
OfflineOptions required_options(const std::vector<MethodSpec>& specs, OfflineOptions base = {});

struct AssemblyOptions {
  // Per-element SUPG parameter replacing the stored tau.
  std::optional<std::vector<double>> tau;
  // Sign of the SUPG load term (-1 gives the sign-flipped scheme).
  double supg_rhs_sign = 1.0;
  int workers = 1;
};

struct CoarseSystem {
  SparseMatrix ww;  // rows: test dofs, columns: trial dofs
  SparseMatrix wb;  // a(B_K, test_i)
  SparseMatrix bw;  // a(trial_j, B_K)
  SparseMatrix bb;  // a(B_K, B_K), diagonal by construction
  Vector rhs_w;
  Vector rhs_b;
  Vector bubble_load;      // int_K f B_K
  Vector bubble_integral;  // int_K B_K
  Vector load_mean;        // (1/|K|) int_K f
  std::vector<DofLabel> dof_map;
  bool bordered = false;
};

struct SolveResult {
  MethodSpec spec;
  Vector coarse;  // one value per dof
  Vector bubble;  // beta_K per element, zero without bubbles
  std::vector<DofLabel> dof_map;
  std::vector<Affine> p1_part;  // per coarse element
  BrokenField fine;             // reconstruction on each local fine mesh
  double seconds = 0.0;
};

CoarseSystem assemble_method(const Problem& problem, const NestedMeshes& meshes,
                             const BasisStore& store, const MethodSpec& spec,
                             const AssemblyOptions& options = {});

struct Condensed {
  SparseSystem system;
  Vector beta;
};
Condensed condense_bubbles(const CoarseSystem& system, BubbleRule rule);

// Solves the full bordered system [ww wb; bw bb] and returns (w, beta).
std::pair<Vector, Vector> solve_bordered(const CoarseSystem& system);

SolveResult solve_method(const Problem& problem, const NestedMeshes& meshes,
                         const BasisStore& store, const MethodSpec& spec,
                         const AssemblyOptions& options = {});

// P1 Crouzeix-Raviart system with the effective coefficients and bubble moments.
SparseSystem assemble_nonintrusive(const Problem& problem, const NestedMeshes& meshes,
                                   const BasisStore& store, const MethodSpec& spec,
                                   Vector* beta = nullptr);
SolveResult solve_nonintrusive(const Problem& problem, const NestedMeshes& meshes,
                               const BasisStore& store, const MethodSpec& spec);

// Dispatches on spec.pathway.
SolveResult solve(const Problem& problem, const NestedMeshes& meshes, const BasisStore& store,
                  const MethodSpec& spec, const AssemblyOptions& options = {});

// P1 part at the local fine nodes of every element.
BrokenField extract_p1_part(const SolveResult& result, const NestedMeshes& meshes);

struct EquivalenceReport {
  double deviation_bubble = 0.0;   // Adv-MsFEM-lin-B vs P1 SUPG with tau = tau^B
  double deviation_flipped = 0.0;  // Adv-MsFEM-lin vs sign-flipped P1 SUPG
  double supg_tau_min = 0.0;
  double supg_tau_max = 0.0;
};
EquivalenceReport effective_equivalence_check(const Problem& problem, const NestedMeshes& meshes,
                                              FormKind form = FormKind::standard);

}  // namespace msfem
