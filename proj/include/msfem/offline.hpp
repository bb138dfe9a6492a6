#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "msfem/fem_core.hpp"

namespace msfem {

enum class MuBarRule { automatic, minmax_mean, arithmetic_mean, harmonic_mean, minimum };
enum class Constraint { strong, weak };
enum class BasisKind { msfem_lin, adv_lin, adv_cr };
enum class EffectiveFlavor { p1, msfem_lin, adv_cr };

MuBarRule parse_mu_bar(const std::string& name);
std::string to_string(MuBarRule rule);

struct OfflineOptions {
  bool diffusion_lin = false;  // MsFEM-lin basis and diffusion-only correctors
  bool strong = false;         // Adv-MsFEM-lin basis, strong correctors and bubble
  bool weak = false;           // Adv-MsFEM-CR basis, weak correctors and bubble
  FormKind form = FormKind::standard;
  MuBarRule mu_bar = MuBarRule::automatic;
  int workers = 1;
};

struct ElementBasis {
  std::vector<Vector> msfem_lin;  // per local vertex
  std::array<Vector, 2> chi_diffusion;
  std::vector<Vector> adv_lin;  // per local vertex
  std::array<Vector, 2> chi_strong;
  Vector bubble_strong;
  std::vector<Vector> adv_cr;  // per local face
  std::array<Vector, 2> chi_weak;
  Vector bubble_weak;

  double mu_bar = 0.0;
  double peclet = 0.0;  // Pe_K
  double tau_supg = 0.0;
  double tau_bubble = 0.0;
  double bubble_integral = 0.0;  // int_K B (strong)
  double weak_bubble_integral = 0.0;
  Mat2 a_bar_p1 = Mat2::Zero();
  Vec2 b_bar_p1 = Vec2::Zero();
  Mat2 a_bar_msfem_lin = Mat2::Zero();
  Vec2 b_bar_msfem_lin = Vec2::Zero();
  Mat2 a_bar_cr = Mat2::Zero();
  Vec2 b_bar_cr = Vec2::Zero();
  double r0 = 0.0;
  Vec2 r = Vec2::Zero();
  Vec2 r_g = Vec2::Zero();
};

struct BasisStore {
  OfflineOptions options;
  std::string key;
  int dimension = 0;
  std::vector<ElementBasis> elements;
  double seconds = 0.0;  // wall time of the offline stage that produced it
  bool loaded = false;   // read back from disk
};

// Fine nodal values of the coordinate function x^a on a local mesh.
Vector coordinate(const FineMesh& local, int a);
// Fine nodal values of an affine function.
Vector interpolate(const FineMesh& local, const Affine& f);
// F . 1 style helper: load vector of the constant 1.
Vector unit_load(const FineMesh& local);

std::array<Vector, 2> compute_correctors(const FineMesh& local, const CoefficientField& fields,
                                         Constraint bc, FormKind form);
// Restrictions to element k of the basis functions attached to its vertices
// (lin kinds) or faces (adv_cr).
std::vector<Vector> compute_element_basis(BasisKind kind, const CoarseMesh& coarse, Index k,
                                          const FineMesh& local, const CoefficientField& fields,
                                          FormKind form);
// All restrictions of the basis function attached to a coarse vertex (lin
// kinds) or coarse face (adv_cr), as (element, values) pairs.
std::vector<std::pair<Index, Vector>> compute_basis(BasisKind kind, const NestedMeshes& meshes,
                                                    Index dof, const CoefficientField& fields,
                                                    FormKind form);
Vector compute_bubble(const FineMesh& local, const CoefficientField& fields, Constraint bc,
                      FormKind form);

// (diam / (2|b|)) (coth Pe - 1/Pe), Pe = |b| diam / (2 mu); 0 when b = 0.
double tau_closed_form(double diam, double b_norm, double mu);
double compute_mu_bar(const FineMesh& local, const CoefficientField& fields, MuBarRule rule);

struct TauSupg {
  double tau = 0.0;
  double peclet = 0.0;
  double mu_bar = 0.0;
};
TauSupg compute_tau_supg(const CoarseMesh& coarse, Index k, const FineMesh& local,
                         const CoefficientField& fields, MuBarRule rule);
double compute_tau_bubble(const CoarseMesh& coarse, Index k, const FineMesh& local,
                          const Vector& bubble);

struct Effective {
  Mat2 a_bar = Mat2::Zero();
  Vec2 b_bar = Vec2::Zero();
};
// chi may be null for the p1 flavor.
Effective compute_effective_coefficients(const CoarseMesh& coarse, Index k, const FineMesh& local,
                                         const SparseMatrix& a_k,
                                         const std::array<Vector, 2>* chi);

struct BubbleMoments {
  double r0 = 0.0;
  Vec2 r = Vec2::Zero();
  Vec2 r_g = Vec2::Zero();
};
BubbleMoments compute_bubble_moments(const CoarseMesh& coarse, Index k, const FineMesh& local,
                                     const SparseMatrix& a_k, const Vector& weak_bubble,
                                     const std::array<Vector, 2>& chi_weak);

std::string store_key(const Problem& problem, const NestedMeshes& meshes,
                      const OfflineOptions& options);

BasisStore compute_offline(const Problem& problem, const NestedMeshes& meshes,
                           const OfflineOptions& options);

// Directory layout: <root>/<key>/manifest.txt and element_<k>.bin.
void save_store(const BasisStore& store, const std::string& root);
std::optional<BasisStore> load_store(const std::string& root, const std::string& key);

// Loads a matching store from root when present, otherwise computes and
// saves it. An empty root disables persistence.
BasisStore obtain_store(const Problem& problem, const NestedMeshes& meshes,
                        const OfflineOptions& options, const std::string& root);

}  // namespace msfem
