#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>

#include "msfem/offline.hpp"

using namespace msfem;

namespace {

Problem constant_2d(double m, const Vec2& b) { return constant_problem(2, m, b, 1.0); }

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double exact_tau(double H, double b, double m) {
  const double pe = b * H / (2 * m);
  return H / (2 * b) * (1.0 / std::tanh(pe) - 1.0 / pe);
}

// Largest dyadic h <= m/10, and at most H/64.
int fine_exponent_for(double m, int coarse_exponent) {
  int e = 0;
  while (std::ldexp(1.0, -e) > m / 10) ++e;
  return std::max(e, coarse_exponent + 6);
}

}  // namespace

TEST(TauClosedForm, ReferenceValues) {
  EXPECT_NEAR(tau_closed_form(std::ldexp(1.0, -6), 1.0, std::ldexp(1.0, -7)), 0.0024455881679635258,
              1e-16);
  EXPECT_NEAR(tau_closed_form(std::ldexp(1.0, -6), 1.0, std::ldexp(1.0, -9)), 0.0058646183625131445,
              1e-16);
}

TEST(TauClosedForm, Limits) {
  const double diam = 0.1, b = 2.0;
  EXPECT_NEAR(tau_closed_form(diam, b, 1e-12), diam / (2 * b), 1e-12);
  EXPECT_NEAR(tau_closed_form(diam, b, 1e9), 0.0, 1e-12);
  EXPECT_EQ(tau_closed_form(diam, 0.0, 1.0), 0.0);
  // Either side of the series/closed-form switch, against 30-digit values.
  auto xi = [&](double pe) { return tau_closed_form(diam, b, b * diam / (2 * pe)) * 2 * b / diam; };
  EXPECT_NEAR(xi(0.049), 0.016330719508798821, 1e-12 * 0.0163);
  EXPECT_NEAR(xi(0.051), 0.016997052930022293, 1e-12 * 0.0170);
  EXPECT_NEAR(xi(1e-4), 3.3333333311111111e-05, 1e-12 * 3.3e-5);
}

TEST(TauSupg, UsesDirectionalDiameterAndMuBar) {
  const NestedMeshes t = build_meshes(2, 3, 6);
  const Problem p = testcase_2d_moderate(std::ldexp(1.0, -6), std::ldexp(1.0, -5));
  for (Index k : {0, 17, 101}) {
    const TauSupg tau = compute_tau_supg(t.coarse, k, t.local[k], p.fields, MuBarRule::automatic);
    const Vec2 b = p.fields.advection(t.coarse.centroid(k));
    const double diam = directional_diameter(t.coarse, k, b);
    EXPECT_DOUBLE_EQ(tau.peclet, b.norm() * diam / (2 * tau.mu_bar));
    EXPECT_DOUBLE_EQ(tau.tau, tau_closed_form(diam, b.norm(), tau.mu_bar));
    EXPECT_DOUBLE_EQ(tau.mu_bar, compute_mu_bar(t.local[k], p.fields, MuBarRule::minmax_mean));
  }
  const Problem still = constant_2d(0.1, Vec2::Zero());
  EXPECT_EQ(compute_tau_supg(t.coarse, 0, t.local[0], still.fields, MuBarRule::automatic).tau, 0.0);
}

TEST(MuBar, Rules) {
  const NestedMeshes t = build_meshes(1, 2, 8);
  const Problem p = testcase_1d(1.0, 1.0 / 8);
  const FineMesh& loc = t.local[1];
  const double lo = compute_mu_bar(loc, p.fields, MuBarRule::minimum);
  const double mm = compute_mu_bar(loc, p.fields, MuBarRule::minmax_mean);
  const double ar = compute_mu_bar(loc, p.fields, MuBarRule::arithmetic_mean);
  const double hm = compute_mu_bar(loc, p.fields, MuBarRule::harmonic_mean);
  EXPECT_NEAR(lo, 1.0, 1e-2);
  EXPECT_NEAR(mm, 2.0, 1e-2);
  EXPECT_NEAR(ar, 2.0, 1e-2);
  EXPECT_NEAR(hm, std::sqrt(3.0), 1e-2);
  EXPECT_EQ(compute_mu_bar(loc, p.fields, MuBarRule::automatic), lo);
  EXPECT_THROW(parse_mu_bar("median"), InvalidArgument);
  EXPECT_EQ(parse_mu_bar(to_string(MuBarRule::harmonic_mean)), MuBarRule::harmonic_mean);
}

TEST(Correctors, VanishForConstantDiffusion) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = constant_2d(0.7, Vec2::Zero());
  for (Constraint bc : {Constraint::strong, Constraint::weak}) {
    const auto chi = compute_correctors(t.local[3], p.fields, bc, FormKind::standard);
    EXPECT_LE(max_abs(chi[0]), 1e-12);
    EXPECT_LE(max_abs(chi[1]), 1e-12);
  }
}

TEST(Correctors, EqualMinusBTimesBubbleForConstantCoefficients) {
  const NestedMeshes t = build_meshes(2, 3, 8);
  const Vec2 b = Vec2(1, 1) / std::sqrt(2.0);
  const Problem p = constant_2d(0.02, b);
  for (Constraint bc : {Constraint::strong, Constraint::weak}) {
    const FineMesh& loc = t.local[9];
    const auto chi = compute_correctors(loc, p.fields, bc, FormKind::standard);
    const Vector bub = compute_bubble(loc, p.fields, bc, FormKind::standard);
    for (int a = 0; a < 2; ++a) EXPECT_LE(max_abs(chi[a] + b[a] * bub), 1e-10);
  }
}

TEST(Correctors, StrongBoundaryValuesAreZero) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = testcase_2d_moderate(0.01, 0.0625);
  const FineMesh& loc = t.local[4];
  const auto chi = compute_correctors(loc, p.fields, Constraint::strong, FormKind::standard);
  for (Index v = 0; v < loc.num_vertices(); ++v)
    if (loc.on_boundary(v)) {
      EXPECT_EQ(chi[0][v], 0.0);
      EXPECT_EQ(chi[1][v], 0.0);
    }
}

TEST(Basis, MsfemLinIsP1HatForConstantDiffusion) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = constant_2d(0.3, Vec2(1, 0));
  const auto pieces = compute_basis(BasisKind::msfem_lin, t, 12, p.fields, FormKind::standard);
  EXPECT_EQ(pieces.size(), 6u);
  for (const auto& [k, v] : pieces) {
    int local = 0;
    while (t.coarse.elements[k][local] != 12) ++local;
    EXPECT_LE(max_abs(v - interpolate(t.local[k], t.coarse.p1_hat(k, local))), 1e-12);
  }
}

TEST(Basis, AdvLinIsStepLikeWhenAdvectionDominates) {
  const double alpha = std::ldexp(1.0, -7);
  const NestedMeshes t = build_meshes(1, 3, 12);
  const Problem p = testcase_1d(alpha, std::ldexp(1.0, -5));
  const Index node = 4;
  const double xi = t.coarse.vertices[node].x();
  for (const auto& [k, v] : compute_basis(BasisKind::adv_lin, t, node, p.fields, FormKind::standard)) {
    const FineMesh& loc = t.local[k];
    for (Index i = 0; i < loc.num_vertices(); ++i) {
      const double x = loc.vertices[i].x();
      if (k == node && x >= xi + 4 * alpha && x <= xi + t.coarse.H / 2) EXPECT_GE(v[i], 0.99);
      if (k == node - 1 && x <= xi - t.coarse.H / 2) EXPECT_LE(v[i], 0.01);
    }
  }
}

TEST(Basis, AdvCrIsCrouzeixRaviartForConstantDiffusion) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = constant_2d(1.0, Vec2::Zero());
  Index face = 0;
  while (t.coarse.faces[face].boundary) ++face;
  const auto pieces = compute_basis(BasisKind::adv_cr, t, face, p.fields, FormKind::standard);
  EXPECT_EQ(pieces.size(), 2u);
  for (const auto& [k, v] : pieces) {
    const int f = local_face_index(t.coarse, k, face);
    EXPECT_LE(max_abs(v - interpolate(t.local[k], t.coarse.cr_basis(k, f))), 1e-12);
    EXPECT_NEAR(t.local[k].face_average(f, v), 1.0, 1e-12);
  }
}

TEST(Bubble, WeakEqualsStrongInOneDimension) {
  const NestedMeshes t = build_meshes(1, 3, 11);
  const Problem p = testcase_1d(std::ldexp(1.0, -6), std::ldexp(1.0, -5));
  const Vector s = compute_bubble(t.local[2], p.fields, Constraint::strong, FormKind::standard);
  const Vector w = compute_bubble(t.local[2], p.fields, Constraint::weak, FormKind::standard);
  EXPECT_LE(max_abs(s - w), 1e-12);
}

TEST(Bubble, ConstraintsHold) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = testcase_2d_moderate(0.01, 0.0625);
  const FineMesh& loc = t.local[6];
  const Vector s = compute_bubble(loc, p.fields, Constraint::strong, FormKind::standard);
  const Vector w = compute_bubble(loc, p.fields, Constraint::weak, FormKind::standard);
  for (Index v = 0; v < loc.num_vertices(); ++v)
    if (loc.on_boundary(v)) EXPECT_EQ(s[v], 0.0);
  for (int f = 0; f < 3; ++f) EXPECT_LE(std::abs(loc.face_average(f, w)), 1e-12);
}

TEST(TauBubble, MatchesClosedFormInOneDimension) {
  const int ce = 3;
  const double H = std::ldexp(1.0, -ce);
  for (double m : {0.5, 0.1, 0.01}) {
    const int fe = fine_exponent_for(m, ce);
    const double exact = exact_tau(H, 1.0, m);
    double err[2];
    for (int r = 0; r < 2; ++r) {
      const NestedMeshes t = build_meshes(1, ce, fe + r);
      const Problem p = constant_problem(1, m, Vec2(1, 0), 1.0);
      const Vector bub = compute_bubble(t.local[3], p.fields, Constraint::strong, FormKind::standard);
      err[r] = std::abs(compute_tau_bubble(t.coarse, 3, t.local[3], bub) - exact) / exact;
    }
    EXPECT_LE(err[0], 1e-3) << "m = " << m;
    EXPECT_GE(std::log2(err[0] / err[1]), 1.0) << "m = " << m;
  }
}

TEST(TauBubble, PureDiffusionParabola) {
  const double m = 0.2;
  const NestedMeshes t = build_meshes(1, 3, 9);
  const Problem p = constant_problem(1, m, Vec2::Zero(), 1.0);
  const Vector bub = compute_bubble(t.local[0], p.fields, Constraint::strong, FormKind::standard);
  const double H = t.coarse.H, h = t.global.h;
  // Nodally exact parabola x(H-x)/(2m); its trapezoidal mean.
  EXPECT_NEAR(compute_tau_bubble(t.coarse, 0, t.local[0], bub), H * H / (12 * m) * (1 - h * h / (H * H)),
              1e-14);
  EXPECT_NEAR(compute_tau_bubble(t.coarse, 0, t.local[0], bub), H * H / (12 * m), 1e-3 * H * H / (12 * m));
}

TEST(TauBubble, SmallerThanSupgTauWhenAdvectionDominates) {
  const NestedMeshes t = build_meshes(2, 3, 8);
  const Problem p = testcase_2d_moderate(std::ldexp(1.0, -8), std::ldexp(1.0, -5));
  OfflineOptions o;
  o.strong = true;
  const BasisStore s = compute_offline(p, t, o);
  for (const auto& e : s.elements) {
    EXPECT_GT(e.peclet, 1.0);
    EXPECT_LT(e.tau_bubble, e.tau_supg);
  }
}

TEST(Effective, BBarIsMeanAdvection) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  for (const Problem& p : {constant_2d(0.05, Vec2(0.3, -0.8)), testcase_2d_moderate(0.05, 0.125)}) {
    OfflineOptions o;
    o.diffusion_lin = o.weak = true;
    const BasisStore s = compute_offline(p, t, o);
    const bool constant = p.descriptor.rfind("constant", 0) == 0;
    for (Index k = 0; k < t.coarse.num_elements(); ++k) {
      Vec2 mean = Vec2::Zero();
      const FineMesh& loc = t.local[k];
      for (Index e = 0; e < loc.num_elements(); ++e) {
        const FineElement fe = fine_element(loc, e);
        mean += fe.measure * p.fields.advection(fe.centroid);
      }
      mean /= t.coarse.measure(k);
      const auto& e = s.elements[k];
      EXPECT_LE((e.b_bar_p1 - mean).norm(), 1e-12);
      EXPECT_LE((e.b_bar_msfem_lin - mean).norm(), 1e-10);
      // Weak correctors only have zero face means, so b.n on the faces
      // enters unless b is constant.
      if (constant) EXPECT_LE((e.b_bar_cr - mean).norm(), 1e-10);
    }
  }
}

TEST(Effective, ConstantDiffusionGivesA) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = constant_2d(0.37, Vec2::Zero());
  OfflineOptions o;
  o.diffusion_lin = o.weak = true;
  const BasisStore s = compute_offline(p, t, o);
  const Mat2 a = 0.37 * Mat2::Identity();
  for (const auto& e : s.elements) {
    EXPECT_LE((e.a_bar_p1 - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((e.a_bar_msfem_lin - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((e.a_bar_cr - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(std::abs(e.r0), 1e-14);
    EXPECT_LE((e.r_g - e.r).norm(), 1e-14);
  }
}

TEST(Effective, MsfemLinEigenvaluesBelowP1) {
  const NestedMeshes t = build_meshes(2, 2, 7);
  Problem p = testcase_2d_moderate(1.0, 1.0 / 8);
  p.fields = diffusion_only(p.fields);
  OfflineOptions o;
  o.diffusion_lin = true;
  const BasisStore s = compute_offline(p, t, o);
  for (const auto& e : s.elements) {
    const Eigen::SelfAdjointEigenSolver<Mat2> lin(0.5 * (e.a_bar_msfem_lin + e.a_bar_msfem_lin.transpose()));
    const Eigen::SelfAdjointEigenSolver<Mat2> p1(e.a_bar_p1);
    EXPECT_LE(lin.eigenvalues().maxCoeff(), p1.eigenvalues().maxCoeff() + 1e-14);
  }
}

TEST(BubbleMoments, Properties) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  Problem p = testcase_2d_moderate(0.05, 0.125);
  p.fields = diffusion_only(p.fields);
  OfflineOptions o;
  o.weak = true;
  for (const auto& e : compute_offline(p, t, o).elements) EXPECT_LE(std::abs(e.r0), 1e-14);

  const NestedMeshes i = build_meshes(1, 3, 10);
  const Problem c = constant_problem(1, 0.01, Vec2(1, 0), 1.0);
  for (const auto& e : compute_offline(c, i, o).elements) EXPECT_LE(std::abs(e.r0), 1e-12);
}

TEST(Offline, ExpansionIdentity) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = testcase_2d_moderate(0.01, 0.0625);
  OfflineOptions o;
  o.strong = true;
  const BasisStore s = compute_offline(p, t, o);
  for (Index k = 0; k < t.coarse.num_elements(); ++k) {
    const auto& e = s.elements[k];
    for (int i = 0; i < 3; ++i) {
      const Affine hat = t.coarse.p1_hat(k, i);
      const Vector expect = interpolate(t.local[k], hat) + hat.g[0] * e.chi_strong[0] + hat.g[1] * e.chi_strong[1];
      EXPECT_LE(max_abs(e.adv_lin[i] - expect), 1e-10);
    }
  }
}

TEST(Offline, BubbleGradientMeansVanish) {
  const NestedMeshes t = build_meshes(2, 2, 6);
  const Problem p = testcase_2d_moderate(0.01, 0.0625);
  OfflineOptions o;
  o.strong = o.weak = true;
  const BasisStore s = compute_offline(p, t, o);
  for (Index k = 0; k < t.coarse.num_elements(); ++k) {
    const FineMesh& loc = t.local[k];
    for (const Vector* b : {&s.elements[k].bubble_strong, &s.elements[k].bubble_weak}) {
      Vec2 g = Vec2::Zero();
      for (Index e = 0; e < loc.num_elements(); ++e) {
        const FineElement fe = fine_element(loc, e);
        for (int i = 0; i < 3; ++i) g += fe.measure * (*b)[loc.elements[e][i]] * fe.grad[i];
      }
      EXPECT_LE(g.cwiseAbs().maxCoeff(), 1e-12 * t.coarse.measure(k));
    }
  }
}

TEST(Offline, IdempotentAndPersistent) {
  const NestedMeshes t = build_meshes(2, 2, 5);
  const Problem p = testcase_2d_moderate(0.02, 0.125);
  OfflineOptions o;
  o.diffusion_lin = o.strong = o.weak = true;
  const BasisStore a = compute_offline(p, t, o);
  o.workers = 3;
  const BasisStore b = compute_offline(p, t, o);
  const auto root = std::filesystem::temp_directory_path() / "msfem_store_test";
  std::filesystem::remove_all(root);
  save_store(a, root.string());
  const auto c = load_store(root.string(), a.key);
  ASSERT_TRUE(c.has_value());
  EXPECT_TRUE(c->loaded);
  for (const BasisStore* other : {&b, &*c}) {
    for (std::size_t k = 0; k < a.elements.size(); ++k) {
      const auto& x = a.elements[k];
      const auto& y = other->elements[k];
      EXPECT_EQ(x.tau_supg, y.tau_supg);
      EXPECT_EQ(x.tau_bubble, y.tau_bubble);
      EXPECT_EQ(x.a_bar_cr, y.a_bar_cr);
      EXPECT_EQ(x.r_g, y.r_g);
      EXPECT_EQ(x.bubble_weak, y.bubble_weak);
      EXPECT_EQ(x.chi_strong[1], y.chi_strong[1]);
      for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(x.adv_cr[i], y.adv_cr[i]);
        EXPECT_EQ(x.msfem_lin[i], y.msfem_lin[i]);
      }
    }
  }
  const BasisStore d = obtain_store(with_load_expression(p, "3"), t, o, root.string());
  EXPECT_TRUE(d.loaded);
  EXPECT_FALSE(load_store(root.string(), "0000000000000000").has_value());
  std::filesystem::remove_all(root);
}
