#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ulpac/experiment.hpp"
#include "ulpac/homotopy.hpp"

using namespace ulpac;

namespace {

/// Independent re-verification of a built homotopy at `samples` points per
/// segment: membership, locality against the certified epsilon and
/// endpoint exactness.
void expect_sound(const Homotopy& h, VarietyKind kind, const MatrixTuple& x, const MatrixTuple& y,
                  Index samples) {
  const Index n = x.dim();
  const double tol = 1e-8 * static_cast<double>(n);
  EXPECT_LE(eth(h.path.start(), x), tol);
  EXPECT_LE(eth(h.path.finish(), y), tol);
  const HomotopyCertificate c = verify_path(h.path, kind, x, h.certificate.epsilon_hat, samples, &y);
  EXPECT_LE(c.max_membership_defect, tol);
  EXPECT_LE(c.max_eth_deviation, h.certificate.epsilon_hat);
  EXPECT_TRUE(c.passes());
  EXPECT_TRUE(h.certificate.passes());
  if (kind == VarietyKind::Torus) EXPECT_LE(c.max_unitarity_defect, tol);
}

MatrixTuple conjugate_pair_target(const MatrixTuple& x, double move, SplitMix64& rng) {
  const CMatrix k = random_hermitian_contraction(x.dim(), rng);
  // ||1 - e^{i pi t K}|| <= pi t ||K|| = move
  return x.conjugated(expm_i_pi(k * (move / kPi)));
}

}  // namespace

TEST(CubeHomotopy, EqualDiagonalInputs) {
  const MatrixTuple x{oracle::diag({0.3, -0.7, 0.1}), oracle::diag({0.5, 0.5, -0.2})};
  const Homotopy h = cube_homotopy(x, x, 0.1, 4.0);
  EXPECT_EQ(eth(h.path.start(), x), 0.0);
  EXPECT_EQ(eth(h.path.finish(), x), 0.0);
  // 0.3 sits at a grid midpoint, so the deviation is delta up to rounding
  EXPECT_LE(h.certificate.max_eth_deviation, 0.1 + 1e-12);
  EXPECT_TRUE(h.certificate.passes());
}

TEST(CubeHomotopy, SmallDiagonalExampleAtThousandSamples) {
  const MatrixTuple x{oracle::diag({0.5, -0.5})}, y{oracle::diag({0.55, -0.45})};
  HomotopyOptions opt;
  opt.samples_per_segment = 1000;
  const Homotopy h = cube_homotopy(x, y, 0.1, 4.0, opt);
  EXPECT_EQ(h.certificate.samples, 4 * 1000);
  EXPECT_LE(h.certificate.max_membership_defect, 1e-8);
  EXPECT_LE(h.certificate.max_eth_deviation, h.certificate.epsilon_hat);
  expect_sound(h, VarietyKind::Cube, x, y, 1000);
}

TEST(CubeHomotopy, ConjugatePerturbationPair) {
  SplitMix64 rng(71);
  for (int t = 0; t < 5; ++t) {
    const MatrixTuple x = gen_member(VarietyKind::Cube, 6, 2, 700 + t);
    MatrixTuple y = conjugate_pair_target(x, 0.01, rng);
    for (Index j = 0; j < 2; ++j) y[j] = detail::hermitian_part(y[j]);
    const Homotopy h = cube_homotopy(x, y, 0.05, 4.0);
    expect_sound(h, VarietyKind::Cube, x, y, 256);
  }
}

TEST(CubeHomotopy, BudgetsFollowTheirFormulas) {
  const MatrixTuple x = gen_member(VarietyKind::Cube, 5, 2, 72);
  const MatrixTuple y = gen_perturbation(x, VarietyKind::Cube, 0.05, 73);
  const Homotopy h = cube_homotopy(x, y, 0.05, 4.0);
  const HomotopyCertificate& c = h.certificate;
  EXPECT_DOUBLE_EQ(c.eps1, (2 * 4.0 + 3) * 0.05);
  EXPECT_DOUBLE_EQ(c.eps2, h.diagnostics.curved ? 2 * h.diagnostics.omega : 0.0);
  EXPECT_DOUBLE_EQ(c.eps3, c.eps2 + (4.0 + 1) * 0.05);
  EXPECT_DOUBLE_EQ(c.epsilon_budget, std::max(c.eps1, c.eps3));
  EXPECT_EQ(c.n_projectors, h.diagnostics.decomposition.size());
  EXPECT_LT(h.diagnostics.omega, 2.0);
}

TEST(CubeHomotopy, PathRunsThroughTheNodes) {
  const MatrixTuple x = gen_member(VarietyKind::Cube, 6, 2, 74);
  const MatrixTuple y = gen_perturbation(x, VarietyKind::Cube, 0.05, 75);
  const Homotopy h = cube_homotopy(x, y, 0.05, 4.0);
  const auto& nodes = h.diagnostics.nodes;
  ASSERT_EQ(nodes.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_LT(eth(h.path(kSegmentBreaks[k]), nodes[k]), 1e-9 * 6) << k;
  }
  // X~ is built from the decomposition and commutes with Lambda(X)
  for (Index j = 0; j < 2; ++j) {
    EXPECT_LT(op_norm(commutator(nodes[2][j], nodes[3][j])), 1e-9 * 6);
    EXPECT_LE(op_norm(nodes[2][j] - nodes[3][j]), 0.05 + 1e-10);
  }
}

TEST(CubeHomotopy, CurvedSegmentPreservesSpectrum) {
  const MatrixTuple x = gen_member(VarietyKind::Cube, 8, 2, 76);
  const MatrixTuple y = gen_perturbation(x, VarietyKind::Cube, 0.05, 77);
  const Homotopy h = cube_homotopy(x, y, 0.05, 4.0);
  ASSERT_TRUE(h.diagnostics.curved);
  const MatrixTuple& x_tilde = h.diagnostics.nodes[2];
  for (Index j = 0; j < 2; ++j) {
    const RVector ref = herm_eig(x_tilde[j]).eigenvalues;
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const CMatrix a = h.path.piece_at(1, s)[j];
      const RVector ev = herm_eig(detail::hermitian_part(a)).eigenvalues;
      EXPECT_LT((ev - ref).cwiseAbs().maxCoeff(), 1e-10 * 8);
    }
  }
}

TEST(CubeHomotopy, RejectsInvalidInputs) {
  const MatrixTuple x{oracle::diag({0.5, -0.5})};
  EXPECT_THROW(cube_homotopy(x, MatrixTuple{oracle::diag({0.9, -0.5})}, 0.1, 4.0), InvalidInput);
  EXPECT_THROW(cube_homotopy(x, MatrixTuple{oracle::diag({1.5, -0.5})}, 1.0, 4.0), InvalidInput);
  EXPECT_THROW(cube_homotopy(x, x, 0.0, 4.0), InvalidInput);
  EXPECT_THROW(cube_homotopy(x, MatrixTuple{oracle::diag({0.5, -0.5, 0})}, 0.1, 4.0), InvalidInput);
}

TEST(CubeHomotopy, GridPointAboveOneIsClamped) {
  // delta = 0.41 puts the top grid point at 1.05
  const MatrixTuple x{oracle::diag({0.9, -0.3})}, y{oracle::diag({0.95, -0.2})};
  const Homotopy h = cube_homotopy(x, y, 0.41, 4.0);
  EXPECT_LE(op_norm(h.diagnostics.nodes[2][0]), 1.0 + 1e-12);
  expect_sound(h, VarietyKind::Cube, x, y, 64);
}

TEST(DiskHomotopy, EqualInputs) {
  const MatrixTuple z = gen_member(VarietyKind::Disk, 4, 2, 78);
  const Homotopy h = disk_homotopy(z, z, 0.1, 4.0);
  expect_sound(h, VarietyKind::Disk, z, z, 64);
}

TEST(DiskHomotopy, PerturbedDiagonal) {
  const MatrixTuple z{oracle::diag({Complex(0.3, 0.4), Complex(-0.6, 0.1), Complex(0, -0.99)})};
  const MatrixTuple s{oracle::diag({Complex(0.31, 0.38), Complex(-0.58, 0.12), Complex(0.01, -0.995)})};
  const Homotopy h = disk_homotopy(z, s, 0.1, 4.0);
  expect_sound(h, VarietyKind::Disk, z, s, 256);
}

TEST(DiskHomotopy, HermitianInputsMatchCubePath) {
  const MatrixTuple x = gen_member(VarietyKind::Cube, 5, 2, 79);
  const MatrixTuple y = gen_perturbation(x, VarietyKind::Cube, 0.025, 80);
  const Homotopy hc = cube_homotopy(x, y, 0.05, 4.0);
  const Homotopy hd = disk_homotopy(x, y, 0.05, 4.0);
  for (double t : {0.0, 0.06, 0.125, 0.2, 0.3, 0.5, 0.8, 1.0}) {
    EXPECT_LT(eth(hc.path(t), hd.path(t)), 1e-8 * 5) << t;
  }
}

TEST(DiskHomotopy, RequiresHalfDelta) {
  const MatrixTuple z{oracle::diag({Complex(0.3, 0.4)})}, s{oracle::diag({Complex(0.3, 0.47)})};
  EXPECT_THROW(disk_homotopy(z, s, 0.1, 4.0), InvalidInput);
  EXPECT_NO_THROW(disk_homotopy(z, s, 0.14, 4.0));
}

TEST(DiskHomotopy, SeededPairs) {
  ExperimentConfig c;
  c.variety = VarietyKind::Disk;
  c.n = 6;
  for (Index t = 0; t < 4; ++t) {
    const TrialPair p = trial_pair(c, c.n, t);
    const Homotopy h = disk_homotopy(p.x, p.y, c.delta, c.k_m);
    expect_sound(h, VarietyKind::Disk, p.x, p.y, 128);
  }
}

TEST(TorusHomotopy, EqualInputs) {
  const MatrixTuple u = gen_member(VarietyKind::Torus, 4, 2, 81);
  const Homotopy h = torus_homotopy(u, u, 0.1, 4.0);
  expect_sound(h, VarietyKind::Torus, u, u, 64);
}

TEST(TorusHomotopy, TwoByTwoExample) {
  const Complex i(0, 1);
  const MatrixTuple u{oracle::diag({Complex(1, 0), i})};
  const MatrixTuple v{oracle::diag({std::polar(1.0, 0.1), i})};
  const Homotopy h = torus_homotopy(u, v, 0.1, 4.0);
  EXPECT_LE(h.certificate.max_eth_deviation, h.certificate.epsilon_hat);
  expect_sound(h, VarietyKind::Torus, u, v, 256);
}

TEST(TorusHomotopy, ConjugatePerturbationPair) {
  SplitMix64 rng(82);
  for (int t = 0; t < 5; ++t) {
    const MatrixTuple u = gen_member(VarietyKind::Torus, 6, 2, 800 + t);
    const MatrixTuple v = conjugate_pair_target(u, 0.01, rng);
    const Homotopy h = torus_homotopy(u, v, 0.05, 4.0);
    expect_sound(h, VarietyKind::Torus, u, v, 256);
  }
}

TEST(TorusHomotopy, ShortArcAcrossTheBranchCut) {
  // eigenvalue phases pi - 0.02 and -pi + 0.02 are 0.04 apart on the circle
  const MatrixTuple u{oracle::diag({std::polar(1.0, kPi - 0.02), Complex(1, 0)})};
  const MatrixTuple v{oracle::diag({std::polar(1.0, -kPi + 0.02), Complex(1, 0)})};
  const Homotopy h = torus_homotopy(u, v, 0.1, 4.0);
  expect_sound(h, VarietyKind::Torus, u, v, 256);
  EXPECT_LT(h.certificate.max_eth_deviation, 0.2);
}

TEST(TorusHomotopy, RejectsNonUnitary) {
  const MatrixTuple u{oracle::diag({1.0, 0.5})};
  EXPECT_THROW(torus_homotopy(u, u, 0.1, 4.0), InvalidInput);
}

TEST(TorusHelpers, PhaseQuantization) {
  EXPECT_EQ(detail::circle_grid_size(kPi / 4), 4);
  EXPECT_EQ(detail::quantize_phase(0.0, 4), 0.0);
  EXPECT_EQ(detail::quantize_phase(0.3, 4), 0.5);
  EXPECT_EQ(detail::quantize_phase(-0.9, 4), 1.0);  // -1 wraps to 1
  EXPECT_EQ(detail::wrap_exponent(-1.0), 1.0);
  EXPECT_NEAR(detail::wrap_exponent(2.5), 0.5, 1e-15);
  Index ties = 0;
  const RVector a = (RVector(2) << 0.9, 0.0).finished();
  const RVector b = (RVector(2) << -0.9, 1.0).finished();
  const RVector g = detail::geodesic_target(a, b, ties);
  EXPECT_NEAR(g(0), 1.1, 1e-15);
  EXPECT_EQ(g(1), 1.0);
  EXPECT_EQ(ties, 1);
}

TEST(BuildHomotopy, DispatchesOnVariety) {
  for (VarietyKind k : kAllVarieties) {
    const MatrixTuple x = gen_member(k, 3, 1, 83);
    EXPECT_EQ(build_homotopy(k, x, x, 0.1, 4.0).certificate.variety, k);
  }
}
