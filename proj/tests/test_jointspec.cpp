#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ulpac/jointspec.hpp"

using namespace ulpac;

namespace {

/// Every planted point is within tol of a distinct recovered row (greedy
/// is enough at the separations used here).
void expect_recovers(const oracle::Planted& p, const JointSpectrum& js, double tol) {
  const Index n = js.size();
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Index k = 0; k < n; ++k) {
    double best = 1e300;
    Index arg = -1;
    for (Index l = 0; l < n; ++l) {
      if (used[l]) continue;
      double d = 0.0;
      for (Index j = 0; j < js.arity(); ++j) d = std::max(d, std::abs(js.points(l, j) - p.points[k][j]));
      if (d < best) {
        best = d;
        arg = l;
      }
    }
    ASSERT_GE(arg, 0);
    used[arg] = 1;
    EXPECT_LT(best, tol);
  }
}

}  // namespace

TEST(JointDiagonalize, AlreadyDiagonalTuple) {
  const MatrixTuple x{oracle::diag({1, 2, 3}), oracle::diag({-1, 0.5, 0.25})};
  const JointSpectrum js = joint_diagonalize(x);
  EXPECT_LT(js.residual, 1e-15);
  const CMatrix mags = js.q.cwiseAbs().cast<Complex>();
  for (Index r = 0; r < 3; ++r) EXPECT_NEAR(mags.row(r).real().maxCoeff(), 1.0, 1e-14);
}

TEST(JointDiagonalize, RecoversPlantedSpectra) {
  for (Index n : {2, 5, 16}) {
    for (Index m : {1, 2, 3}) {
      const auto p = oracle::planted(n, m, 100 + 10 * n + m, false);
      const JointSpectrum js = joint_diagonalize(p.x);
      expect_recovers(p, js, 1e-9);
      for (Index j = 0; j < m; ++j) EXPECT_LT(op_norm(js.reconstruct(j) - p.x[j]), 1e-10 * n);
      EXPECT_LT(unitarity_defect(js.q), 1e-11 * n);
    }
  }
}

TEST(JointDiagonalize, DegenerateFirstComponent) {
  // Component 1 is scalar on a 3-dimensional block; component 2 separates it.
  SplitMix64 rng(31);
  const CMatrix q = random_unitary(4, rng);
  const CMatrix d1 = oracle::diag({0.5, 0.5, 0.5, -0.5});
  const CMatrix d2 = oracle::diag({0.1, 0.2, 0.3, 0.3});
  const MatrixTuple x{q * d1 * q.adjoint(), q * d2 * q.adjoint()};
  const JointSpectrum js = joint_spectrum(x);
  EXPECT_NEAR(js.points(0, 0).real(), -0.5, 1e-10);
  EXPECT_NEAR(js.points(1, 1).real(), 0.1, 1e-10);
  EXPECT_NEAR(js.points(3, 1).real(), 0.3, 1e-10);
}

TEST(JointDiagonalize, SingleHermitianAgreesWithHermEig) {
  SplitMix64 rng(32);
  const CMatrix h = oracle::random_hermitian(7, rng);
  const JointSpectrum js = joint_spectrum(MatrixTuple{h});
  const HermEigDecomposition e = herm_eig(h);
  for (Index k = 0; k < 7; ++k) EXPECT_NEAR(js.points(k, 0).real(), e.eigenvalues(k), 1e-11);
}

TEST(JointDiagonalize, RejectsNonCommuting) {
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 0) = 1;
  b(0, 1) = b(1, 0) = 1;
  EXPECT_THROW(joint_diagonalize(MatrixTuple{a, b}), InvalidInput);
}

TEST(JointSpectrum, Examples) {
  const JointSpectrum js = joint_spectrum(MatrixTuple{oracle::diag({2, 1}), oracle::diag({4, 3})});
  EXPECT_NEAR(js.points(0, 0).real(), 1, 1e-15);
  EXPECT_NEAR(js.points(0, 1).real(), 3, 1e-15);
  EXPECT_NEAR(js.points(1, 0).real(), 2, 1e-15);
  EXPECT_NEAR(js.points(1, 1).real(), 4, 1e-15);
  const JointSpectrum h = joint_spectrum(MatrixTuple{oracle::diag({0.5, -0.5})});
  EXPECT_NEAR(h.points(0, 0).real(), -0.5, 1e-15);
  EXPECT_NEAR(h.points(1, 0).real(), 0.5, 1e-15);
}

TEST(JointSpectrum, UnitaryInvariance) {
  SplitMix64 rng(33);
  const MatrixTuple x{oracle::diag({0.3, -0.2, 0.9}), oracle::diag({0.1, 0.4, -0.6})};
  const CMatrix w = random_unitary(3, rng);
  const JointSpectrum a = joint_spectrum(x), b = joint_spectrum(x.conjugated(w));
  EXPECT_LT((a.points - b.points).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Partition, Examples) {
  SplitMix64 rng(34);
  const CMatrix h = oracle::random_hermitian(3, rng);
  const HermitianPartition ph = partition_mcintosh_pryde(MatrixTuple{h});
  EXPECT_LT(op_norm(ph.real_part(0) - h), 1e-15);
  EXPECT_LT(op_norm(ph.imag_part(0)), 1e-15);
  EXPECT_TRUE(ph.commuting);
  EXPECT_TRUE(ph.semisimple);

  const HermitianPartition pi = partition_mcintosh_pryde(MatrixTuple{Complex(0, 1) * CMatrix::Identity(3, 3)});
  EXPECT_LT(op_norm(pi.real_part(0)), 1e-15);
  EXPECT_LT(op_norm(pi.imag_part(0) - CMatrix::Identity(3, 3)), 1e-15);

  const double th = 0.7;
  const HermitianPartition pu = partition_mcintosh_pryde(MatrixTuple{oracle::diag({std::polar(1.0, th)})});
  EXPECT_NEAR(pu.real_part(0)(0, 0).real(), std::cos(th), 1e-15);
  EXPECT_NEAR(pu.imag_part(0)(0, 0).real(), std::sin(th), 1e-15);
}

TEST(Partition, RoundTrip) {
  SplitMix64 rng(35);
  for (const MatrixTuple& x : {MatrixTuple{oracle::random_hermitian(3, rng)},
                               MatrixTuple{Complex(0, 1) * CMatrix::Identity(3, 3)},
                               MatrixTuple::zeros(2, 3)}) {
    EXPECT_LT(eth(recombine_partition(partition_mcintosh_pryde(x)), x), 1e-15);
  }
  const auto p = oracle::planted(6, 2, 36, false);
  const HermitianPartition hp = partition_mcintosh_pryde(p.x);
  EXPECT_TRUE(hp.commuting);
  EXPECT_LT(eth(recombine_partition(hp), p.x), 1e-14);
  EXPECT_LT(eth(recombine_parts(hp.parts), p.x), 1e-14);
}

TEST(Partition, NonNormalIsNotCommuting) {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1;
  EXPECT_FALSE(partition_mcintosh_pryde(MatrixTuple{a}).commuting);
}

TEST(MatchSpectra, IdentityAndTransposition) {
  const CMatrix pts = (CMatrix(3, 1) << 0.1, 0.5, 0.9).finished();
  const SpectralMatching same = match_points(pts, pts);
  EXPECT_EQ(same.perm, (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(same.cost, 0.0);
  const CMatrix swapped = (CMatrix(3, 1) << 0.5, 0.1, 0.9).finished();
  EXPECT_EQ(match_points(pts, swapped).perm, (std::vector<Index>{1, 0, 2}));
}

TEST(MatchSpectra, PerturbedDiagonalCostWithinDelta) {
  SplitMix64 rng(37);
  const double delta = 0.05;
  for (int t = 0; t < 20; ++t) {
    const Index n = 6;
    CMatrix a(n, 2), b(n, 2);
    for (Index k = 0; k < n; ++k) {
      for (Index j = 0; j < 2; ++j) {
        a(k, j) = rng.uniform(-1, 1);
        b(k, j) = a(k, j) + rng.uniform(-delta, delta);
      }
    }
    // shuffle b's rows
    std::vector<Index> order{3, 0, 5, 1, 4, 2};
    CMatrix bs(n, 2);
    for (Index k = 0; k < n; ++k) bs.row(k) = b.row(order[k]);
    const SpectralMatching mt = match_points(a, bs);
    EXPECT_LE(mt.cost, delta);
    EXPECT_NEAR(mt.cost, oracle::brute_bottleneck(a, bs), 1e-15);
  }
}

TEST(MatchSpectra, SizeMismatch) {
  EXPECT_THROW(match_points(CMatrix::Zero(2, 1), CMatrix::Zero(3, 1)), InvalidInput);
}

TEST(Intertwiner, EqualDiagonalTuples) {
  const MatrixTuple x{oracle::diag({0.1, 0.4, -0.3})};
  const IntertwinerResult r = intertwiner(x, x);
  EXPECT_LT(op_norm(r.w - CMatrix::Identity(3, 3)), 1e-14);
  EXPECT_LT(r.epsilon_hat, 1e-14);
}

TEST(Intertwiner, CommutingDiagonalPair) {
  const MatrixTuple x{oracle::diag({0, 1})}, y{oracle::diag({0.1, 0.9})};
  const IntertwinerResult r = intertwiner(x, y);
  EXPECT_LT(op_norm(r.w - CMatrix::Identity(2, 2)), 1e-14);
  EXPECT_NEAR(r.epsilon_hat, 0.1, 1e-14);
}

TEST(Intertwiner, ConjugatedDiagonalBound) {
  SplitMix64 rng(38);
  const double delta = 0.05;
  for (int t = 0; t < 10; ++t) {
    const MatrixTuple y{oracle::diag({0.9, -0.2, 0.4, -0.7}), oracle::diag({0.3, 0.3, -0.8, 0.1})};
    const CMatrix k = random_hermitian_contraction(4, rng);
    const CMatrix v = expm_i_pi(k * (delta / kPi));  // ||1 - v|| <= delta
    ASSERT_LE(op_norm(CMatrix::Identity(4, 4) - v), delta);
    const MatrixTuple x = y.conjugated(v);
    const IntertwinerResult r = intertwiner(x, y);
    EXPECT_LE(r.epsilon_hat, 2 * delta * y.max_norm() + delta);
    for (Index j = 0; j < 2; ++j) {
      EXPECT_LT(op_norm(commutator(r.w * x[j] * r.w.adjoint(), y[j])), 1e-9 * 4);
    }
    EXPECT_LT(unitarity_defect(r.w), 1e-12);
  }
}

TEST(Intertwiner, AlignedMatchesConjugation) {
  const auto p = oracle::planted(8, 2, 39, true);
  const auto q = oracle::planted(8, 2, 40, true);
  const IntertwinerResult r = intertwiner(p.x, p.x.conjugated(q.q));
  for (Index j = 0; j < 2; ++j) EXPECT_LT(op_norm(r.aligned(j) - r.w * p.x[j] * r.w.adjoint()), 1e-10);
}

TEST(Intertwiner, NearlyDegeneratePairIsNotSwapped) {
  // The third pair fixes the bottleneck at 0.02, so both pairings of the
  // first two points are bottleneck-optimal; the swap has the smaller total
  // distance but moves x by 0.02 instead of leaving W = 1.
  const MatrixTuple x{oracle::diag({0.30, 0.32, -0.5})};
  const MatrixTuple y{oracle::diag({0.315, 0.305, -0.48})};
  const IntertwinerResult r = intertwiner(x, y);
  EXPECT_LT(op_norm(r.w - CMatrix::Identity(3, 3)), 1e-12);
  EXPECT_NEAR(r.epsilon_hat, 0.02, 1e-12);
}
