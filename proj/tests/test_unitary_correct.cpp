#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ulpac/unitary_correct.hpp"

using namespace ulpac;

namespace {

/// D = diag of `values` repeated in blocks of `block` in a random basis.
ProjectiveDecomposition block_decomposition(const std::vector<double>& values, Index block,
                                            SplitMix64& rng) {
  const Index r = static_cast<Index>(values.size());
  const Index n = r * block;
  const CMatrix q = random_unitary(n, rng);
  RMatrix v(n, 1);
  for (Index k = 0; k < n; ++k) v(k, 0) = values[k / block];
  return decomposition_from_values(q, v);
}

CMatrix rotation(double th) {
  CMatrix r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

}  // namespace

TEST(ProjectorTransport, EqualProjectorsGiveIdentity) {
  const CMatrix p = oracle::e(3, 0) + oracle::e(3, 2);
  EXPECT_LT(op_norm(projector_transport(p, p) - CMatrix::Identity(3, 3)), 1e-15);
}

TEST(ProjectorTransport, PlaneRotation) {
  const double th = kPi / 3;
  const CMatrix p = oracle::e(2, 0);
  const CMatrix pt = rotation(th) * p * rotation(th).adjoint();
  const CMatrix w = projector_transport(p, pt);
  EXPECT_LT(op_norm(w.adjoint() * p * w - pt), 1e-14);
  EXPECT_NEAR(op_norm(CMatrix::Identity(2, 2) - w), 2 * std::sin(kPi / 6), 1e-14);
  EXPECT_LE(op_norm(CMatrix::Identity(2, 2) - w), std::sqrt(2.0) * std::sin(th) + 1e-14);
  // w is the rotation by pi/3 (transposed convention)
  EXPECT_LT(op_norm(w - rotation(-th)), 1e-14);
}

TEST(ProjectorTransport, RankMismatchIsRejected) {
  EXPECT_THROW(projector_transport(CMatrix::Identity(2, 2), oracle::e(2, 0)), InvalidInput);
}

TEST(ProjectorTransport, RandomSmallRotationsSatisfyBound) {
  SplitMix64 rng(51);
  for (int t = 0; t < 20; ++t) {
    const Index n = 6;
    const CMatrix q = random_unitary(n, rng);
    const CMatrix p = q * (oracle::e(n, 0) + oracle::e(n, 1)) * q.adjoint();
    const CMatrix v = expm_i_pi(0.1 * random_hermitian_contraction(n, rng));
    const CMatrix pt = v * p * v.adjoint();
    const CMatrix w = projector_transport(p, pt);
    EXPECT_LT(op_norm(w.adjoint() * p * w - pt), 1e-12);
    EXPECT_LE(op_norm(CMatrix::Identity(n, n) - w), std::sqrt(2.0) * op_norm(p - pt) + 1e-12);
  }
}

TEST(CommutingCorrection, ExactlyCommutingW) {
  SplitMix64 rng(52);
  const ProjectiveDecomposition d = block_decomposition({-0.5, 0.5}, 2, rng);
  // W = sum_k e^{i theta_k} P_k commutes with D
  const CMatrix w = std::polar(1.0, 0.3) * d.projectors[0] + std::polar(1.0, -1.1) * d.projectors[1];
  const CorrectionResult r = commuting_unitary_correction(w, d, 1e-12);
  EXPECT_LT(op_norm(r.z - w.adjoint()), 1e-13);
  EXPECT_LT(r.achieved, 1e-13);
  EXPECT_TRUE(r.meets_target);
}

TEST(CommutingCorrection, PerturbationBound) {
  SplitMix64 rng(53);
  for (Index r : {2, 3, 5}) {
    std::vector<double> values;
    for (Index k = 0; k < r; ++k) values.push_back(-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(r - 1));
    const double gap = 2.0 / static_cast<double>(r - 1);
    const ProjectiveDecomposition d = block_decomposition(values, 2, rng);
    const Index n = d.basis.rows();
    CMatrix dm = CMatrix::Zero(n, n);
    for (Index k = 0; k < d.size(); ++k) dm += d.values[k](0) * d.projectors[k];
    const CMatrix w = expm_i_pi(0.01 * random_hermitian_contraction(n, rng));
    const double moved = op_norm(w * dm * w.adjoint() - dm);
    const CorrectionResult c = commuting_unitary_correction(w, d, 2.0);
    EXPECT_LE(c.achieved, std::sqrt(2.0) * static_cast<double>(r) * moved / gap + 1e-12);
    EXPECT_LE(c.achieved, c.transport_sum + 1e-8);
    for (const auto& p : d.projectors) EXPECT_LT(op_norm(commutator(c.z, p)), 1e-9 * n);
    EXPECT_LT(unitarity_defect(c.z), 1e-12 * n);
  }
}

TEST(CommutingCorrection, RequiresTwoValues) {
  SplitMix64 rng(54);
  const ProjectiveDecomposition d = block_decomposition({0.25}, 3, rng);
  EXPECT_THROW(commuting_unitary_correction(CMatrix::Identity(3, 3), d, 1.0), InvalidInput);
}

TEST(CommutingCorrection, LargeDisplacementIsAConstructionError) {
  // W swaps the two eigenlines of D.
  const ProjectiveDecomposition d = decomposition_from_values(CMatrix::Identity(2, 2),
                                                              (RMatrix(2, 1) << -1, 1).finished());
  CMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  try {
    commuting_unitary_correction(swap, d, 1.0);
    FAIL() << "expected a ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.stage(), "transport");
  }
}

TEST(CommutingCorrection, TargetIsReportedNotEnforced) {
  SplitMix64 rng(55);
  const ProjectiveDecomposition d = block_decomposition({-1, 0, 1}, 2, rng);
  const CMatrix w = expm_i_pi(0.05 * random_hermitian_contraction(6, rng));
  const CorrectionResult loose = commuting_unitary_correction(w, d, 2.0);
  const CorrectionResult tight = commuting_unitary_correction(w, d, 1e-9);
  EXPECT_TRUE(loose.meets_target);
  EXPECT_FALSE(tight.meets_target);
  EXPECT_EQ(loose.achieved, tight.achieved);
}
