#pragma once

// Pseudospectral retractive approximants: spectra of hermitian contractions
// (and of commuting tuples of them) are snapped to the uniform grid
// {-1 + 2(k-1) delta}, producing a commuting approximant built from an
// orthogonal partition of unity.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "ulpac/jointspec.hpp"
#include "ulpac/matcore.hpp"
#include "ulpac/varieties.hpp"

namespace ulpac {

struct SpectralGrids {
  double delta = 0.0;
  Index m_delta = 0;
  std::vector<double> rep_points;      // x_k = -1 + 2(k-1) delta, k = 1..M
  std::vector<double> support_points;  // cell boundaries x_k - delta and x_M + delta

  /// Index of the nearest representation point, ties toward +.
  Index nearest(double v) const {
    const double u = std::floor((v + 1.0) / (2.0 * delta) + 0.5);
    if (!(u >= 0.0)) return 0;
    return std::min<Index>(static_cast<Index>(u), m_delta - 1);
  }
};

inline SpectralGrids build_grids(double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw InvalidInput("build_grids: delta must lie in (0, 1]");
  SpectralGrids g;
  g.delta = delta;
  g.m_delta = 1 + static_cast<Index>(std::ceil(1.0 / delta - 1e-12));
  for (Index k = 0; k < g.m_delta; ++k) {
    g.rep_points.push_back(-1.0 + 2.0 * static_cast<double>(k) * delta);
  }
  for (Index k = 0; k <= g.m_delta; ++k) {
    g.support_points.push_back(-1.0 - delta + 2.0 * static_cast<double>(k) * delta);
  }
  return g;
}

/// Orthogonal partition of unity {P_k} with a value vector per projector.
/// P_k = B_k B_k* where B_k are the columns `members[k]` of `basis`.
struct ProjectiveDecomposition {
  std::vector<CMatrix> projectors;
  std::vector<RVector> values;  // values[k](j): value of component j on P_k
  std::vector<Index> ranks;
  CMatrix basis;
  std::vector<std::vector<Index>> members;

  Index size() const { return static_cast<Index>(projectors.size()); }

  /// sum_k values[k](component) P_k
  CMatrix assemble(Index component) const {
    const Index n = basis.rows();
    CMatrix out = CMatrix::Zero(n, n);
    for (Index k = 0; k < size(); ++k) out += values[k](component) * projectors[k];
    return out;
  }
};

/// Largest violation among idempotence, hermiticity, pairwise
/// orthogonality and completeness. Returns +inf if some P_k is zero.
inline double partition_of_unity_defect(const std::vector<CMatrix>& projectors) {
  if (projectors.empty()) return std::numeric_limits<double>::infinity();
  const Index n = projectors.front().rows();
  CMatrix sum = CMatrix::Zero(n, n);
  double d = 0.0;
  for (std::size_t a = 0; a < projectors.size(); ++a) {
    const CMatrix& p = projectors[a];
    if (op_norm(p) < 0.5) return std::numeric_limits<double>::infinity();
    d = std::max({d, op_norm(p * p - p), hermiticity_defect(p)});
    for (std::size_t b = a + 1; b < projectors.size(); ++b) {
      d = std::max(d, op_norm(p * projectors[b]));
    }
    sum += p;
  }
  return std::max(d, op_norm(sum - CMatrix::Identity(n, n)));
}

struct PsraResult {
  MatrixTuple approximant;
  ProjectiveDecomposition decomposition;
  std::vector<std::vector<double>> rep_sets;  // distinct values used, per component
  SpectralGrids grids;
  double achieved_error = 0.0;  // eth(x, approximant)
};

/// Post-processing applied to each cell's value vector (e.g. clamping
/// into a disk); identity when empty.
using ValueMap = std::function<void(RVector&)>;

namespace detail {

/// Grid cell of each value. Values closer than 1e-12 form a degenerate
/// cluster; a cluster that straddles a cell boundary is assigned to its
/// lower cell.
inline std::vector<Index> assign_cells(const RVector& values, const SpectralGrids& grids) {
  const Index n = values.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values(a) < values(b); });
  std::vector<Index> cells(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) cells[k] = grids.nearest(values(k));
  Index start = 0;
  for (Index k = 1; k <= n; ++k) {
    if (k == n || values(order[k]) - values(order[k - 1]) > 1e-12) {
      const Index lowest = cells[order[start]];
      for (Index i = start; i < k; ++i) cells[order[i]] = lowest;
      start = k;
    }
  }
  return cells;
}

inline CMatrix projector_from(const CMatrix& basis, const std::vector<Index>& cols) {
  const CMatrix b = select_cols(basis, cols);
  return hermitian_part(b * b.adjoint());
}

}  // namespace detail

/// Groups basis columns with identical value rows into one projector each.
inline ProjectiveDecomposition decomposition_from_values(const CMatrix& basis,
                                                         const RMatrix& values) {
  const Index n = values.rows();
  const Index m = values.cols();
  if (basis.cols() != n) throw InvalidInput("decomposition_from_values: shape mismatch");
  std::map<std::vector<double>, std::vector<Index>> groups;
  for (Index k = 0; k < n; ++k) {
    std::vector<double> key(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) key[j] = values(k, j);
    groups[key].push_back(k);
  }

  ProjectiveDecomposition d;
  d.basis = basis;
  for (auto& [key, cols] : groups) {
    d.values.push_back(Eigen::Map<const RVector>(key.data(), m));
    d.ranks.push_back(static_cast<Index>(cols.size()));
    d.projectors.push_back(detail::projector_from(basis, cols));
    d.members.push_back(std::move(cols));
  }
  return d;
}

/// Partition of unity grouping the columns of `basis` by the (mapped)
/// grid values of their joint points. `points` is n x m real: row k holds
/// the eigenvalues of the m components on basis column k. Groups are
/// ordered lexicographically by value vector.
inline ProjectiveDecomposition quantize_joint(const CMatrix& basis, const RMatrix& points,
                                              const SpectralGrids& grids,
                                              const ValueMap& value_map = {}) {
  const Index n = points.rows();
  const Index m = points.cols();
  std::vector<std::vector<Index>> cells(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) cells[j] = detail::assign_cells(points.col(j), grids);

  RMatrix values(n, m);
  for (Index k = 0; k < n; ++k) {
    RVector v(m);
    for (Index j = 0; j < m; ++j) v(j) = grids.rep_points[cells[j][k]];
    if (value_map) value_map(v);
    values.row(k) = v.transpose();
  }
  return decomposition_from_values(basis, values);
}

namespace detail {

inline PsraResult finish_psra(const MatrixTuple& x, ProjectiveDecomposition d,
                              const SpectralGrids& grids) {
  PsraResult r;
  const Index m = x.size();
  std::vector<CMatrix> approx(static_cast<std::size_t>(m));
  r.rep_sets.resize(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    approx[j] = d.assemble(j);
    for (const auto& v : d.values) r.rep_sets[j].push_back(v(j));
    std::sort(r.rep_sets[j].begin(), r.rep_sets[j].end());
    r.rep_sets[j].erase(std::unique(r.rep_sets[j].begin(), r.rep_sets[j].end()),
                        r.rep_sets[j].end());
  }
  r.approximant = MatrixTuple(std::move(approx));
  r.decomposition = std::move(d);
  r.grids = grids;
  r.achieved_error = eth(x, r.approximant);
  return r;
}

inline void require_hermitian_contraction(const CMatrix& x, double tol, const char* op) {
  const double h = hermiticity_defect(x);
  if (h > tol) throw InvalidInput(std::string(op) + ": input is not hermitian");
  if (op_norm(x) > 1.0 + 1e-8) throw InvalidInput(std::string(op) + ": input is not a contraction");
}

}  // namespace detail

/// Spectral projectors of a hermitian contraction grouped by the nearest
/// grid point of their eigenvalue; empty groups are dropped.
inline ProjectiveDecomposition projective_decomposition_1d(const CMatrix& x, double delta,
                                                           double tol = -1.0) {
  detail::require_square(x, "projective_decomposition_1d");
  if (tol < 0) tol = default_tol(x.rows());
  detail::require_hermitian_contraction(x, tol, "projective_decomposition_1d");
  const HermEigDecomposition e = herm_eig(x, tol);
  const RMatrix points = e.eigenvalues;
  return quantize_joint(e.q, points, build_grids(delta));
}

/// Hermitian delta-PSRA of a hermitian contraction: each eigenvalue is
/// rounded to its nearest grid point.
inline PsraResult psra_1d(const CMatrix& x, double delta, double tol = -1.0) {
  detail::require_square(x, "psra_1d");
  return detail::finish_psra(MatrixTuple{x}, projective_decomposition_1d(x, delta, tol),
                             build_grids(delta));
}

/// Commuting delta-PSRA of a commuting tuple of hermitian contractions.
/// The shared partition consists of the nonzero products of the
/// components' spectral cell projectors.
inline PsraResult psra_md(const MatrixTuple& x, double delta, double tol = -1.0,
                          std::uint64_t seed = kDefaultDiagSeed) {
  if (x.size() == 1) return psra_1d(x[0], delta, tol);
  const Index n = x.dim();
  if (tol < 0) tol = 1e-9 * static_cast<double>(n);
  const SpectralGrids grids = build_grids(delta);
  if (max_commutator(x) > tol) throw InvalidInput("psra_md: components do not commute");
  for (const auto& c : x) detail::require_hermitian_contraction(c, tol, "psra_md");
  const JointSpectrum js = joint_diagonalize(x, tol, seed);
  const RMatrix points = js.points.real();
  return detail::finish_psra(x, quantize_joint(js.q, points, grids), grids);
}

}  // namespace ulpac
