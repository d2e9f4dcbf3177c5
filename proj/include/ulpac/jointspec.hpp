#pragma once

// Simultaneous diagonalization of commuting normal tuples, joint spectra,
// hermitian (real/imaginary) partitions, spectral matching and the
// intertwining unitary that aligns one commuting tuple with another.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "ulpac/matcore.hpp"
#include "ulpac/rng.hpp"
#include "ulpac/varieties.hpp"

namespace ulpac {

inline constexpr std::uint64_t kDefaultDiagSeed = 0x5eed5eedULL;

/// Off-diagonal residual factor accepted by joint_diagonalize relative to
/// the caller's commutation tolerance.
inline constexpr double kDiagResidualFactor = 10.0;

/// Relative gap below which eigenvalues of the random probe combination
/// are treated as one degenerate block.
inline constexpr double kClusterGap = 1e-7;

struct JointSpectrum {
  CMatrix points;  // n x m; row k is the joint eigenvalue Lambda^(k)
  CMatrix q;       // unitary; column k is the joint eigenvector for row k
  double residual = 0.0;  // max_j ||offdiag(q* X_j q)||

  Index size() const { return points.rows(); }
  Index arity() const { return points.cols(); }

  /// Lambda(X_j) = diag of column j.
  CMatrix diagonal(Index j) const { return points.col(j).asDiagonal(); }

  /// q Lambda(X_j) q*.
  CMatrix reconstruct(Index j) const { return q * points.col(j).asDiagonal() * q.adjoint(); }
};

namespace detail {

inline double offdiag_norm(const CMatrix& a) {
  CMatrix off = a;
  off.diagonal().setZero();
  return op_norm(off);
}

/// Joint Jacobi diagonalization of hermitian matrices (complex
/// Cardoso-Souloumiac rotations). Rotations are accumulated into `v`;
/// the matrices are transformed in place. Fixed (p, q) sweep order.
inline void jacobi_joint_diagonalize(std::vector<CMatrix>& mats, CMatrix& v,
                                     int max_sweeps = 100, double threshold = 1e-15) {
  const Index s = v.cols();
  if (s < 2) return;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < s - 1; ++p) {
      for (Index q = p + 1; q < s; ++q) {
        Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
        for (const auto& a : mats) {
          const Eigen::Vector3d h((a(p, p) - a(q, q)).real(), (a(p, q) + a(q, p)).real(),
                                  (Complex(0, 1) * (a(q, p) - a(p, q))).real());
          g += h * h.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
        Eigen::Vector3d ang = es.eigenvectors().col(2);
        if (ang(0) < 0) ang = -ang;
        const double c = std::sqrt(0.5 + ang(0) / 2.0);
        const Complex sn = 0.5 * Complex(ang(1), -ang(2)) / c;
        if (std::abs(sn) <= threshold) continue;
        rotated = true;
        Eigen::Matrix2cd rot;
        rot << c, -std::conj(sn), sn, c;
        for (auto& a : mats) {
          Eigen::Matrix<Complex, 2, Eigen::Dynamic> rows(2, s);
          rows.row(0) = a.row(p);
          rows.row(1) = a.row(q);
          rows = rot.adjoint() * rows;
          a.row(p) = rows.row(0);
          a.row(q) = rows.row(1);
          Eigen::Matrix<Complex, Eigen::Dynamic, 2> cols(s, 2);
          cols.col(0) = a.col(p);
          cols.col(1) = a.col(q);
          cols = cols * rot;
          a.col(p) = cols.col(0);
          a.col(q) = cols.col(1);
        }
        Eigen::Matrix<Complex, Eigen::Dynamic, 2> vc(v.rows(), 2);
        vc.col(0) = v.col(p);
        vc.col(1) = v.col(q);
        vc = vc * rot;
        v.col(p) = vc.col(0);
        v.col(q) = vc.col(1);
      }
    }
    if (!rotated) break;
  }
}

/// Consecutive runs of a sorted vector whose gaps are below `gap`.
inline std::vector<std::pair<Index, Index>> sorted_clusters(const RVector& sorted, double gap) {
  std::vector<std::pair<Index, Index>> out;
  Index start = 0;
  for (Index k = 1; k <= sorted.size(); ++k) {
    if (k == sorted.size() || sorted(k) - sorted(k - 1) >= gap) {
      out.emplace_back(start, k);
      start = k;
    }
  }
  return out;
}

/// Single-linkage clusters of joint points under the max-modulus metric.
inline std::vector<std::vector<Index>> point_clusters(const CMatrix& points, double radius) {
  const Index n = points.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if ((points.row(a) - points.row(b)).cwiseAbs().maxCoeff() <= radius) {
        parent[find(b)] = find(a);
      }
    }
  }
  std::vector<std::vector<Index>> groups;
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index a = 0; a < n; ++a) {
    const Index r = find(a);
    if (slot[r] < 0) {
      slot[r] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(a);
  }
  return groups;
}

inline CMatrix select_cols(const CMatrix& a, const std::vector<Index>& idx) {
  CMatrix out(a.rows(), static_cast<Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Index>(c)) = a.col(idx[c]);
  return out;
}

}  // namespace detail

/// Joint eigenbasis of a commuting normal family. A seeded random real
/// combination of the hermitian parts is diagonalized first; eigenvalue
/// clusters of that combination are then refined by joint Jacobi sweeps
/// over all hermitian parts. The accepted off-diagonal residual is
/// max(1e-9 n, kDiagResidualFactor * tol), relative to max(1, ||x||).
inline JointSpectrum joint_diagonalize(const MatrixTuple& x, double tol = -1.0,
                                       std::uint64_t seed = kDefaultDiagSeed) {
  const Index n = x.dim();
  const Index m = x.size();
  if (tol < 0) tol = 1e-9 * static_cast<double>(n);
  const double scale = std::max(1.0, x.max_norm());
  const double defect = commuting_normal_defect(x);
  if (defect > tol * scale) {
    throw InvalidInput("joint_diagonalize: commuting-normal defect " + std::to_string(defect) +
                       " exceeds tolerance");
  }

  std::vector<CMatrix> parts;
  parts.reserve(static_cast<std::size_t>(2 * m));
  for (const auto& c : x) {
    parts.push_back(detail::hermitian_part(c));
    parts.push_back(detail::skew_hermitian_part_over_i(c));
  }

  SplitMix64 rng(seed);
  CMatrix probe = CMatrix::Zero(n, n);
  double coef_sum = 0.0;
  for (const auto& p : parts) {
    const double c = rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    coef_sum += std::abs(c);
    probe += c * p;
  }
  const HermEigDecomposition pe = herm_eig(detail::hermitian_part(probe));
  CMatrix q = pe.q;

  for (const auto& [lo, hi] : detail::sorted_clusters(pe.eigenvalues, kClusterGap * scale * coef_sum)) {
    const Index s = hi - lo;
    if (s < 2) continue;
    CMatrix block = q.middleCols(lo, s);
    std::vector<CMatrix> local;
    local.reserve(parts.size());
    for (const auto& p : parts) local.push_back(block.adjoint() * p * block);
    CMatrix v = CMatrix::Identity(s, s);
    detail::jacobi_joint_diagonalize(local, v);
    q.middleCols(lo, s) = block * v;
  }

  JointSpectrum js;
  js.q = q;
  js.points.resize(n, m);
  double residual = 0.0;
  for (Index j = 0; j < m; ++j) {
    const CMatrix d = q.adjoint() * x[j] * q;
    js.points.col(j) = d.diagonal();
    residual = std::max(residual, detail::offdiag_norm(d));
  }
  js.residual = residual;
  const double allowed = std::max(1e-9 * static_cast<double>(n), kDiagResidualFactor * tol) * scale;
  if (residual > allowed) {
    throw ConstructionError("joint_diagonalize",
                            "off-diagonal residual " + std::to_string(residual));
  }
  return js;
}

namespace detail {

/// Rank of each entry among the clusters (gaps >= gap) of the sorted values.
inline std::vector<Index> cluster_ranks(const RVector& v, double gap) {
  const Index n = v.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return v(a) < v(b); });
  std::vector<Index> rank(static_cast<std::size_t>(n));
  Index r = 0;
  for (Index k = 0; k < n; ++k) {
    if (k > 0 && v(order[k]) - v(order[k - 1]) >= gap) ++r;
    rank[order[k]] = r;
  }
  return rank;
}

}  // namespace detail

/// Rows ordered lexicographically by (Re, Im) of component 1, then 2, ...
/// Coordinates closer than 1e-9 (relative) compare equal, so rounding noise
/// in a degenerate component does not decide the order.
inline void sort_joint_spectrum(JointSpectrum& js) {
  const Index n = js.size();
  const Index m = js.arity();
  const double scale = std::max(1.0, n ? js.points.cwiseAbs().maxCoeff() : 0.0);
  std::vector<std::vector<Index>> ranks;
  for (Index j = 0; j < m; ++j) {
    ranks.push_back(detail::cluster_ranks(js.points.col(j).real(), 1e-9 * scale));
    ranks.push_back(detail::cluster_ranks(js.points.col(j).imag(), 1e-9 * scale));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (const auto& r : ranks) {
      if (r[a] != r[b]) return r[a] < r[b];
    }
    return false;
  });
  CMatrix pts(n, m), q(js.q.rows(), n);
  for (Index k = 0; k < n; ++k) {
    pts.row(k) = js.points.row(order[k]);
    q.col(k) = js.q.col(order[k]);
  }
  js.points = std::move(pts);
  js.q = std::move(q);
}

inline JointSpectrum joint_spectrum(const MatrixTuple& x, double tol = -1.0,
                                    std::uint64_t seed = kDefaultDiagSeed) {
  JointSpectrum js = joint_diagonalize(x, tol, seed);
  sort_joint_spectrum(js);
  return js;
}

// ---------------------------------------------------------------------------
// Hermitian partitions X_j = X_{1j} + i X_{2j}

struct HermitianPartition {
  MatrixTuple parts;  // (X_11..X_1m, X_21..X_2m)
  bool commuting = false;
  bool triangularizable = false;  // set from commuting (sufficient condition)
  bool semisimple = false;

  Index arity() const { return parts.size() / 2; }
  const CMatrix& real_part(Index j) const { return parts[j]; }
  const CMatrix& imag_part(Index j) const { return parts[arity() + j]; }
};

inline HermitianPartition partition_mcintosh_pryde(const MatrixTuple& x, double tol = -1.0) {
  const Index m = x.size();
  if (tol < 0) tol = default_tol(x.dim());
  std::vector<CMatrix> parts(static_cast<std::size_t>(2 * m));
  for (Index j = 0; j < m; ++j) {
    parts[j] = detail::hermitian_part(x[j]);
    parts[m + j] = detail::skew_hermitian_part_over_i(x[j]);
  }
  HermitianPartition p{MatrixTuple(std::move(parts))};
  const double scale = std::max(1.0, x.max_norm());
  p.commuting = max_commutator(p.parts) <= tol * scale * scale;
  p.triangularizable = p.commuting;
  p.semisimple = true;
  for (const auto& c : p.parts) p.semisimple = p.semisimple && hermiticity_defect(c) <= tol * scale;
  return p;
}

inline MatrixTuple recombine_partition(const HermitianPartition& p) {
  if (p.parts.size() % 2 != 0) throw InvalidInput("recombine_partition: odd number of parts");
  const Index m = p.arity();
  std::vector<CMatrix> out(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) out[j] = p.real_part(j) + Complex(0, 1) * p.imag_part(j);
  return MatrixTuple(std::move(out));
}

/// Inverse of the partition for a raw 2m-tuple of parts.
inline MatrixTuple recombine_parts(const MatrixTuple& parts) {
  HermitianPartition p{parts};
  return recombine_partition(p);
}

// ---------------------------------------------------------------------------
// Spectral matching

struct SpectralMatching {
  std::vector<Index> perm;  // point k of a is paired with point perm[k] of b
  double cost = 0.0;        // max_k ||a_k - b_perm[k]||_inf
};

namespace detail {

inline bool has_perfect_matching(const RMatrix& cost, double threshold) {
  const Index n = cost.rows();
  std::vector<Index> match_b(static_cast<std::size_t>(n), -1);
  std::vector<char> seen;
  std::function<bool(Index)> augment = [&](Index a) -> bool {
    for (Index b = 0; b < n; ++b) {
      if (cost(a, b) > threshold || seen[b]) continue;
      seen[b] = 1;
      if (match_b[b] < 0 || augment(match_b[b])) {
        match_b[b] = a;
        return true;
      }
    }
    return false;
  };
  for (Index a = 0; a < n; ++a) {
    seen.assign(static_cast<std::size_t>(n), 0);
    if (!augment(a)) return false;
  }
  return true;
}

/// Minimum-sum assignment (Hungarian, O(n^3)); forbidden entries are +inf.
inline std::vector<Index> hungarian(const RMatrix& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

}  // namespace detail

/// Bottleneck matching of two joint spectra: minimizes the largest paired
/// max-modulus distance, and among bottleneck-optimal pairings the total
/// of `tie_cost` (the total distance when null; remaining ties resolved
/// deterministically by the assignment order).
inline SpectralMatching match_points(const CMatrix& a, const CMatrix& b,
                                     const RMatrix* tie_cost = nullptr) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("match_spectra: size mismatch");
  }
  const Index n = a.rows();
  SpectralMatching out;
  if (n == 0) return out;
  RMatrix cost(n, n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) cost(k, l) = (a.row(k) - b.row(l)).cwiseAbs().maxCoeff();
  }
  std::vector<double> levels(cost.data(), cost.data() + cost.size());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::has_perfect_matching(cost, levels[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double bottleneck = levels[lo];
  if (tie_cost && (tie_cost->rows() != n || tie_cost->cols() != n)) {
    throw InvalidInput("match_spectra: tie cost shape mismatch");
  }
  RMatrix restricted = tie_cost ? *tie_cost : cost;
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      if (cost(k, l) > bottleneck) restricted(k, l) = std::numeric_limits<double>::infinity();
    }
  }
  out.perm = detail::hungarian(restricted);
  out.cost = 0.0;
  for (Index k = 0; k < n; ++k) out.cost = std::max(out.cost, cost(k, out.perm[k]));
  return out;
}

/// Among bottleneck-optimal pairings, prefers the one whose eigenvectors
/// overlap most, so that nearly degenerate points are not swapped.
inline SpectralMatching match_spectra(const JointSpectrum& a, const JointSpectrum& b) {
  const RMatrix tie = RMatrix::Ones(a.size(), b.size()) - (a.q.adjoint() * b.q).cwiseAbs2();
  return match_points(a.points, b.points, &tie);
}

// ---------------------------------------------------------------------------
// Intertwiner

struct IntertwinerResult {
  CMatrix w;             // unitary with [W x_j W*, y_j] = 0
  CMatrix basis;         // common eigenbasis of W x_j W* and y_j
  CMatrix x_points;      // row l: eigenvalue of W x W* on basis column l
  CMatrix y_points;      // row l: eigenvalue of y on basis column l
  double epsilon_hat = 0.0;     // max_j max(||W x_j W* - y_j||, ||W x_j W* - x_j||)
  double matching_cost = 0.0;   // bottleneck distance of the joint spectra
  double commutator_residual = 0.0;
  double eth_xy = 0.0;

  /// W x_j W* built exactly from the diagonal form.
  CMatrix aligned(Index j) const { return basis * x_points.col(j).asDiagonal() * basis.adjoint(); }
};

/// Relative radius for the degenerate blocks used when fixing the
/// intertwiner's gauge.
inline constexpr double kGaugeClusterRadius = 1e-10;

/// Unitary W aligning the commuting normal tuple x with y: both tuples are
/// jointly diagonalized, their joint spectra bottleneck-matched and
/// W = Q_y G Q_x* for the matching permutation. The block-unitary gauge G
/// (free inside degenerate joint eigenspaces of either tuple) is chosen to
/// bring W as close to the identity as possible.
inline IntertwinerResult intertwiner(const MatrixTuple& x, const MatrixTuple& y, double tol = -1.0,
                                     std::uint64_t seed = kDefaultDiagSeed) {
  detail::require_same_shape(x, y, "intertwiner");
  const Index n = x.dim();
  const Index m = x.size();
  if (tol < 0) tol = 1e-9 * static_cast<double>(n);

  const JointSpectrum jx = joint_diagonalize(x, tol, seed);
  const JointSpectrum jy = joint_diagonalize(y, tol, seed);
  const SpectralMatching match = match_spectra(jx, jy);

  IntertwinerResult r;
  r.eth_xy = eth(x, y);
  r.matching_cost = match.cost;
  const double scale = std::max({1.0, x.max_norm(), y.max_norm()});
  if (match.cost > 10.0 * r.eth_xy + 1e-9 * static_cast<double>(n) * scale) {
    throw ConstructionError("intertwiner", "joint spectral matching cost " +
                                               std::to_string(match.cost) + " exceeds 10 eth(x,y)");
  }

  // x eigenvectors reordered so column l pairs with y's column l.
  CMatrix qx_matched(n, n);
  CMatrix x_points(n, m);
  for (Index k = 0; k < n; ++k) {
    qx_matched.col(match.perm[k]) = jx.q.col(k);
    x_points.row(match.perm[k]) = jx.points.row(k);
  }

  // Gauge: W = Q_y V U Q_x'* with V block-unitary over y's degenerate
  // joint eigenspaces and U over x's; maximize Re tr(W).
  const double radius = kGaugeClusterRadius * static_cast<double>(n) * scale;
  const auto x_blocks = detail::point_clusters(x_points, radius);
  const auto y_blocks = detail::point_clusters(jy.points, radius);
  const CMatrix overlap = qx_matched.adjoint() * jy.q;  // tr(W) = tr(V U overlap)
  CMatrix vmat = CMatrix::Identity(n, n), umat = CMatrix::Identity(n, n);
  auto align = [](const std::vector<std::vector<Index>>& blocks, const CMatrix& target) {
    CMatrix g = CMatrix::Identity(target.rows(), target.cols());
    for (const auto& b : blocks) {
      const Index s = static_cast<Index>(b.size());
      CMatrix sub(s, s);
      for (Index i = 0; i < s; ++i) {
        for (Index j = 0; j < s; ++j) sub(i, j) = target(b[i], b[j]);
      }
      Eigen::JacobiSVD<CMatrix> svd(sub, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const CMatrix polar = (svd.matrixU() * svd.matrixV().adjoint()).adjoint();
      for (Index i = 0; i < s; ++i) {
        for (Index j = 0; j < s; ++j) g(b[i], b[j]) = polar(i, j);
      }
    }
    return g;
  };
  for (int round = 0; round < 3; ++round) {
    umat = align(x_blocks, overlap * vmat);
    vmat = align(y_blocks, umat * overlap);
  }

  r.basis = jy.q * vmat;
  r.w = r.basis * umat * qx_matched.adjoint();
  r.x_points = x_points;
  r.y_points = jy.points;

  double eps_hat = 0.0, comm = 0.0;
  for (Index j = 0; j < m; ++j) {
    const CMatrix wx = r.w * x[j] * r.w.adjoint();
    eps_hat = std::max({eps_hat, op_norm(wx - y[j]), op_norm(wx - x[j])});
    comm = std::max(comm, op_norm(commutator(wx, y[j])));
  }
  r.epsilon_hat = eps_hat;
  r.commutator_residual = comm;
  if (comm > 1e-9 * static_cast<double>(n) * scale * scale) {
    throw ConstructionError("intertwiner", "commutation residual " + std::to_string(comm));
  }
  return r;
}

}  // namespace ulpac
