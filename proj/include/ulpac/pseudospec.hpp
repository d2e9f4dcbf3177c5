#pragma once

// Spectra, epsilon-pseudospectra on planar grids, Hausdorff distance and
// delta-density of finite point sets.

#include <algorithm>
#include <complex>
#include <limits>
#include <vector>

#include "ulpac/jointspec.hpp"
#include "ulpac/matcore.hpp"

namespace ulpac {

using PointSet = std::vector<Complex>;

inline void sort_points(PointSet& pts) {
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

/// Eigenvalues with multiplicity, sorted by (Re, Im). Normal input goes
/// through joint diagonalization of its hermitian parts; anything else
/// through a dense Schur-based eigensolver.
inline PointSet spectrum(const CMatrix& a) {
  detail::require_square(a, "spectrum");
  detail::require_finite(a, "spectrum");
  const Index n = a.rows();
  PointSet out;
  if (n == 0) return out;
  const double scale = std::max(1.0, op_norm(a));
  if (normality_defect(a) <= default_tol(n) * scale * scale) {
    const JointSpectrum js = joint_diagonalize(MatrixTuple{a}, 1e-9 * static_cast<double>(n));
    for (Index k = 0; k < n; ++k) out.push_back(js.points(k, 0));
  } else {
    Eigen::ComplexEigenSolver<CMatrix> es(a, false);
    if (es.info() != Eigen::Success) throw ConstructionError("spectrum", "eigensolver failed");
    for (Index k = 0; k < n; ++k) out.push_back(es.eigenvalues()(k));
  }
  sort_points(out);
  return out;
}

inline PointSet real_points(const RVector& v) {
  PointSet out;
  for (Index k = 0; k < v.size(); ++k) out.emplace_back(v(k), 0.0);
  return out;
}

/// Rectangular lattice of nx x ny points centred at `center`, spanning
/// width x height (endpoints included).
struct PlanarGrid {
  Complex center{0.0, 0.0};
  double width = 3.0;
  double height = 3.0;
  Index nx = 256;
  Index ny = 256;

  Index size() const { return nx * ny; }

  double spacing_x() const { return nx > 1 ? width / static_cast<double>(nx - 1) : 0.0; }
  double spacing_y() const { return ny > 1 ? height / static_cast<double>(ny - 1) : 0.0; }

  /// Point (ix, iy); row-major over iy then ix.
  Complex point(Index ix, Index iy) const {
    const double re = center.real() - width / 2 + spacing_x() * static_cast<double>(ix);
    const double im = center.imag() - height / 2 + spacing_y() * static_cast<double>(iy);
    return {re, im};
  }
};

struct PseudospectrumMask {
  PlanarGrid grid;
  double epsilon = 0.0;
  std::vector<double> sigma_min;  // index iy * nx + ix
  std::vector<char> inside;

  bool at(Index ix, Index iy) const { return inside[iy * grid.nx + ix] != 0; }
};

inline double smallest_singular_value(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(a.rows() - 1);
}

/// mask[lambda] = sigma_min(a - lambda 1) <= epsilon at every grid point.
inline PseudospectrumMask pseudospectrum_mask(const CMatrix& a, double epsilon,
                                              const PlanarGrid& grid) {
  detail::require_square(a, "pseudospectrum_mask");
  if (!(epsilon >= 0.0)) throw InvalidInput("pseudospectrum_mask: negative epsilon");
  if (grid.nx < 1 || grid.ny < 1) throw InvalidInput("pseudospectrum_mask: empty grid");
  const Index n = a.rows();
  PseudospectrumMask mask;
  mask.grid = grid;
  mask.epsilon = epsilon;
  mask.sigma_min.resize(static_cast<std::size_t>(grid.size()));
  mask.inside.resize(static_cast<std::size_t>(grid.size()));
  CMatrix shifted = a;
  for (Index iy = 0; iy < grid.ny; ++iy) {
    for (Index ix = 0; ix < grid.nx; ++ix) {
      const Complex lambda = grid.point(ix, iy);
      shifted = a;
      shifted.diagonal().array() -= lambda;
      const double s = n == 0 ? 0.0 : smallest_singular_value(shifted);
      const std::size_t idx = static_cast<std::size_t>(iy * grid.nx + ix);
      mask.sigma_min[idx] = s;
      mask.inside[idx] = s <= epsilon ? 1 : 0;
    }
  }
  return mask;
}

/// sup_{p in from} inf_{q in to} |p - q|
inline double directed_hausdorff(const PointSet& from, const PointSet& to) {
  double d = 0.0;
  for (const Complex& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& q : to) best = std::min(best, std::abs(p - q));
    d = std::max(d, best);
  }
  return d;
}

inline double hausdorff(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw InvalidInput("hausdorff: empty point set");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// True iff every point of `whole` is within delta of some point of `subset`.
inline bool delta_dense_check(const PointSet& subset, const PointSet& whole, double delta) {
  if (subset.empty() || whole.empty()) throw InvalidInput("delta_dense_check: empty point set");
  return directed_hausdorff(whole, subset) <= delta;
}

}  // namespace ulpac
