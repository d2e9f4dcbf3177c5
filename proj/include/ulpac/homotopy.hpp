#pragma once

// Local homotopies between nearby commuting tuples in the matrix cube,
// disk and torus. Each path runs through the nodes
//   X -> W* X~ W -> X~ -> Lambda(X) -> Y
// where W aligns X with Y's eigenbasis, Lambda(X) = W X W* is diagonal in
// that basis and X~ is the grid-quantized approximant of Lambda(X). The
// second leg is a unitary orbit through the corrected unitary W^ when the
// quantization keeps more than one projector.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ulpac/jointspec.hpp"
#include "ulpac/matcore.hpp"
#include "ulpac/path.hpp"
#include "ulpac/psra.hpp"
#include "ulpac/unitary_correct.hpp"
#include "ulpac/varieties.hpp"

namespace ulpac {

struct HomotopyOptions {
  Index samples_per_segment = 256;
  double tol = -1.0;  // numerical tolerance for the spectral stages; default 1e-9 n
  std::uint64_t seed = kDefaultDiagSeed;
};

struct HomotopyDiagnostics {
  IntertwinerResult intertwiner;
  ProjectiveDecomposition decomposition;
  /// X, W* X~ W, X~, Lambda(X), Y (complex tuples for the disk)
  std::vector<MatrixTuple> nodes;
  std::vector<double> segment_bounds;  // a-priori eth bound per segment
  CMatrix w_hat;
  CMatrix k_hat;
  double omega = 0.0;  // ||1 - W^||
  double correction_achieved = 0.0;
  bool correction_meets_target = true;
  bool curved = false;
  Index branch_ties = 0;  // exponent differences exactly at +-1 (torus)
  double intertwiner_ratio = 0.0;  // intertwiner epsilon_hat / delta
};

struct Homotopy {
  TuplePath path;
  HomotopyCertificate certificate;
  HomotopyDiagnostics diagnostics;
};

inline constexpr double kSegmentBreaks[] = {0.0, 0.125, 0.25, 0.5, 1.0};

namespace detail {

inline void require_member(VarietyKind kind, const MatrixTuple& x, const char* op) {
  const double d = variety_defect(kind, x);
  if (d > 1e-8 * static_cast<double>(x.dim())) {
    throw InvalidInput(std::string(op) + ": input is not in the " + std::string(to_string(kind)) +
                       " (defect " + std::to_string(d) + ")");
  }
}

inline void require_delta(double delta, const char* op) {
  if (!(delta > 0.0) || delta > 1.0) throw InvalidInput(std::string(op) + ": delta must lie in (0, 1]");
}

/// segments[j][k] is segment k of component j.
inline TuplePath assemble_tuple_path(std::vector<std::vector<PathSegment>> segments, Index n) {
  std::vector<MatrixPath> comps;
  for (auto& row : segments) {
    std::vector<MatrixPath::Piece> pieces;
    for (std::size_t k = 0; k < row.size(); ++k) {
      pieces.push_back({std::move(row[k]), kSegmentBreaks[k], kSegmentBreaks[k + 1]});
    }
    try {
      comps.push_back(MatrixPath::from_pieces(std::move(pieces), 1e-8 * static_cast<double>(n)));
    } catch (const InvalidInput& e) {
      throw ConstructionError("path", e.what());
    }
  }
  return TuplePath(std::move(comps));
}

/// A-priori eth bounds from nodes[0] for each segment between consecutive
/// nodes. Flat segments are convex; a curved orbit Ad[e^{-i pi s K^}](A2),
/// s in [0, 1], stays within 2 ||1 - W^|| ||A2_j|| of either end; a flat
/// unitary segment with exponent steps in [-1, 1] stays within
/// eth(A_i, A_{i+1}) of either end.
inline std::vector<double> segment_bounds(const std::vector<MatrixTuple>& nodes,
                                          const std::vector<SegmentKind>& kinds, double omega) {
  const MatrixTuple& c = nodes.front();
  std::vector<double> out;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const MatrixTuple& a = nodes[k];
    const MatrixTuple& b = nodes[k + 1];
    double bound = 0.0;
    switch (kinds[k]) {
      case SegmentKind::Flat:
        bound = std::max(eth(c, a), eth(c, b));
        break;
      case SegmentKind::Curved:
        for (Index j = 0; j < c.size(); ++j) {
          const double near = std::min(op_norm(c[j] - a[j]), op_norm(c[j] - b[j]));
          bound = std::max(bound, near + 2.0 * omega * op_norm(b[j]));
        }
        break;
      case SegmentKind::FlatUnitary:
        bound = std::min(eth(c, a), eth(c, b)) + eth(a, b);
        break;
    }
    out.push_back(bound);
  }
  return out;
}

inline void fill_budgets(HomotopyCertificate& cert, double delta, double k_m, double omega,
                         Index n_projectors) {
  cert.eps1 = (2.0 * k_m + 3.0) * delta;
  cert.eps2 = n_projectors > 1 ? 2.0 * omega : 0.0;
  cert.eps3 = cert.eps2 + (k_m + 1.0) * delta;
  cert.epsilon_budget = std::max(cert.eps1, cert.eps3);
  cert.n_projectors = n_projectors;
}

/// Certificate from sampling, with the deviation checked against the
/// construction's own bound.
inline HomotopyCertificate certify(const TuplePath& path, VarietyKind kind, const MatrixTuple& x,
                                   const MatrixTuple& y, const std::vector<double>& bounds,
                                   double delta, double k_m, double omega, Index n_projectors,
                                   Index samples) {
  HomotopyCertificate cert = verify_path(path, kind, x, 0.0, samples, &y);
  const double eps_hat =
      *std::max_element(bounds.begin(), bounds.end()) + 1e-10 * static_cast<double>(x.dim());
  fill_budgets(cert, delta, k_m, omega, n_projectors);
  cert.epsilon_hat = eps_hat;
  cert.deviation_limit = eps_hat;
  return cert;
}

struct CorrectedUnitary {
  CMatrix w_hat, k_hat;
  double omega = 0.0;
  double achieved = 0.0;
  bool meets_target = true;
};

inline CorrectedUnitary correct_unitary(const CMatrix& w, const ProjectiveDecomposition& d) {
  CorrectedUnitary c;
  const CorrectionResult r = commuting_unitary_correction(w, d, 2.0);
  c.w_hat = r.z * w;
  c.achieved = r.achieved;
  c.meets_target = r.meets_target;
  c.omega = op_norm(CMatrix::Identity(w.rows(), w.rows()) - c.w_hat);
  try {
    c.k_hat = logm_unitary(c.w_hat);
  } catch (const Error& e) {
    throw ConstructionError("curved", e.what());
  }
  return c;
}

/// Hermitian legs shared by the cube and disk builders: x, y are commuting
/// hermitian tuples.
struct HermitianLegs {
  IntertwinerResult inter;
  ProjectiveDecomposition decomp;
  MatrixTuple x_hat, x_tilde, lambda;
  CorrectedUnitary corr;
  bool curved = false;
  std::vector<std::vector<PathSegment>> segments;  // per component
};

inline HermitianLegs hermitian_legs(const MatrixTuple& x, const MatrixTuple& y, double delta,
                                    const ValueMap& value_map, const HomotopyOptions& opt) {
  const Index n = x.dim();
  const Index m = x.size();
  const double tol = opt.tol < 0 ? 1e-9 * static_cast<double>(n) : opt.tol;
  HermitianLegs h;
  h.inter = intertwiner(x, y, tol, opt.seed);
  const CMatrix& basis = h.inter.basis;
  const CMatrix& w = h.inter.w;
  const RMatrix x_points = h.inter.x_points.real();

  h.decomp = quantize_joint(basis, x_points, build_grids(delta), value_map);
  std::vector<CMatrix> lambda(m), x_tilde(m), x_hat(m);
  for (Index j = 0; j < m; ++j) {
    lambda[j] = hermitian_part(basis * x_points.col(j).cast<Complex>().asDiagonal() * basis.adjoint());
    x_tilde[j] = hermitian_part(h.decomp.assemble(j));
    x_hat[j] = hermitian_part(w.adjoint() * x_tilde[j] * w);
  }
  h.lambda = MatrixTuple(lambda);
  h.x_tilde = MatrixTuple(x_tilde);
  h.x_hat = MatrixTuple(x_hat);

  h.curved = h.decomp.size() > 1;
  if (h.curved) {
    h.corr = correct_unitary(w, h.decomp);
  } else {
    h.corr.w_hat = CMatrix::Identity(n, n);
    h.corr.k_hat = CMatrix::Zero(n, n);
  }

  h.segments.resize(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    auto& s = h.segments[j];
    s.push_back(PathSegment::flat(x[j], x_hat[j]));
    if (h.curved) {
      s.push_back(PathSegment::curved(h.corr.k_hat, x_tilde[j], -1.0, 0.0));
    } else {
      s.push_back(PathSegment::flat(x_hat[j], x_tilde[j]));
    }
    s.push_back(PathSegment::flat(x_tilde[j], lambda[j]));
    s.push_back(PathSegment::flat(lambda[j], y[j]));
  }
  return h;
}

inline std::vector<SegmentKind> hermitian_kinds(bool curved) {
  return {SegmentKind::Flat, curved ? SegmentKind::Curved : SegmentKind::Flat, SegmentKind::Flat,
          SegmentKind::Flat};
}

inline void fill_common(HomotopyDiagnostics& d, const IntertwinerResult& inter,
                        const ProjectiveDecomposition& decomp, const CorrectedUnitary& corr,
                        bool curved, double delta) {
  d.intertwiner = inter;
  d.decomposition = decomp;
  d.w_hat = corr.w_hat;
  d.k_hat = corr.k_hat;
  d.omega = corr.omega;
  d.correction_achieved = corr.achieved;
  d.correction_meets_target = corr.meets_target;
  d.curved = curved;
  d.intertwiner_ratio = inter.epsilon_hat / delta;
}

}  // namespace detail

/// Homotopy in the matrix cube between commuting hermitian contraction
/// tuples with eth(x, y) <= delta.
inline Homotopy cube_homotopy(const MatrixTuple& x, const MatrixTuple& y, double delta, double k_m,
                              const HomotopyOptions& opt = {}) {
  detail::require_same_shape(x, y, "cube_homotopy");
  detail::require_delta(delta, "cube_homotopy");
  detail::require_member(VarietyKind::Cube, x, "cube_homotopy");
  detail::require_member(VarietyKind::Cube, y, "cube_homotopy");
  if (eth(x, y) > delta + 1e-12) throw InvalidInput("cube_homotopy: eth(x, y) exceeds delta");
  const Index n = x.dim();

  // the top grid point exceeds 1 when delta does not divide 1
  const ValueMap clamp = [](RVector& v) { v = v.cwiseMax(-1.0).cwiseMin(1.0); };
  detail::HermitianLegs h = detail::hermitian_legs(x, y, delta, clamp, opt);
  TuplePath path = detail::assemble_tuple_path(std::move(h.segments), n);

  HomotopyDiagnostics d;
  detail::fill_common(d, h.inter, h.decomp, h.corr, h.curved, delta);
  d.nodes = {x, h.x_hat, h.x_tilde, h.lambda, y};
  d.segment_bounds = detail::segment_bounds(d.nodes, detail::hermitian_kinds(h.curved), d.omega);
  HomotopyCertificate cert =
      detail::certify(path, VarietyKind::Cube, x, y, d.segment_bounds, delta, k_m, d.omega,
                      h.decomp.size(), opt.samples_per_segment);
  return {std::move(path), cert, std::move(d)};
}

/// Homotopy in the matrix disk between commuting normal contraction tuples
/// with eth(z, s) <= delta / 2, built on their hermitian partitions. Grid
/// values of each (real, imaginary) pair are pulled back into the unit disk.
inline Homotopy disk_homotopy(const MatrixTuple& z, const MatrixTuple& s, double delta, double k_m,
                              const HomotopyOptions& opt = {}) {
  detail::require_same_shape(z, s, "disk_homotopy");
  detail::require_delta(delta, "disk_homotopy");
  detail::require_member(VarietyKind::Disk, z, "disk_homotopy");
  detail::require_member(VarietyKind::Disk, s, "disk_homotopy");
  if (eth(z, s) > delta / 2 + 1e-12) throw InvalidInput("disk_homotopy: eth(z, s) exceeds delta / 2");
  const Index n = z.dim();
  const Index m = z.size();

  const HermitianPartition pz = partition_mcintosh_pryde(z);
  const HermitianPartition ps = partition_mcintosh_pryde(s);
  const ValueMap clamp = [m](RVector& v) {
    for (Index j = 0; j < m; ++j) {
      const double r = std::hypot(v(j), v(j + m));
      if (r > 1.0) {
        v(j) /= r;
        v(j + m) /= r;
      }
    }
  };
  detail::HermitianLegs h = detail::hermitian_legs(pz.parts, ps.parts, delta, clamp, opt);

  std::vector<std::vector<PathSegment>> segments(static_cast<std::size_t>(m));
  const Complex i(0.0, 1.0);
  for (Index j = 0; j < m; ++j) {
    const auto& re = h.segments[j];
    const auto& im = h.segments[j + m];
    for (std::size_t k = 0; k < re.size(); ++k) {
      if (re[k].kind() == SegmentKind::Curved) {
        const auto& a = std::get<PathSegment::Curved>(re[k].data());
        const auto& b = std::get<PathSegment::Curved>(im[k].data());
        segments[j].push_back(PathSegment::curved(a.k_hat, a.base + i * b.base, a.t0, a.t1));
      } else {
        const auto& a = std::get<PathSegment::Flat>(re[k].data());
        const auto& b = std::get<PathSegment::Flat>(im[k].data());
        segments[j].push_back(PathSegment::flat(a.a + i * b.a, a.b + i * b.b));
      }
    }
  }
  TuplePath path = detail::assemble_tuple_path(std::move(segments), n);

  HomotopyDiagnostics d;
  detail::fill_common(d, h.inter, h.decomp, h.corr, h.curved, delta);
  d.nodes = {z, recombine_parts(h.x_hat), recombine_parts(h.x_tilde), recombine_parts(h.lambda), s};
  d.segment_bounds = detail::segment_bounds(d.nodes, detail::hermitian_kinds(h.curved), d.omega);
  HomotopyCertificate cert =
      detail::certify(path, VarietyKind::Disk, z, s, d.segment_bounds, delta, k_m, d.omega,
                      h.decomp.size(), opt.samples_per_segment);
  return {std::move(path), cert, std::move(d)};
}

namespace detail {

/// Representative of t on (-1, 1] modulo 2.
inline double wrap_exponent(double t) {
  double r = std::remainder(t, 2.0);  // [-1, 1]
  if (r <= -1.0) r += 2.0;
  return r;
}

/// Exponent of the nearest point of the circle grid {e^{2 pi i k / M}}
/// with M = ceil(pi / delta), on (-1, 1].
inline double quantize_phase(double exponent, Index grid_size) {
  const double step = 2.0 / static_cast<double>(grid_size);
  const auto k = static_cast<long long>(std::llround(exponent / step));
  const long long mod = ((k % grid_size) + grid_size) % grid_size;
  return wrap_exponent(static_cast<double>(mod) * step);
}

inline Index circle_grid_size(double delta) {
  return std::max<Index>(1, static_cast<Index>(std::ceil(kPi / delta - 1e-12)));
}

/// Exponent step from `from` to `to` along the shortest arc; counts exact
/// half-turn ties.
inline RVector geodesic_target(const RVector& from, const RVector& to, Index& ties) {
  RVector out(from.size());
  for (Index l = 0; l < from.size(); ++l) {
    const double step = wrap_exponent(to(l) - from(l));
    if (step == 1.0) ++ties;
    out(l) = from(l) + step;
  }
  return out;
}

inline RMatrix exponents_of(const CMatrix& points) {
  RMatrix e(points.rows(), points.cols());
  for (Index r = 0; r < points.rows(); ++r) {
    for (Index c = 0; c < points.cols(); ++c) e(r, c) = principal_phase(points(r, c)) / kPi;
  }
  return e;
}

inline CMatrix unitary_from_exponents(const CMatrix& basis, const RVector& e) {
  return expm_i_pi(HermEigDecomposition{e, basis});
}

}  // namespace detail

/// Homotopy in the matrix torus between commuting unitary tuples with
/// eth(u, v) <= delta. Flat legs interpolate commuting hermitian exponents
/// in a shared eigenbasis along shortest arcs.
inline Homotopy torus_homotopy(const MatrixTuple& u, const MatrixTuple& v, double delta, double k_m,
                               const HomotopyOptions& opt = {}) {
  detail::require_same_shape(u, v, "torus_homotopy");
  detail::require_delta(delta, "torus_homotopy");
  detail::require_member(VarietyKind::Torus, u, "torus_homotopy");
  detail::require_member(VarietyKind::Torus, v, "torus_homotopy");
  if (eth(u, v) > delta + 1e-12) throw InvalidInput("torus_homotopy: eth(u, v) exceeds delta");
  const Index n = u.dim();
  const Index m = u.size();
  const double tol = opt.tol < 0 ? 1e-9 * static_cast<double>(n) : opt.tol;

  const IntertwinerResult inter = intertwiner(u, v, tol, opt.seed);
  const CMatrix& basis = inter.basis;
  const CMatrix& w = inter.w;
  const CMatrix basis_x = w.adjoint() * basis;  // eigenbasis of u
  const RMatrix hx = detail::exponents_of(inter.x_points);
  const RMatrix hy = detail::exponents_of(inter.y_points);
  const Index grid = detail::circle_grid_size(delta);
  RMatrix hq(n, m);
  for (Index l = 0; l < n; ++l) {
    for (Index j = 0; j < m; ++j) hq(l, j) = detail::quantize_phase(hx(l, j), grid);
  }
  const ProjectiveDecomposition decomp = decomposition_from_values(basis, hq);

  std::vector<CMatrix> lambda(m), u_tilde(m), u_hat(m);
  for (Index j = 0; j < m; ++j) {
    lambda[j] = detail::unitary_from_exponents(basis, hx.col(j));
    u_tilde[j] = detail::unitary_from_exponents(basis, hq.col(j));
    u_hat[j] = w.adjoint() * u_tilde[j] * w;
  }

  const bool curved = decomp.size() > 1;
  detail::CorrectedUnitary corr;
  if (curved) {
    corr = detail::correct_unitary(w, decomp);
  } else {
    corr.w_hat = CMatrix::Identity(n, n);
    corr.k_hat = CMatrix::Zero(n, n);
  }

  Index ties = 0;
  std::vector<std::vector<PathSegment>> segments(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    const RVector x_e = hx.col(j), q_e = hq.col(j), y_e = hy.col(j);
    auto& s = segments[j];
    s.push_back(PathSegment::flat_unitary_diagonal(basis_x, x_e, detail::geodesic_target(x_e, q_e, ties)));
    if (curved) {
      s.push_back(PathSegment::curved(corr.k_hat, u_tilde[j], -1.0, 0.0));
    } else {
      s.push_back(PathSegment::flat_unitary_diagonal(basis, q_e, q_e));
    }
    s.push_back(PathSegment::flat_unitary_diagonal(basis, q_e, detail::geodesic_target(q_e, x_e, ties)));
    s.push_back(PathSegment::flat_unitary_diagonal(basis, x_e, detail::geodesic_target(x_e, y_e, ties)));
  }
  TuplePath path = detail::assemble_tuple_path(std::move(segments), n);

  HomotopyDiagnostics d;
  detail::fill_common(d, inter, decomp, corr, curved, delta);
  d.branch_ties = ties;
  d.nodes = {u, MatrixTuple(u_hat), MatrixTuple(u_tilde), MatrixTuple(lambda), v};
  const std::vector<SegmentKind> kinds = {SegmentKind::FlatUnitary,
                                          curved ? SegmentKind::Curved : SegmentKind::FlatUnitary,
                                          SegmentKind::FlatUnitary, SegmentKind::FlatUnitary};
  d.segment_bounds = detail::segment_bounds(d.nodes, kinds, d.omega);
  HomotopyCertificate cert = detail::certify(path, VarietyKind::Torus, u, v, d.segment_bounds,
                                             delta, k_m, d.omega, decomp.size(),
                                             opt.samples_per_segment);
  return {std::move(path), cert, std::move(d)};
}

/// Dispatch on the variety.
inline Homotopy build_homotopy(VarietyKind kind, const MatrixTuple& x, const MatrixTuple& y,
                               double delta, double k_m, const HomotopyOptions& opt = {}) {
  switch (kind) {
    case VarietyKind::Cube: return cube_homotopy(x, y, delta, k_m, opt);
    case VarietyKind::Disk: return disk_homotopy(x, y, delta, k_m, opt);
    case VarietyKind::Torus: return torus_homotopy(x, y, delta, k_m, opt);
  }
  throw InvalidInput("build_homotopy: unknown variety");
}

}  // namespace ulpac
