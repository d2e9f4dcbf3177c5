#pragma once

// Matrix paths built from flat, curved and flat-unitary segments joined by
// the halving concatenation (p * q)(s) = p(2s) on [0, 1/2], q(2s - 1) on
// [1/2, 1], plus a sampling verifier producing homotopy certificates.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "ulpac/matcore.hpp"
#include "ulpac/varieties.hpp"

namespace ulpac {

enum class SegmentKind { Flat, Curved, FlatUnitary };

inline std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::Flat: return "flat";
    case SegmentKind::Curved: return "curved";
    case SegmentKind::FlatUnitary: return "flat_unitary";
  }
  return "unknown";
}

class PathSegment {
 public:
  /// t -> a + t (b - a)
  struct Flat {
    CMatrix a, b;
  };

  /// t -> Ad[e^{i pi phi(t) k_hat}](base), phi(t) = t0 + t (t1 - t0)
  struct Curved {
    CMatrix k_hat, base;
    double t0 = 0.0, t1 = 1.0;
    HermEigDecomposition k_eig;
  };

  /// t -> e^{i pi (h_u + t (h_v - h_u))}. When `basis` is set, h_u and h_v
  /// are diagonal in it with the stored exponents.
  struct FlatUnitary {
    CMatrix h_u, h_v;
    std::optional<CMatrix> basis;
    RVector u_exp, v_exp;
  };

  static PathSegment flat(CMatrix a, CMatrix b) {
    detail::require_same_dim(a, b, "PathSegment::flat");
    return PathSegment(Flat{std::move(a), std::move(b)});
  }

  static PathSegment curved(CMatrix k_hat, CMatrix base, double t0, double t1) {
    detail::require_same_dim(k_hat, base, "PathSegment::curved");
    Curved c{std::move(k_hat), std::move(base), t0, t1, {}};
    c.k_eig = herm_eig(c.k_hat);
    return PathSegment(std::move(c));
  }

  static PathSegment flat_unitary(CMatrix h_u, CMatrix h_v) {
    detail::require_same_dim(h_u, h_v, "PathSegment::flat_unitary");
    const Index n = h_u.rows();
    if (hermiticity_defect(h_u) > default_tol(n) * std::max(1.0, op_norm(h_u)) ||
        hermiticity_defect(h_v) > default_tol(n) * std::max(1.0, op_norm(h_v))) {
      throw InvalidInput("PathSegment::flat_unitary: exponents must be hermitian");
    }
    return PathSegment(FlatUnitary{std::move(h_u), std::move(h_v), std::nullopt, {}, {}});
  }

  /// Flat unitary segment with commuting exponents diagonal in `basis`.
  static PathSegment flat_unitary_diagonal(const CMatrix& basis, RVector u_exp, RVector v_exp) {
    FlatUnitary f;
    f.h_u = detail::hermitian_part(basis * u_exp.cast<Complex>().asDiagonal() * basis.adjoint());
    f.h_v = detail::hermitian_part(basis * v_exp.cast<Complex>().asDiagonal() * basis.adjoint());
    f.basis = basis;
    f.u_exp = std::move(u_exp);
    f.v_exp = std::move(v_exp);
    return PathSegment(std::move(f));
  }

  SegmentKind kind() const { return static_cast<SegmentKind>(data_.index()); }
  const std::variant<Flat, Curved, FlatUnitary>& data() const { return data_; }
  Index dim() const {
    return std::visit([](const auto& s) -> Index {
      if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Flat>) return s.a.rows();
      else if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Curved>) return s.base.rows();
      else return s.h_u.rows();
    }, data_);
  }

  CMatrix operator()(double t) const {
    return std::visit([t](const auto& s) -> CMatrix { return eval(s, t); }, data_);
  }

  CMatrix start() const { return (*this)(0.0); }
  CMatrix finish() const { return (*this)(1.0); }

 private:
  explicit PathSegment(std::variant<Flat, Curved, FlatUnitary> d) : data_(std::move(d)) {}

  static CMatrix eval(const Flat& s, double t) {
    if (t == 0.0) return s.a;
    if (t == 1.0) return s.b;
    return s.a + t * (s.b - s.a);
  }

  static CMatrix eval(const Curved& s, double t) {
    const double phi = s.t0 + t * (s.t1 - s.t0);
    HermEigDecomposition scaled{s.k_eig.eigenvalues * phi, s.k_eig.q};
    const CMatrix u = expm_i_pi(scaled);
    return u * s.base * u.adjoint();
  }

  static CMatrix eval(const FlatUnitary& s, double t) {
    if (s.basis) {
      const RVector e = s.u_exp + t * (s.v_exp - s.u_exp);
      return expm_i_pi(HermEigDecomposition{e, *s.basis});
    }
    return expm_i_pi(detail::hermitian_part(s.h_u + t * (s.h_v - s.h_u)));
  }

  std::variant<Flat, Curved, FlatUnitary> data_;
};

/// Piecewise path on [0, 1]. Each piece evaluates its segment on the
/// affinely rescaled sub-interval [begin, end].
class MatrixPath {
 public:
  struct Piece {
    PathSegment segment;
    double begin = 0.0;
    double end = 1.0;
  };

  explicit MatrixPath(PathSegment s) { pieces_.push_back({std::move(s), 0.0, 1.0}); }

  /// Pieces must tile [0, 1] in order with matching endpoints.
  static MatrixPath from_pieces(std::vector<Piece> pieces, double tol = -1.0) {
    if (pieces.empty()) throw InvalidInput("MatrixPath: needs at least one segment");
    MatrixPath p(std::move(pieces));
    if (p.pieces_.front().begin != 0.0 || p.pieces_.back().end != 1.0) {
      throw InvalidInput("MatrixPath: pieces must cover [0, 1]");
    }
    for (std::size_t k = 1; k < p.pieces_.size(); ++k) {
      if (p.pieces_[k].begin != p.pieces_[k - 1].end || !(p.pieces_[k].end > p.pieces_[k].begin)) {
        throw InvalidInput("MatrixPath: pieces must tile [0, 1] in order");
      }
    }
    const double defect = p.continuity_defect();
    if (tol < 0) tol = 1e-9 * static_cast<double>(p.dim());
    if (defect > tol) {
      throw InvalidInput("MatrixPath: consecutive segment endpoints differ by " +
                         std::to_string(defect));
    }
    return p;
  }

  Index dim() const { return pieces_.front().segment.dim(); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  Index segment_count() const { return static_cast<Index>(pieces_.size()); }

  std::vector<double> breakpoints() const {
    std::vector<double> b{0.0};
    for (const auto& p : pieces_) b.push_back(p.end);
    return b;
  }

  /// Evaluation at t in [0, 1]; at an interior breakpoint the earlier
  /// piece is used (its local parameter is exactly 1).
  CMatrix operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("MatrixPath: t outside [0, 1]");
    for (const auto& p : pieces_) {
      if (t <= p.end) return p.segment(local(p, t));
    }
    return pieces_.back().segment(1.0);
  }

  CMatrix start() const { return pieces_.front().segment(0.0); }
  CMatrix finish() const { return pieces_.back().segment(1.0); }

  double continuity_defect() const {
    double d = 0.0;
    for (std::size_t k = 1; k < pieces_.size(); ++k) {
      d = std::max(d, op_norm(pieces_[k - 1].segment(1.0) - pieces_[k].segment(0.0)));
    }
    return d;
  }

 private:
  explicit MatrixPath(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {}

  static double local(const Piece& p, double t) {
    if (t == p.end) return 1.0;
    if (t == p.begin) return 0.0;
    return (t - p.begin) / (p.end - p.begin);
  }

  std::vector<Piece> pieces_;
};

/// p * q: p on [0, 1/2], q on [1/2, 1]. Requires p(1) = q(0) within tol
/// (default 1e-9 n).
inline MatrixPath concat(const MatrixPath& p, const MatrixPath& q, double tol = -1.0) {
  if (p.dim() != q.dim()) throw InvalidInput("concat: dimension mismatch");
  if (tol < 0) tol = 1e-9 * static_cast<double>(p.dim());
  const double gap = op_norm(p.finish() - q.start());
  if (gap > tol) throw InvalidInput("concat: endpoint mismatch " + std::to_string(gap));
  std::vector<MatrixPath::Piece> pieces;
  for (const auto& pc : p.pieces()) pieces.push_back({pc.segment, pc.begin / 2, pc.end / 2});
  for (const auto& pc : q.pieces()) {
    pieces.push_back({pc.segment, 0.5 + pc.begin / 2, 0.5 + pc.end / 2});
  }
  return MatrixPath::from_pieces(std::move(pieces), tol);
}

/// m component paths sharing breakpoints.
class TuplePath {
 public:
  explicit TuplePath(std::vector<MatrixPath> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidInput("TuplePath: needs at least one component");
    const auto b = components_.front().breakpoints();
    for (const auto& c : components_) {
      if (c.breakpoints() != b || c.dim() != components_.front().dim()) {
        throw InvalidInput("TuplePath: components must share dimension and breakpoints");
      }
    }
  }

  Index size() const { return static_cast<Index>(components_.size()); }
  Index dim() const { return components_.front().dim(); }
  Index segment_count() const { return components_.front().segment_count(); }
  const MatrixPath& operator[](Index j) const { return components_[static_cast<std::size_t>(j)]; }
  const std::vector<MatrixPath>& components() const { return components_; }
  std::vector<double> breakpoints() const { return components_.front().breakpoints(); }

  MatrixTuple operator()(double t) const {
    std::vector<CMatrix> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c(t));
    return MatrixTuple(std::move(out));
  }

  /// Tuple produced by piece k of every component at local parameter s.
  MatrixTuple piece_at(Index k, double s) const {
    std::vector<CMatrix> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.pieces()[static_cast<std::size_t>(k)].segment(s));
    return MatrixTuple(std::move(out));
  }

  MatrixTuple start() const { return (*this)(0.0); }
  MatrixTuple finish() const { return (*this)(1.0); }

 private:
  std::vector<MatrixPath> components_;
};

inline TuplePath concat(const TuplePath& p, const TuplePath& q, double tol = -1.0) {
  if (p.size() != q.size()) throw InvalidInput("concat: tuple arity mismatch");
  std::vector<MatrixPath> out;
  for (Index j = 0; j < p.size(); ++j) out.push_back(concat(p[j], q[j], tol));
  return TuplePath(std::move(out));
}

// ---------------------------------------------------------------------------
// Certificates

struct HomotopyCertificate {
  VarietyKind variety = VarietyKind::Cube;
  double epsilon_budget = 0.0;   // declared epsilon
  double epsilon_hat = 0.0;      // achieved locality bound from the construction
  double deviation_limit = 0.0;  // the bound max_eth_deviation is checked against
  double max_membership_defect = 0.0;
  double max_eth_deviation = 0.0;
  double max_unitarity_defect = 0.0;
  std::pair<double, double> endpoint_residuals{0.0, 0.0};
  Index samples = 0;  // points evaluated, over all pieces
  double defect_tolerance = 0.0;
  double endpoint_tolerance = 0.0;
  // Named epsilons of the construction; zero when not applicable.
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;
  Index n_projectors = 0;

  bool membership_ok() const { return max_membership_defect <= defect_tolerance; }
  bool locality_ok() const { return max_eth_deviation <= deviation_limit; }
  bool endpoints_ok() const {
    return endpoint_residuals.first <= endpoint_tolerance &&
           endpoint_residuals.second <= endpoint_tolerance;
  }
  bool passes() const { return membership_ok() && locality_ok() && endpoints_ok(); }
  bool within_budget() const { return epsilon_hat <= epsilon_budget; }
};

struct TraceRow {
  double t = 0.0;
  double defect = 0.0;
  double deviation = 0.0;
};

/// Samples each piece at `samples_per_segment` uniformly spaced local
/// parameters (both endpoints included) and records the largest variety
/// defect and eth distance from `center`. Passes iff the defect is within
/// 1e-8 n, the deviation within `epsilon`, and, when `target` is given,
/// both endpoints match (center, target) within 1e-8 n.
inline HomotopyCertificate verify_path(const TuplePath& path, VarietyKind kind,
                                       const MatrixTuple& center, double epsilon,
                                       Index samples_per_segment,
                                       const MatrixTuple* target = nullptr,
                                       std::vector<TraceRow>* trace = nullptr) {
  if (samples_per_segment < 2) throw InvalidInput("verify_path: need at least 2 samples");
  const Index n = path.dim();
  HomotopyCertificate c;
  c.variety = kind;
  c.epsilon_budget = epsilon;
  c.epsilon_hat = epsilon;
  c.deviation_limit = epsilon;
  c.defect_tolerance = 1e-8 * static_cast<double>(n);
  c.endpoint_tolerance = 1e-8 * static_cast<double>(n);

  const auto& pieces = path[0].pieces();
  for (Index k = 0; k < path.segment_count(); ++k) {
    const double b = pieces[static_cast<std::size_t>(k)].begin;
    const double e = pieces[static_cast<std::size_t>(k)].end;
    for (Index i = 0; i < samples_per_segment; ++i) {
      const double s = i == samples_per_segment - 1
                           ? 1.0
                           : static_cast<double>(i) / static_cast<double>(samples_per_segment - 1);
      const MatrixTuple x = path.piece_at(k, s);
      const double defect = variety_defect(kind, x);
      const double dev = eth(center, x);
      c.max_membership_defect = std::max(c.max_membership_defect, defect);
      c.max_eth_deviation = std::max(c.max_eth_deviation, dev);
      if (kind == VarietyKind::Torus) {
        for (const auto& u : x) c.max_unitarity_defect = std::max(c.max_unitarity_defect, unitarity_defect(u));
      }
      ++c.samples;
      if (trace) trace->push_back({b + (e - b) * s, defect, dev});
    }
  }
  c.endpoint_residuals.first = eth(path.start(), center);
  if (target) c.endpoint_residuals.second = eth(path.finish(), *target);
  return c;
}

}  // namespace ulpac
