#pragma once

// Matrix tuples, the cube / disk / torus varieties, the eth metric and
// approximate membership in varieties cut out by noncommutative
// polynomial systems.

#include <algorithm>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ulpac/matcore.hpp"

namespace ulpac {

/// Ordered m-tuple of n x n complex matrices, m >= 1.
class MatrixTuple {
 public:
  MatrixTuple() = default;

  explicit MatrixTuple(std::vector<CMatrix> components) : components_(std::move(components)) {
    validate();
  }

  MatrixTuple(std::initializer_list<CMatrix> components)
      : MatrixTuple(std::vector<CMatrix>(components)) {}

  /// m copies of the n x n zero matrix.
  static MatrixTuple zeros(Index m, Index n) {
    return MatrixTuple(std::vector<CMatrix>(static_cast<std::size_t>(m), CMatrix::Zero(n, n)));
  }

  Index size() const { return static_cast<Index>(components_.size()); }
  Index dim() const { return components_.empty() ? 0 : components_.front().rows(); }
  bool empty() const { return components_.empty(); }

  const CMatrix& operator[](Index j) const { return components_[static_cast<std::size_t>(j)]; }
  CMatrix& operator[](Index j) { return components_[static_cast<std::size_t>(j)]; }

  const std::vector<CMatrix>& components() const { return components_; }
  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  /// Ad[w] applied to every component.
  MatrixTuple conjugated(const CMatrix& w) const {
    std::vector<CMatrix> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(w * c * w.adjoint());
    return MatrixTuple(std::move(out));
  }

  double max_norm() const {
    double r = 0.0;
    for (const auto& c : components_) r = std::max(r, op_norm(c));
    return r;
  }

 private:
  void validate() const {
    if (components_.empty()) throw InvalidInput("MatrixTuple: needs at least one component");
    const Index n = components_.front().rows();
    for (const auto& c : components_) {
      if (c.rows() != c.cols() || c.rows() != n) {
        throw InvalidInput("MatrixTuple: components must be square of uniform dimension");
      }
    }
  }

  std::vector<CMatrix> components_;
};

enum class VarietyKind { Cube, Disk, Torus };

inline constexpr VarietyKind kAllVarieties[] = {VarietyKind::Cube, VarietyKind::Disk,
                                                VarietyKind::Torus};

inline std::string_view to_string(VarietyKind kind) {
  switch (kind) {
    case VarietyKind::Cube: return "cube";
    case VarietyKind::Disk: return "disk";
    case VarietyKind::Torus: return "torus";
  }
  return "unknown";
}

inline std::optional<VarietyKind> parse_variety(std::string_view s) {
  for (VarietyKind k : kAllVarieties) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace detail {

inline void require_same_shape(const MatrixTuple& x, const MatrixTuple& y, const char* op) {
  if (x.size() != y.size() || x.dim() != y.dim()) {
    throw InvalidInput(std::string(op) + ": tuple shape mismatch");
  }
}

}  // namespace detail

/// max_j ||x_j - y_j||.
inline double eth(const MatrixTuple& x, const MatrixTuple& y) {
  detail::require_same_shape(x, y, "eth");
  double d = 0.0;
  for (Index j = 0; j < x.size(); ++j) d = std::max(d, op_norm(x[j] - y[j]));
  return d;
}

struct Neighborhood {
  MatrixTuple center;
  double radius = 0.0;

  Neighborhood(MatrixTuple c, double r) : center(std::move(c)), radius(r) {
    if (!(radius >= 0.0)) throw InvalidInput("Neighborhood: negative radius");
  }

  bool contains(const MatrixTuple& x) const { return eth(center, x) <= radius; }
};

/// Largest pairwise commutator norm; 0 for m = 1.
inline double max_commutator(const MatrixTuple& x) {
  double d = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    for (Index k = j + 1; k < x.size(); ++k) d = std::max(d, op_norm(commutator(x[j], x[k])));
  }
  return d;
}

/// Distance from being a pairwise commuting family of normal matrices
/// (no norm constraint).
inline double commuting_normal_defect(const MatrixTuple& x) {
  double d = max_commutator(x);
  for (const auto& c : x) d = std::max(d, normality_defect(c));
  return d;
}

/// Approximate-membership defect; zero iff x lies in the variety.
inline double variety_defect(VarietyKind kind, const MatrixTuple& x) {
  double d = max_commutator(x);
  for (const auto& c : x) {
    switch (kind) {
      case VarietyKind::Cube:
        d = std::max({d, hermiticity_defect(c), contraction_excess(c)});
        break;
      case VarietyKind::Disk:
        d = std::max({d, normality_defect(c), contraction_excess(c)});
        break;
      case VarietyKind::Torus:
        d = std::max(d, unitarity_defect(c));
        break;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Noncommutative polynomials

/// Symbol x_{var+1} or its adjoint.
struct NCSymbol {
  Index var = 0;  // zero-based
  bool adjoint = false;

  friend bool operator==(const NCSymbol&, const NCSymbol&) = default;
};

/// coef * w_1 w_2 ... w_k; the empty word is the identity.
struct NCTerm {
  Complex coef{1.0, 0.0};
  std::vector<NCSymbol> word;
};

struct NCPolynomial {
  std::vector<NCTerm> terms;

  NCPolynomial& add(Complex coef, std::vector<NCSymbol> word) {
    terms.push_back({coef, std::move(word)});
    return *this;
  }
};

/// Defines Z_{eps,n}(p_1..p_J) = { X : ||p_j(X)|| <= eps for all j }.
/// Fixed coefficient matrices (as in Sylvester-type systems) are bound as
/// additional variables of the tuple.
struct NCPolynomialSystem {
  Index num_vars = 0;
  std::vector<NCPolynomial> polynomials;
  double epsilon = 0.0;

  void validate() const {
    if (num_vars < 1) throw InvalidInput("NCPolynomialSystem: needs at least one variable");
    if (!(epsilon >= 0.0)) throw InvalidInput("NCPolynomialSystem: negative epsilon");
    for (const auto& p : polynomials) {
      for (const auto& t : p.terms) {
        if (!std::isfinite(t.coef.real()) || !std::isfinite(t.coef.imag())) {
          throw InvalidInput("NCPolynomialSystem: non-finite coefficient");
        }
        for (const auto& s : t.word) {
          if (s.var < 0 || s.var >= num_vars) {
            throw InvalidInput("NCPolynomialSystem: word references undeclared symbol x" +
                               std::to_string(s.var + 1));
          }
        }
      }
    }
  }
};

inline NCSymbol sym(Index one_based) { return {one_based - 1, false}; }
inline NCSymbol sym_adj(Index one_based) { return {one_based - 1, true}; }

inline CMatrix nc_eval(const NCPolynomial& p, const MatrixTuple& x) {
  const Index n = x.dim();
  CMatrix acc = CMatrix::Zero(n, n);
  for (const auto& term : p.terms) {
    CMatrix w = CMatrix::Identity(n, n);
    for (const auto& s : term.word) {
      if (s.var < 0 || s.var >= x.size()) {
        throw InvalidInput("nc_eval: unbound symbol x" + std::to_string(s.var + 1));
      }
      if (s.adjoint) {
        w = w * x[s.var].adjoint();
      } else {
        w = w * x[s.var];
      }
    }
    acc += term.coef * w;
  }
  return acc;
}

/// max_j ||p_j(x)||.
inline double smv_defect(const NCPolynomialSystem& sys, const MatrixTuple& x) {
  sys.validate();
  if (sys.num_vars > x.size()) {
    throw InvalidInput("smv_defect: system has more variables than the tuple");
  }
  double d = 0.0;
  for (const auto& p : sys.polynomials) d = std::max(d, op_norm(nc_eval(p, x)));
  return d;
}

inline bool smv_member(const NCPolynomialSystem& sys, const MatrixTuple& x) {
  return smv_defect(sys, x) <= sys.epsilon;
}

/// The polynomial part of a named variety's definition. The contraction
/// constraint of the cube and disk is not polynomial and is handled by
/// `variety_defect_via_system`.
inline NCPolynomialSystem defining_system(VarietyKind kind, Index m) {
  NCPolynomialSystem sys;
  sys.num_vars = m;
  for (Index j = 1; j <= m; ++j) {
    for (Index k = j + 1; k <= m; ++k) {
      NCPolynomial p;
      p.add(1.0, {sym(j), sym(k)}).add(-1.0, {sym(k), sym(j)});
      sys.polynomials.push_back(std::move(p));
    }
  }
  for (Index j = 1; j <= m; ++j) {
    switch (kind) {
      case VarietyKind::Cube: {
        NCPolynomial p;
        p.add(1.0, {sym(j)}).add(-1.0, {sym_adj(j)});
        sys.polynomials.push_back(std::move(p));
        break;
      }
      case VarietyKind::Disk: {
        NCPolynomial p;
        p.add(1.0, {sym(j), sym_adj(j)}).add(-1.0, {sym_adj(j), sym(j)});
        sys.polynomials.push_back(std::move(p));
        break;
      }
      case VarietyKind::Torus: {
        NCPolynomial left, right;
        left.add(1.0, {sym_adj(j), sym(j)}).add(-1.0, {});
        right.add(1.0, {sym(j), sym_adj(j)}).add(-1.0, {});
        sys.polynomials.push_back(std::move(left));
        sys.polynomials.push_back(std::move(right));
        break;
      }
    }
  }
  return sys;
}

/// Generic-path evaluation of `variety_defect`: SMV defect of the
/// defining system with the contraction excess appended.
inline double variety_defect_via_system(VarietyKind kind, const MatrixTuple& x) {
  double d = smv_defect(defining_system(kind, x.size()), x);
  if (kind != VarietyKind::Torus) {
    for (const auto& c : x) d = std::max(d, contraction_excess(c));
  }
  return d;
}

}  // namespace ulpac
