#pragma once

// Dense complex matrix primitives shared by every other header: norms,
// commutators, structural defects, hermitian eigendecomposition and the
// e^{i pi K} / principal-log pair for the hermitian/unitary classes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace ulpac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A construction ran but could not certify its postcondition. The stage
/// label names the step that failed (e.g. "intertwiner", "transport").
class ConstructionError : public Error {
 public:
  ConstructionError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Default absolute tolerance for an n-dimensional problem.
inline double default_tol(Index n) {
  return 1e-10 * static_cast<double>(std::max<Index>(n, 1));
}

namespace detail {

inline void require_square(const CMatrix& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw InvalidInput(std::string(op) + ": matrix is not square");
  }
}

inline void require_finite(const CMatrix& a, const char* op) {
  if (!a.allFinite()) {
    throw InvalidInput(std::string(op) + ": non-finite entries");
  }
}

inline void require_same_dim(const CMatrix& a, const CMatrix& b, const char* op) {
  require_square(a, op);
  require_square(b, op);
  if (a.rows() != b.rows()) {
    throw InvalidInput(std::string(op) + ": dimension mismatch");
  }
}

inline CMatrix identity(Index n) { return CMatrix::Identity(n, n); }

inline CMatrix hermitian_part(const CMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

inline CMatrix skew_hermitian_part_over_i(const CMatrix& a) {
  return (a - a.adjoint()) * Complex(0.0, -0.5);
}

}  // namespace detail

/// Spectral norm (largest singular value).
inline double op_norm(const CMatrix& a) {
  detail::require_square(a, "op_norm");
  detail::require_finite(a, "op_norm");
  if (a.size() == 0) return 0.0;
  const CMatrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  detail::require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

inline double hermiticity_defect(const CMatrix& a) {
  return op_norm(a - a.adjoint());
}

inline double normality_defect(const CMatrix& a) {
  return op_norm(a * a.adjoint() - a.adjoint() * a);
}

inline double unitarity_defect(const CMatrix& a) {
  detail::require_square(a, "unitarity_defect");
  const CMatrix id = detail::identity(a.rows());
  return std::max(op_norm(a.adjoint() * a - id), op_norm(a * a.adjoint() - id));
}

inline double contraction_excess(const CMatrix& a) {
  return std::max(0.0, op_norm(a) - 1.0);
}

struct DefectReport {
  double hermiticity = 0.0;
  double normality = 0.0;
  double unitarity = 0.0;
  double contraction_excess = 0.0;
};

inline DefectReport defects(const CMatrix& a) {
  detail::require_square(a, "defects");
  return {hermiticity_defect(a), normality_defect(a), unitarity_defect(a),
          contraction_excess(a)};
}

/// Ad[w](a) = w a w*. Throws when w is not unitary within `tol`
/// (negative selects the default).
inline CMatrix unitary_conjugate(const CMatrix& w, const CMatrix& a, double tol = -1.0) {
  detail::require_same_dim(w, a, "unitary_conjugate");
  if (tol < 0) tol = default_tol(w.rows());
  const double d = unitarity_defect(w);
  if (d > tol) {
    throw InvalidInput("unitary_conjugate: conjugator unitarity defect " + std::to_string(d));
  }
  return w * a * w.adjoint();
}

struct HermEigDecomposition {
  RVector eigenvalues;  // ascending
  CMatrix q;            // unitary, columns are eigenvectors

  CMatrix reconstruct() const {
    return q * eigenvalues.cast<Complex>().asDiagonal() * q.adjoint();
  }
};

/// Eigendecomposition of a hermitian matrix (tridiagonalization + QL).
/// `tol` bounds the accepted hermiticity defect relative to max(1, ||h||).
inline HermEigDecomposition herm_eig(const CMatrix& h, double tol = -1.0) {
  detail::require_square(h, "herm_eig");
  detail::require_finite(h, "herm_eig");
  const Index n = h.rows();
  if (tol < 0) tol = default_tol(n);
  if (n == 0) return {RVector(0), CMatrix(0, 0)};
  const double scale = std::max(1.0, op_norm(h));
  const double d = hermiticity_defect(h);
  if (d > tol * scale) {
    throw InvalidInput("herm_eig: hermiticity defect " + std::to_string(d));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(detail::hermitian_part(h));
  if (es.info() != Eigen::Success) {
    throw ConstructionError("herm_eig", "eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Unitary with the same eigenvectors as `d` and eigenvalues e^{i pi lambda}.
inline CMatrix expm_i_pi(const HermEigDecomposition& d) {
  CVector phases(d.eigenvalues.size());
  for (Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::polar(1.0, kPi * d.eigenvalues(k));
  }
  return d.q * phases.asDiagonal() * d.q.adjoint();
}

/// e^{i pi k} for hermitian k.
inline CMatrix expm_i_pi(const CMatrix& k, double tol = -1.0) {
  return expm_i_pi(herm_eig(k, tol));
}

/// Eigenphase of a unimodular number normalized to (-pi, pi]; the
/// negative real axis (including -1 - 0i) maps to +pi.
inline double principal_phase(Complex z) {
  double phase = std::arg(z);
  if (phase <= -kPi) phase = kPi;
  return phase;
}

/// Hermitian k with eigenvalues in (-1, 1] and e^{i pi k} = u.
inline CMatrix logm_unitary(const CMatrix& u, double tol = -1.0) {
  detail::require_square(u, "logm_unitary");
  detail::require_finite(u, "logm_unitary");
  const Index n = u.rows();
  if (tol < 0) tol = default_tol(n);
  if (n == 0) return CMatrix(0, 0);
  const double d = unitarity_defect(u);
  if (d > tol) {
    throw InvalidInput("logm_unitary: unitarity defect " + std::to_string(d));
  }
  Eigen::ComplexSchur<CMatrix> schur(u);
  if (schur.info() != Eigen::Success) {
    throw ConstructionError("logm_unitary", "Schur iteration did not converge");
  }
  const CMatrix& t = schur.matrixT();
  const CMatrix& q = schur.matrixU();
  CVector exponents(n);
  for (Index k = 0; k < n; ++k) {
    exponents(k) = principal_phase(t(k, k)) / kPi;
  }
  CMatrix k = detail::hermitian_part(q * exponents.asDiagonal() * q.adjoint());
  const double residual = op_norm(expm_i_pi(k) - u);
  if (residual > 1e-9 * static_cast<double>(n)) {
    throw ConstructionError("logm_unitary",
                            "exponential residual " + std::to_string(residual));
  }
  return k;
}

/// Polar unitary factor of an invertible matrix; the unitary closest to
/// `a` in every unitarily invariant norm.
inline CMatrix nearest_unitary(const CMatrix& a) {
  detail::require_square(a, "nearest_unitary");
  detail::require_finite(a, "nearest_unitary");
  if (a.size() == 0) return a;
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > 1e-12)) {
    throw InvalidInput("nearest_unitary: rank-deficient input (sigma_min " +
                       std::to_string(smin) + ")");
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace ulpac
