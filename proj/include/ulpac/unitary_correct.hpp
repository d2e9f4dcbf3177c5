#pragma once

// Commuting unitary correction: given a unitary W that almost commutes
// with D = sum_j alpha_j P_j, build a unitary Z with [Z, P_j] = 0 for all j
// and ||1 - W Z|| controlled by the projector displacements ||W P_j W* - P_j||.

#include <cmath>
#include <vector>

#include "ulpac/matcore.hpp"
#include "ulpac/psra.hpp"

namespace ulpac {

namespace detail {

inline void require_projector(const CMatrix& p, double tol, const char* op) {
  if (hermiticity_defect(p) > tol || op_norm(p * p - p) > tol) {
    throw InvalidInput(std::string(op) + ": input is not an orthogonal projector");
  }
}

}  // namespace detail

/// Direct rotation between two projectors: unitary w with w* p w = p_tilde
/// and ||1 - w|| <= sqrt(2) ||p - p_tilde||. Requires ||p - p_tilde|| < 1.
inline CMatrix projector_transport(const CMatrix& p, const CMatrix& p_tilde) {
  detail::require_same_dim(p, p_tilde, "projector_transport");
  const Index n = p.rows();
  const double tol = 1e-9 * static_cast<double>(n);
  detail::require_projector(p, tol, "projector_transport");
  detail::require_projector(p_tilde, tol, "projector_transport");
  const double gap = op_norm(p - p_tilde);
  if (gap >= 1.0 - 1e-12) {
    throw InvalidInput("projector_transport: ||p - p_tilde|| = " + std::to_string(gap) +
                       " >= 1, transport undefined");
  }
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix w = nearest_unitary(p * p_tilde + (id - p) * (id - p_tilde));
  const double identity_residual = op_norm(w.adjoint() * p * w - p_tilde);
  if (identity_residual > tol) {
    throw ConstructionError("transport", "w* p w != p_tilde, residual " +
                                             std::to_string(identity_residual));
  }
  const double displacement = op_norm(id - w);
  if (displacement > std::sqrt(2.0) * gap + 1e-8) {
    throw ConstructionError("transport", "||1 - w|| exceeds sqrt(2) ||p - p_tilde||");
  }
  return w;
}

struct CorrectionResult {
  CMatrix z;                            // unitary commuting with every P_j
  double achieved = 0.0;                // ||1 - W Z||
  double transport_sum = 0.0;           // sum_j ||1 - W_j||
  std::vector<double> transport_norms;  // ||1 - W_j||
  std::vector<double> displacements;    // ||W P_j W* - P_j||
  double commutator_residual = 0.0;     // max_j ||[Z, P_j]||
  double unitarity_residual = 0.0;
  double nu = 0.0;
  bool meets_target = false;            // achieved <= nu
};

/// Z = W~* with W~ = sum_j W_j W P_j, where W_j transports P_j onto
/// W P_j W*. The requested bound `nu` is a target: the construction reports
/// the achieved ||1 - W Z|| and whether it met `nu`, and throws only when
/// a block cannot be transported or the output fails self-certification.
inline CorrectionResult commuting_unitary_correction(const CMatrix& w,
                                                     const ProjectiveDecomposition& d,
                                                     double nu) {
  const Index n = w.rows();
  detail::require_square(w, "commuting_unitary_correction");
  const double tol = 1e-9 * static_cast<double>(n);
  if (unitarity_defect(w) > tol) throw InvalidInput("commuting_unitary_correction: W is not unitary");
  if (d.size() < 2) {
    throw InvalidInput("commuting_unitary_correction: needs at least two distinct values");
  }
  for (std::size_t a = 0; a < d.values.size(); ++a) {
    for (std::size_t b = a + 1; b < d.values.size(); ++b) {
      if (d.values[a] == d.values[b]) {
        throw InvalidInput("commuting_unitary_correction: projector values are not distinct");
      }
    }
  }

  CorrectionResult r;
  r.nu = nu;
  const CMatrix id = CMatrix::Identity(n, n);
  CMatrix w_tilde = CMatrix::Zero(n, n);
  for (Index j = 0; j < d.size(); ++j) {
    const CMatrix& p = d.projectors[j];
    const CMatrix moved = detail::hermitian_part(w * p * w.adjoint());
    const double disp = op_norm(moved - p);
    r.displacements.push_back(disp);
    if (disp >= 1.0 / std::sqrt(2.0)) {
      throw ConstructionError("transport", "block " + std::to_string(j) +
                                               " displacement " + std::to_string(disp) +
                                               " >= 1/sqrt(2)");
    }
    const CMatrix wj = projector_transport(p, moved);
    const double t = op_norm(id - wj);
    r.transport_norms.push_back(t);
    r.transport_sum += t;
    w_tilde += wj * w * p;
  }

  r.unitarity_residual = unitarity_defect(w_tilde);
  if (r.unitarity_residual > tol) {
    throw ConstructionError("correction", "W~ unitarity defect " +
                                              std::to_string(r.unitarity_residual));
  }
  r.z = w_tilde.adjoint();
  for (const auto& p : d.projectors) {
    r.commutator_residual = std::max(r.commutator_residual, op_norm(commutator(r.z, p)));
  }
  r.achieved = op_norm(id - w * r.z);
  const double cert_tol = 1e-8 * static_cast<double>(n);
  if (r.commutator_residual > cert_tol || r.achieved > r.transport_sum + cert_tol) {
    throw ConstructionError("correction", "output failed self-certification");
  }
  r.meets_target = r.achieved <= nu;
  return r;
}

}  // namespace ulpac
