#pragma once

// JSON encodings of polynomial systems, approximants, certificates and
// path descriptions.

#include <string>
#include <vector>

#include <json.hpp>

#include "ulpac/homotopy.hpp"
#include "ulpac/path.hpp"
#include "ulpac/psra.hpp"
#include "ulpac/varieties.hpp"

namespace ulpac {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Matrices: {"rows": r, "cols": c, "re": [...], "im": [...]} column-major.

inline json matrix_to_json(const CMatrix& a) {
  json re = json::array(), im = json::array();
  for (Index c = 0; c < a.cols(); ++c) {
    for (Index r = 0; r < a.rows(); ++r) {
      re.push_back(a(r, c).real());
      im.push_back(a(r, c).imag());
    }
  }
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"re", re}, {"im", im}};
}

inline CMatrix matrix_from_json(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (rows < 0 || cols < 0 || re.size() != static_cast<std::size_t>(rows * cols) ||
      im.size() != re.size()) {
    throw InvalidInput("matrix_from_json: entry count does not match dimensions");
  }
  CMatrix a(rows, cols);
  std::size_t k = 0;
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r, ++k) a(r, c) = {re[k].get<double>(), im[k].get<double>()};
  }
  return a;
}

inline json vector_to_json(const RVector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline RVector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RVector>(v.data(), static_cast<Index>(v.size()));
}

// ---------------------------------------------------------------------------
// Polynomial systems: {vars, eps, polys: [[{coef: [re, im], word: ["x1", "x2*"]}]]}

inline json to_json(const NCPolynomialSystem& sys) {
  json polys = json::array();
  for (const auto& p : sys.polynomials) {
    json terms = json::array();
    for (const auto& t : p.terms) {
      json word = json::array();
      for (const auto& s : t.word) word.push_back("x" + std::to_string(s.var + 1) + (s.adjoint ? "*" : ""));
      terms.push_back({{"coef", {t.coef.real(), t.coef.imag()}}, {"word", word}});
    }
    polys.push_back(terms);
  }
  return {{"vars", sys.num_vars}, {"eps", sys.epsilon}, {"polys", polys}};
}

inline NCSymbol parse_symbol(const std::string& s) {
  if (s.size() < 2 || s[0] != 'x') throw InvalidInput("parse_symbol: malformed symbol '" + s + "'");
  const bool adj = s.back() == '*';
  const std::string digits = s.substr(1, s.size() - 1 - (adj ? 1 : 0));
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidInput("parse_symbol: malformed symbol '" + s + "'");
  }
  const Index idx = std::stoll(digits);
  if (idx < 1) throw InvalidInput("parse_symbol: symbols are numbered from x1");
  return {idx - 1, adj};
}

inline NCPolynomialSystem polynomial_system_from_json(const json& j) {
  NCPolynomialSystem sys;
  sys.num_vars = j.at("vars").get<Index>();
  sys.epsilon = j.at("eps").get<double>();
  for (const auto& p : j.at("polys")) {
    NCPolynomial poly;
    for (const auto& t : p) {
      const auto& c = t.at("coef");
      if (c.size() != 2) throw InvalidInput("polynomial_system_from_json: coef must be [re, im]");
      std::vector<NCSymbol> word;
      for (const auto& s : t.at("word")) word.push_back(parse_symbol(s.get<std::string>()));
      poly.add({c[0].get<double>(), c[1].get<double>()}, std::move(word));
    }
    sys.polynomials.push_back(std::move(poly));
  }
  sys.validate();
  return sys;
}

// ---------------------------------------------------------------------------
// Approximants and certificates

inline json to_json(const PsraResult& r) {
  json values = json::array();
  for (const auto& v : r.decomposition.values) values.push_back(vector_to_json(v));
  return {{"delta", r.grids.delta},
          {"grid", r.grids.rep_points},
          {"support", r.grids.support_points},
          {"ranks", r.decomposition.ranks},
          {"values", values},
          {"rep_sets", r.rep_sets},
          {"achieved_error", r.achieved_error}};
}

inline json to_json(const HomotopyCertificate& c) {
  return {{"variety", std::string(to_string(c.variety))},
          {"epsilon_budget", c.epsilon_budget},
          {"epsilon_hat", c.epsilon_hat},
          {"deviation_limit", c.deviation_limit},
          {"max_membership_defect", c.max_membership_defect},
          {"max_eth_deviation", c.max_eth_deviation},
          {"max_unitarity_defect", c.max_unitarity_defect},
          {"endpoint_residuals", {c.endpoint_residuals.first, c.endpoint_residuals.second}},
          {"samples", c.samples},
          {"defect_tolerance", c.defect_tolerance},
          {"endpoint_tolerance", c.endpoint_tolerance},
          {"epsilons", {{"eps1", c.eps1}, {"eps2", c.eps2}, {"eps3", c.eps3}}},
          {"n_projectors", c.n_projectors},
          {"within_budget", c.within_budget()},
          {"passes", c.passes()}};
}

inline json to_json(const HomotopyDiagnostics& d) {
  return {{"curved", d.curved},
          {"omega", d.omega},
          {"correction_achieved", d.correction_achieved},
          {"correction_meets_target", d.correction_meets_target},
          {"branch_ties", d.branch_ties},
          {"segment_bounds", d.segment_bounds},
          {"intertwiner_epsilon_hat", d.intertwiner.epsilon_hat},
          {"intertwiner_ratio", d.intertwiner_ratio},
          {"matching_cost", d.intertwiner.matching_cost},
          {"commutator_residual", d.intertwiner.commutator_residual},
          {"projector_ranks", d.decomposition.ranks}};
}

// ---------------------------------------------------------------------------
// Paths

inline json to_json(const PathSegment& s) {
  switch (s.kind()) {
    case SegmentKind::Flat: {
      const auto& f = std::get<PathSegment::Flat>(s.data());
      return {{"kind", "flat"}, {"a", matrix_to_json(f.a)}, {"b", matrix_to_json(f.b)}};
    }
    case SegmentKind::Curved: {
      const auto& c = std::get<PathSegment::Curved>(s.data());
      return {{"kind", "curved"},
              {"k_hat", matrix_to_json(c.k_hat)},
              {"base", matrix_to_json(c.base)},
              {"t0", c.t0},
              {"t1", c.t1}};
    }
    case SegmentKind::FlatUnitary: {
      const auto& f = std::get<PathSegment::FlatUnitary>(s.data());
      if (f.basis) {
        return {{"kind", "flat_unitary"},
                {"basis", matrix_to_json(*f.basis)},
                {"u_exp", vector_to_json(f.u_exp)},
                {"v_exp", vector_to_json(f.v_exp)}};
      }
      return {{"kind", "flat_unitary"}, {"h_u", matrix_to_json(f.h_u)}, {"h_v", matrix_to_json(f.h_v)}};
    }
  }
  return {};
}

inline PathSegment segment_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "flat") return PathSegment::flat(matrix_from_json(j.at("a")), matrix_from_json(j.at("b")));
  if (kind == "curved") {
    return PathSegment::curved(matrix_from_json(j.at("k_hat")), matrix_from_json(j.at("base")),
                               j.at("t0").get<double>(), j.at("t1").get<double>());
  }
  if (kind == "flat_unitary") {
    if (j.contains("basis")) {
      return PathSegment::flat_unitary_diagonal(matrix_from_json(j.at("basis")),
                                                vector_from_json(j.at("u_exp")),
                                                vector_from_json(j.at("v_exp")));
    }
    return PathSegment::flat_unitary(matrix_from_json(j.at("h_u")), matrix_from_json(j.at("h_v")));
  }
  throw InvalidInput("segment_from_json: unknown segment kind '" + kind + "'");
}

/// {"components": [{"pieces": [{"begin", "end", "segment"}]}]}
inline json to_json(const TuplePath& p) {
  json comps = json::array();
  for (const auto& c : p.components()) {
    json pieces = json::array();
    for (const auto& pc : c.pieces()) {
      pieces.push_back({{"begin", pc.begin}, {"end", pc.end}, {"segment", to_json(pc.segment)}});
    }
    comps.push_back({{"pieces", pieces}});
  }
  return {{"components", comps}};
}

inline TuplePath tuple_path_from_json(const json& j) {
  std::vector<MatrixPath> comps;
  for (const auto& c : j.at("components")) {
    std::vector<MatrixPath::Piece> pieces;
    for (const auto& pc : c.at("pieces")) {
      pieces.push_back({segment_from_json(pc.at("segment")), pc.at("begin").get<double>(),
                        pc.at("end").get<double>()});
    }
    const Index n = pieces.empty() ? 0 : pieces.front().segment.dim();
    comps.push_back(MatrixPath::from_pieces(std::move(pieces), 1e-8 * static_cast<double>(std::max<Index>(n, 1))));
  }
  return TuplePath(std::move(comps));
}

}  // namespace ulpac
