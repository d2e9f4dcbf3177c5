#pragma once

// Seeded generation of variety members and nearby pairs, and the trial
// runner behind the `ulpac run` command.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ulpac/homotopy.hpp"
#include "ulpac/io.hpp"
#include "ulpac/jointspec.hpp"
#include "ulpac/rng.hpp"
#include "ulpac/serialize.hpp"
#include "ulpac/varieties.hpp"

namespace ulpac {

struct ExperimentConfig {
  VarietyKind variety = VarietyKind::Cube;
  Index n = 8;
  Index m = 2;
  double delta = 0.05;
  double k_m = 4.0;
  std::uint64_t seed = 1;
  Index samples_per_segment = 256;
  Index trials = 10;
  std::vector<Index> n_sweep;  // when nonempty, overrides n
  std::string out;             // report path; empty for none
  std::string emit_dir;        // per-trial endpoints and paths; empty for none

  void validate() const {
    if (n < 1 || m < 1) throw InvalidInput("ExperimentConfig: n and m must be >= 1");
    for (Index k : n_sweep) {
      if (k < 1) throw InvalidInput("ExperimentConfig: sweep sizes must be >= 1");
    }
    if (!(delta > 0.0) || delta > 1.0) throw InvalidInput("ExperimentConfig: delta must lie in (0, 1]");
    if (trials < 1) throw InvalidInput("ExperimentConfig: trials must be >= 1");
    if (samples_per_segment < 2) throw InvalidInput("ExperimentConfig: samples must be >= 2");
    if (!(k_m >= 0.0)) throw InvalidInput("ExperimentConfig: k_m must be >= 0");
  }
};

inline json to_json(const ExperimentConfig& c) {
  return {{"variety", std::string(to_string(c.variety))},
          {"n", c.n},
          {"m", c.m},
          {"delta", c.delta},
          {"k_m", c.k_m},
          {"seed", c.seed},
          {"samples", c.samples_per_segment},
          {"trials", c.trials},
          {"n_sweep", c.n_sweep}};
}

/// Keys as in to_json; absent keys keep the defaults of `base`.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {}) {
  if (j.contains("variety")) {
    const auto v = parse_variety(j.at("variety").get<std::string>());
    if (!v) throw InvalidInput("config: unknown variety " + j.at("variety").dump());
    base.variety = *v;
  }
  if (j.contains("n")) base.n = j.at("n").get<Index>();
  if (j.contains("m")) base.m = j.at("m").get<Index>();
  if (j.contains("delta")) base.delta = j.at("delta").get<double>();
  if (j.contains("k_m")) base.k_m = j.at("k_m").get<double>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("samples")) base.samples_per_segment = j.at("samples").get<Index>();
  if (j.contains("trials")) base.trials = j.at("trials").get<Index>();
  if (j.contains("n_sweep")) base.n_sweep = j.at("n_sweep").get<std::vector<Index>>();
  if (j.contains("out")) base.out = j.at("out").get<std::string>();
  if (j.contains("emit_dir")) base.emit_dir = j.at("emit_dir").get<std::string>();
  return base;
}

namespace detail {

inline Complex random_scalar(VarietyKind kind, SplitMix64& rng) {
  switch (kind) {
    case VarietyKind::Cube: return {rng.uniform(-1.0, 1.0), 0.0};
    case VarietyKind::Disk: {
      const double r = std::sqrt(rng.uniform());
      return std::polar(r, 2.0 * kPi * rng.uniform());
    }
    case VarietyKind::Torus: return std::polar(1.0, 2.0 * kPi * rng.uniform());
  }
  return {};
}

inline CMatrix finish_member(VarietyKind kind, const CMatrix& q, const CVector& d) {
  CMatrix a = q * d.asDiagonal() * q.adjoint();
  if (kind == VarietyKind::Cube) a = hermitian_part(a);
  return a;
}

}  // namespace detail

/// Haar unitary q conjugating random diagonal tuples with entries in
/// [-1, 1], the closed unit disk, or the unit circle.
inline MatrixTuple gen_member(VarietyKind kind, Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw InvalidInput("gen_member: n and m must be >= 1");
  SplitMix64 rng(seed);
  const CMatrix q = random_unitary(n, rng);
  std::vector<CMatrix> comps;
  for (Index j = 0; j < m; ++j) {
    CVector d(n);
    for (Index k = 0; k < n; ++k) d(k) = detail::random_scalar(kind, rng);
    comps.push_back(detail::finish_member(kind, q, d));
  }
  return MatrixTuple(std::move(comps));
}

/// Member y of the same variety with eth(x, y) <= delta: each joint
/// eigenvalue moves by at most delta / 2 inside the scalar domain, then the
/// tuple is conjugated by e^{i pi (delta / (4 pi)) K} for a random
/// hermitian contraction K, which moves it by at most delta / 2 more.
inline MatrixTuple gen_perturbation(const MatrixTuple& x, VarietyKind kind, double delta,
                                    std::uint64_t seed) {
  if (!(delta >= 0.0)) throw InvalidInput("gen_perturbation: negative delta");
  if (delta == 0.0) return x;
  const Index n = x.dim();
  const Index m = x.size();
  SplitMix64 rng(seed);
  const JointSpectrum js = joint_diagonalize(x);
  const double max_turn = 2.0 * std::asin(std::min(1.0, delta / 4.0));

  std::vector<CMatrix> comps;
  for (Index j = 0; j < m; ++j) {
    CVector d(n);
    for (Index k = 0; k < n; ++k) {
      const Complex p = js.points(k, j);
      switch (kind) {
        case VarietyKind::Cube:
          d(k) = std::clamp(p.real() + rng.uniform(-delta / 2, delta / 2), -1.0, 1.0);
          break;
        case VarietyKind::Disk: {
          const Complex base = std::abs(p) > 1.0 ? p / std::abs(p) : p;
          Complex z = base + std::polar(delta / 2 * std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
          if (std::abs(z) > 1.0) z /= std::abs(z);
          d(k) = z;
          break;
        }
        case VarietyKind::Torus:
          d(k) = std::polar(1.0, std::arg(p) + rng.uniform(-max_turn, max_turn));
          break;
      }
    }
    comps.push_back(detail::finish_member(kind, js.q, d));
  }
  const CMatrix k = random_hermitian_contraction(n, rng);
  const CMatrix v = expm_i_pi(k * (delta / (4.0 * kPi)));
  MatrixTuple y = MatrixTuple(std::move(comps)).conjugated(v);
  if (kind == VarietyKind::Cube) {
    for (Index j = 0; j < m; ++j) y[j] = detail::hermitian_part(y[j]);
  }
  return y;
}

struct TrialPair {
  MatrixTuple x, y;
};

/// Pair for trial `trial` at size n. Disk pairs are generated at delta / 2,
/// the closeness the disk builder requires.
inline TrialPair trial_pair(const ExperimentConfig& c, Index n, Index trial) {
  const std::uint64_t stream = static_cast<std::uint64_t>(n) * 1000003ULL + static_cast<std::uint64_t>(trial);
  const std::uint64_t s = derive_seed(c.seed, stream);
  TrialPair p;
  p.x = gen_member(c.variety, n, c.m, derive_seed(s, 0));
  const double d = c.variety == VarietyKind::Disk ? c.delta / 2 : c.delta;
  p.y = gen_perturbation(p.x, c.variety, d, derive_seed(s, 1));
  return p;
}

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void emit_trial(const std::string& dir, Index n, Index trial, const TrialPair& p,
                       const Homotopy& h, const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  const std::string stem = "n" + std::to_string(n) + "_t" + std::to_string(trial);
  fs::create_directories(dir);
  for (Index j = 0; j < p.x.size(); ++j) {
    mm_write((fs::path(dir) / (stem + "_x" + std::to_string(j + 1) + ".mtx")).string(), p.x[j]);
    mm_write((fs::path(dir) / (stem + "_y" + std::to_string(j + 1) + ".mtx")).string(), p.y[j]);
  }
  json path = to_json(h.path);
  path["variety"] = std::string(to_string(c.variety));
  path["epsilon"] = h.certificate.epsilon_hat;
  path["samples"] = c.samples_per_segment;
  path["m"] = p.x.size();
  std::ofstream out(fs::path(dir) / (stem + "_path.json"));
  if (!out) throw IoError("cannot write into " + dir);
  out << path.dump() << "\n";
}

struct SummaryAcc {
  Index trials = 0, passes = 0, built = 0, within_budget = 0;
  std::vector<double> eps_hat, eps_ratio, inter_ratio, deviation;

  json to_json(double delta) const {
    const auto mx = [](const std::vector<double>& v) {
      return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    };
    return {{"trials", trials},
            {"built", built},
            {"passes", passes},
            {"pass_rate", trials ? static_cast<double>(passes) / static_cast<double>(trials) : 0.0},
            {"within_budget", within_budget},
            {"max_epsilon_hat", mx(eps_hat)},
            {"median_epsilon_hat", median(eps_hat)},
            {"max_deviation", mx(deviation)},
            {"epsilon_hat_over_delta", mx(eps_hat) / delta},
            {"median_epsilon_hat_over_delta", median(eps_ratio)},
            {"k_m_probe", mx(inter_ratio)}};
  }
};

}  // namespace detail

struct ExperimentReport {
  json report;
  bool all_pass = false;
};

/// Runs every trial in index order. Builder failures are recorded in the
/// trial record and count as non-passing.
inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Index> sizes = c.n_sweep.empty() ? std::vector<Index>{c.n} : c.n_sweep;
  json trials = json::array(), sweep = json::array();
  detail::SummaryAcc total;
  HomotopyOptions opt;
  opt.samples_per_segment = c.samples_per_segment;

  for (Index n : sizes) {
    detail::SummaryAcc acc;
    for (Index t = 0; t < c.trials; ++t) {
      json rec = {{"trial", t}, {"n", n}};
      ++acc.trials;
      try {
        const TrialPair p = trial_pair(c, n, t);
        rec["eth_xy"] = eth(p.x, p.y);
        const Homotopy h = build_homotopy(c.variety, p.x, p.y, c.delta, c.k_m, opt);
        rec["certificate"] = to_json(h.certificate);
        rec["diagnostics"] = to_json(h.diagnostics);
        rec["epsilon_hat_over_delta"] = h.certificate.epsilon_hat / c.delta;
        ++acc.built;
        if (h.certificate.passes()) ++acc.passes;
        if (h.certificate.within_budget()) ++acc.within_budget;
        acc.eps_hat.push_back(h.certificate.epsilon_hat);
        acc.eps_ratio.push_back(h.certificate.epsilon_hat / c.delta);
        acc.inter_ratio.push_back(h.diagnostics.intertwiner_ratio);
        acc.deviation.push_back(h.certificate.max_eth_deviation);
        if (!c.emit_dir.empty()) detail::emit_trial(c.emit_dir, n, t, p, h, c);
      } catch (const Error& e) {
        rec["error"] = e.what();
      }
      rec["passes"] = rec.contains("certificate") && rec["certificate"]["passes"].get<bool>();
      trials.push_back(rec);
    }
    json row = acc.to_json(c.delta);
    row["n"] = n;
    sweep.push_back(row);
    total.trials += acc.trials;
    total.passes += acc.passes;
    total.built += acc.built;
    total.within_budget += acc.within_budget;
    total.eps_hat.insert(total.eps_hat.end(), acc.eps_hat.begin(), acc.eps_hat.end());
    total.eps_ratio.insert(total.eps_ratio.end(), acc.eps_ratio.begin(), acc.eps_ratio.end());
    total.inter_ratio.insert(total.inter_ratio.end(), acc.inter_ratio.begin(), acc.inter_ratio.end());
    total.deviation.insert(total.deviation.end(), acc.deviation.begin(), acc.deviation.end());
  }

  json summary = total.to_json(c.delta);
  summary["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary["timestamp"] = detail::utc_timestamp();

  ExperimentReport r;
  r.report = {{"schema", 1}, {"config", to_json(c)}, {"trials", trials}, {"summary", summary}};
  if (!c.n_sweep.empty()) r.report["sweep"] = sweep;
  r.all_pass = total.passes == total.trials;
  if (!c.out.empty()) {
    std::ofstream out(c.out);
    if (!out) throw IoError("cannot open " + c.out + " for writing");
    out << r.report.dump(2) << "\n";
  }
  return r;
}

}  // namespace ulpac
