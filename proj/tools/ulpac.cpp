// ulpac: experiment runner and file utilities.
//
//   ulpac run --variety cube --n 8 --m 2 --delta 0.05 --trials 50 --out report.json
//   ulpac gen --variety torus --n 4 --m 2 --seed 7 --delta 0.05 --prefix pair
//   ulpac verify --x pair_x1.mtx pair_x2.mtx --y pair_y1.mtx pair_y2.mtx --path path.json
//   ulpac mask --input a.mtx --epsilon 0.1 --format pgm --out mask.pgm
//   ulpac jointspec --input x1.mtx x2.mtx --out spectrum.csv

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ulpac/ulpac.hpp"

namespace {

using namespace ulpac;

ulpac::MatrixTuple read_tuple(const std::vector<std::string>& files) {
  std::vector<CMatrix> comps;
  for (const auto& f : files) comps.push_back(mm_read(f));
  return MatrixTuple(std::move(comps));
}

VarietyKind variety_or_throw(const std::string& s) {
  const auto v = parse_variety(s);
  if (!v) throw InvalidInput("unknown variety '" + s + "' (expected cube, disk or torus)");
  return *v;
}

std::ostream& open_out(const std::string& path, std::ofstream& file, bool binary = false) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, binary ? std::ios::binary : std::ios::out);
  if (!file) throw IoError("cannot open " + path + " for writing");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local homotopies between nearby commuting matrix tuples"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Generate seeded pairs, build homotopies and verify them");
  std::string variety = "cube", config_path;
  ExperimentConfig cfg;
  run->add_option("--config", config_path, "JSON config; flags given explicitly override it");
  run->add_option("--variety", variety, "cube, disk or torus");
  run->add_option("--n", cfg.n, "matrix size");
  run->add_option("--m", cfg.m, "tuple arity");
  run->add_option("--delta", cfg.delta, "closeness of each pair");
  run->add_option("--k-m", cfg.k_m, "constant used in the epsilon budgets");
  run->add_option("--seed", cfg.seed, "base seed");
  run->add_option("--trials", cfg.trials, "pairs per size");
  run->add_option("--samples", cfg.samples_per_segment, "samples per path segment");
  run->add_option("--out", cfg.out, "report file");
  run->add_option("--n-sweep", cfg.n_sweep, "list of sizes to sweep instead of --n");
  run->add_option("--emit-dir", cfg.emit_dir, "write endpoints and path descriptions here");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a random member (and optionally a nearby member)");
  std::string gen_variety = "cube", prefix = "tuple";
  Index gen_n = 4, gen_m = 2;
  std::uint64_t gen_seed = 1;
  double gen_delta = 0.0;
  gen->add_option("--variety", gen_variety, "cube, disk or torus");
  gen->add_option("--n", gen_n, "matrix size");
  gen->add_option("--m", gen_m, "tuple arity");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--delta", gen_delta, "also write a perturbation at this distance");
  gen->add_option("--prefix", prefix, "output prefix");

  // verify
  auto* verify = app.add_subcommand("verify", "Re-verify a path description against its endpoints");
  std::vector<std::string> x_files, y_files;
  std::string path_file, trace_file;
  double verify_eps = -1.0;
  Index verify_samples = 0;
  verify->add_option("--x", x_files, "start tuple (Matrix Market files)")->required();
  verify->add_option("--y", y_files, "end tuple (Matrix Market files)")->required();
  verify->add_option("--path", path_file, "path JSON")->required();
  verify->add_option("--epsilon", verify_eps, "override the recorded epsilon");
  verify->add_option("--samples", verify_samples, "override the recorded samples per segment");
  verify->add_option("--trace", trace_file, "CSV trace of (t, defect, deviation)");

  // mask
  auto* mask = app.add_subcommand("mask", "Epsilon-pseudospectrum mask of a matrix");
  std::string mask_in, mask_out, mask_format = "csv";
  double mask_eps = 0.1, width = 3.0, height = 3.0, cre = 0.0, cim = 0.0;
  Index nx = 128, ny = 128;
  mask->add_option("--input", mask_in, "Matrix Market file")->required();
  mask->add_option("--epsilon", mask_eps, "level");
  mask->add_option("--nx", nx, "grid columns");
  mask->add_option("--ny", ny, "grid rows");
  mask->add_option("--width", width, "grid width");
  mask->add_option("--height", height, "grid height");
  mask->add_option("--center-re", cre, "grid centre, real part");
  mask->add_option("--center-im", cim, "grid centre, imaginary part");
  mask->add_option("--format", mask_format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
  mask->add_option("--out", mask_out, "output file (stdout if omitted)");

  // jointspec
  auto* jspec = app.add_subcommand("jointspec", "Joint spectrum of a commuting normal tuple as CSV");
  std::vector<std::string> js_in;
  std::string js_out;
  jspec->add_option("--input", js_in, "Matrix Market files, one per component")->required();
  jspec->add_option("--out", js_out, "output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw IoError("cannot open " + config_path);
        ExperimentConfig from_file = config_from_json(json::parse(in));
        // Explicit flags win over the file.
        if (run->count("--variety")) from_file.variety = variety_or_throw(variety);
        if (run->count("--n")) from_file.n = cfg.n;
        if (run->count("--m")) from_file.m = cfg.m;
        if (run->count("--delta")) from_file.delta = cfg.delta;
        if (run->count("--k-m")) from_file.k_m = cfg.k_m;
        if (run->count("--seed")) from_file.seed = cfg.seed;
        if (run->count("--trials")) from_file.trials = cfg.trials;
        if (run->count("--samples")) from_file.samples_per_segment = cfg.samples_per_segment;
        if (run->count("--out")) from_file.out = cfg.out;
        if (run->count("--n-sweep")) from_file.n_sweep = cfg.n_sweep;
        if (run->count("--emit-dir")) from_file.emit_dir = cfg.emit_dir;
        cfg = from_file;
      } else {
        cfg.variety = variety_or_throw(variety);
      }
      const ExperimentReport r = run_experiment(cfg);
      json out = r.report["summary"];
      if (r.report.contains("sweep")) out["sweep"] = r.report["sweep"];
      std::cout << out.dump(2) << "\n";
      return r.all_pass ? 0 : 1;
    }

    if (*gen) {
      const VarietyKind kind = variety_or_throw(gen_variety);
      const MatrixTuple x = gen_member(kind, gen_n, gen_m, gen_seed);
      for (Index j = 0; j < x.size(); ++j) mm_write(prefix + "_x" + std::to_string(j + 1) + ".mtx", x[j]);
      if (gen_delta > 0.0) {
        const MatrixTuple y = gen_perturbation(x, kind, gen_delta, derive_seed(gen_seed, 1));
        for (Index j = 0; j < y.size(); ++j) mm_write(prefix + "_y" + std::to_string(j + 1) + ".mtx", y[j]);
        std::cout << "eth " << eth(x, y) << "\n";
      }
      return 0;
    }

    if (*verify) {
      const MatrixTuple x = read_tuple(x_files);
      const MatrixTuple y = read_tuple(y_files);
      std::ifstream in(path_file);
      if (!in) throw IoError("cannot open " + path_file);
      const json pj = json::parse(in);
      const TuplePath path = tuple_path_from_json(pj);
      const VarietyKind kind = variety_or_throw(pj.at("variety").get<std::string>());
      const double eps = verify_eps >= 0 ? verify_eps : pj.at("epsilon").get<double>();
      const Index samples = verify_samples > 0 ? verify_samples : pj.at("samples").get<Index>();
      std::vector<TraceRow> trace;
      const HomotopyCertificate c =
          verify_path(path, kind, x, eps, samples, &y, trace_file.empty() ? nullptr : &trace);
      if (!trace_file.empty()) {
        std::ofstream t(trace_file);
        if (!t) throw IoError("cannot open " + trace_file + " for writing");
        write_trace_csv(t, trace);
      }
      std::cout << to_json(c).dump(2) << "\n";
      return c.passes() ? 0 : 1;
    }

    if (*mask) {
      PlanarGrid grid{{cre, cim}, width, height, nx, ny};
      const PseudospectrumMask m = pseudospectrum_mask(mm_read(mask_in), mask_eps, grid);
      std::ofstream file;
      std::ostream& out = open_out(mask_out, file, mask_format == "pgm");
      if (mask_format == "pgm") write_mask_pgm(out, m);
      else write_mask_csv(out, m);
      return 0;
    }

    if (*jspec) {
      const JointSpectrum js = joint_spectrum(read_tuple(js_in));
      std::ofstream file;
      write_joint_spectrum_csv(open_out(js_out, file), js);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "ulpac: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
