// chemdim command-line front end.
#include "chemdim/baselines.hpp"
#include "chemdim/bench.hpp"
#include "chemdim/estimator.hpp"
#include "chemdim/extractor.hpp"
#include "chemdim/io.hpp"
#include "chemdim/parallel.hpp"
#include "chemdim/report.hpp"
#include "chemdim/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using namespace chemdim;
namespace fs = std::filesystem;
using io::json;

namespace {

enum Exit { kOk = 0, kValidation = 2, kIo = 3, kNumerical = 4 };

// Collects what a run read and wrote; saved as run_manifest.json.
class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> command)
      : doc_{{"tool", "chemdim"}, {"version", io::kVersion}, {"subcommand", std::move(subcommand)},
             {"command", std::move(command)}, {"params", json::object()}, {"inputs", json::array()},
             {"outputs", json::array()}} {}

  json& params() { return doc_["params"]; }

  std::string read(const fs::path& path) {
    std::string bytes = io::read_file(path);
    doc_["inputs"].push_back({{"path", path.string()}, {"fingerprint", io::fingerprint(bytes)}});
    return bytes;
  }

  void write(const fs::path& path, const std::string& contents) {
    io::write_file_atomic(path, contents);
    record(path, contents);
  }

  void write_json(const fs::path& path, const json& value) { write(path, value.dump(2) + "\n"); }

  void write_pgm(const fs::path& path, const ImageGrid& grid) {
    io::write_pgm(path, grid);
    record(path, io::read_file(path));
    record(io::pgm_sidecar(path), io::read_file(io::pgm_sidecar(path)));
  }

  void save(const fs::path& path) { io::write_json(path, doc_); }

 private:
  void record(const fs::path& path, const std::string& contents) {
    doc_["outputs"].push_back({{"path", path.string()}, {"fingerprint", io::fingerprint(contents)}});
  }
  json doc_;
};

// argv without the options that cannot change any output.
std::vector<std::string> replay_command(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--threads" || a == "--manifest") {
      ++i;
      continue;
    }
    if (a.rfind("--threads=", 0) == 0 || a.rfind("--manifest=", 0) == 0) continue;
    out.push_back(a);
  }
  return out;
}

fs::path manifest_path(const std::string& flag, const fs::path& output_dir) {
  return flag.empty() ? output_dir / "run_manifest.json" : fs::path(flag);
}

fs::path parent_or_cwd(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

struct Input {
  DataMatrix data;
  std::optional<PixelIndexMap> map;
};

Input load_input(Manifest& manifest, const std::string& csv, const std::string& cube) {
  if (csv.empty() == cube.empty()) throw ValidationError("give exactly one of --in or --cube");
  if (!csv.empty()) return {io::decode_csv(manifest.read(csv)), std::nullopt};
  auto [data, map] = unfold(io::decode_hsdc(manifest.read(cube)));
  return {std::move(data), std::move(map)};
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chemical dimensionality estimation and endmember extraction for hyperspectral data"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: CHEMDIM_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);
  std::string manifest_flag;
  app.add_option("--manifest", manifest_flag, "Where to write run_manifest.json (default: next to the outputs)");

  // synth
  SyntheticSpec spec;
  std::string synth_out, synth_shape;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic mixture dataset");
  synth->add_option("--k", spec.k, "Number of endmembers")->required()->check(CLI::Range(2, 1000000));
  synth->add_option("--n", spec.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--p", spec.p, "Number of channels")->capture_default_str()->check(CLI::Range(3, 10000000));
  synth->add_option("--axis-first", spec.axis_first, "First axis position")->capture_default_str();
  synth->add_option("--axis-last", spec.axis_last, "Last axis position")->capture_default_str();
  synth->add_option("--snr", spec.snr, "Amplitude signal-to-noise ratio")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", spec.seed, "Random seed")->required();
  synth->add_flag("!--no-normalize", spec.normalize_endmembers, "Keep endmembers unscaled");
  synth->add_option("--cube", synth_shape, "Also write an HSDC cube of shape NXxNY (NX*NY = n)");
  synth->add_option("--out", synth_out, "Output directory")->required();

  // estimate
  std::string est_in, est_cube, est_report, est_curves;
  std::uint64_t est_seed = 0;
  EstimatorParams est_params;
  auto* est = app.add_subcommand("estimate", "Estimate the chemical dimensionality k_CD");
  est->add_option("--in", est_in, "Input CSV matrix");
  est->add_option("--cube", est_cube, "Input HSDC cube");
  est->add_option("--g", est_params.g, "Largest simplex size and model order")->capture_default_str()->check(CLI::Range(3, 1000));
  est->add_option("--seed", est_seed, "Random seed")->required();
  est->add_flag("--normalize", est_params.normalize_rows, "Scale every spectrum to unit length first");
  est->add_option("--max-sweeps", est_params.max_sweeps, "Simplex sweeps per maximization")->capture_default_str()->check(CLI::PositiveNumber);
  est->add_option("--nmf-tol", est_params.nmf.tol, "Semi-NMF relative objective tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  est->add_option("--nmf-max-iter", est_params.nmf.max_iter, "Semi-NMF iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  est->add_option("--report", est_report, "Report JSON path")->required();
  est->add_option("--curves", est_curves, "Curve CSV path (default: <report>_curves.csv)");

  // extract
  std::string ex_in, ex_cube, ex_report, ex_out;
  Index ex_k = 0;
  std::optional<std::uint64_t> ex_seed;
  EstimatorParams ex_params;
  auto* ex = app.add_subcommand("extract", "Extract k endmembers from the candidate matrix");
  ex->add_option("--in", ex_in, "Input CSV matrix");
  ex->add_option("--cube", ex_cube, "Input HSDC cube");
  auto* ex_k_opt = ex->add_option("--k", ex_k, "Number of endmembers");
  auto* ex_rep_opt = ex->add_option("--from-report", ex_report, "Take k, g, seed and normalization from an estimate report");
  ex_k_opt->excludes(ex_rep_opt);
  ex->add_option("--seed", ex_seed, "Random seed for candidate generation");
  ex->add_option("--g", ex_params.g, "Largest simplex size")->capture_default_str()->check(CLI::Range(3, 1000));
  ex->add_flag("--normalize", ex_params.normalize_rows, "Scale every spectrum to unit length first");
  ex->add_option("--max-sweeps", ex_params.max_sweeps, "Simplex sweeps per maximization")->capture_default_str()->check(CLI::PositiveNumber);
  ex->add_option("--out", ex_out, "Endmember CSV path")->required();

  // reconstruct
  std::string rc_in, rc_cube, rc_endmembers, rc_outdir, rc_shape;
  auto* rc = app.add_subcommand("reconstruct", "NNLS abundance maps and images for a scene");
  rc->add_option("--cube", rc_cube, "Input HSDC cube");
  rc->add_option("--in", rc_in, "Input CSV matrix");
  rc->add_option("--shape", rc_shape, "Image shape NXxNY for CSV input");
  rc->add_option("--endmembers", rc_endmembers, "Endmember CSV")->required();
  rc->add_option("--outdir", rc_outdir, "Output directory")->required();

  // baselines
  std::string bl_in, bl_cube, bl_out, bl_methods = "hfc,aic,mdl,fif,var95,var99";
  double bl_pf = 1e-5;
  bool bl_normalize = false;
  auto* bl = app.add_subcommand("baselines", "Virtual-dimensionality baselines");
  bl->add_option("--in", bl_in, "Input CSV matrix");
  bl->add_option("--cube", bl_cube, "Input HSDC cube");
  bl->add_option("--methods", bl_methods, "Comma-separated subset of hfc,aic,mdl,fif,var95,var99")->capture_default_str();
  bl->add_option("--pf", bl_pf, "HFC false-alarm probability")->capture_default_str();
  bl->add_flag("--normalize", bl_normalize, "Scale every spectrum to unit length first");
  bl->add_option("--out", bl_out, "Comparison CSV path")->required();

  // bench
  std::string bn_grid, bn_out, bn_methods = "cd";
  BenchConfig bn;
  auto* bnc = app.add_subcommand("bench", "Repeated synthetic benchmark with confusion matrices");
  bnc->add_option("--grid-file", bn_grid, "Grid JSON")->required();
  bnc->add_option("--repeats", bn.repeats, "Repeats per spec")->capture_default_str()->check(CLI::PositiveNumber);
  bnc->add_option("--methods", bn_methods, "Comma-separated: cd,hfc,aic,mdl,fif,var95,var99")->capture_default_str();
  bnc->add_option("--g", bn.params.g, "Largest simplex size and model order")->capture_default_str()->check(CLI::Range(3, 1000));
  bnc->add_option("--pf", bn.false_alarm, "HFC false-alarm probability")->capture_default_str();
  bnc->add_option("--out", bn_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  set_thread_count(threads);
  const auto command = replay_command(argc, argv);

  auto split = [](const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) out.push_back(item);
    return out;
  };
  auto parse_shape = [](const std::string& s) -> std::pair<Index, Index> {
    const auto x = s.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(s);
      return {std::stol(s.substr(0, x)), std::stol(s.substr(x + 1))};
    } catch (const std::exception&) {
      throw ValidationError("shape must look like NXxNY, got '" + s + "'");
    }
  };

  try {
    if (*synth) {
      Manifest m("synth", command);
      m.params() = spec_to_json(spec);
      std::optional<std::pair<Index, Index>> shape;
      if (!synth_shape.empty()) {
        shape = parse_shape(synth_shape);
        if (shape->first < 1 || shape->second < 1 || shape->first * shape->second != spec.n)
          throw ValidationError("--cube shape must multiply to n");
      }
      const SyntheticDataset ds = generate(spec);
      const fs::path dir = synth_out;
      ensure_dir(dir);
      m.write(dir / "data.csv", io::encode_csv(ds.noisy));
      m.write(dir / "clean.csv", io::encode_csv(ds.clean));
      m.write(dir / "endmembers.csv", io::encode_csv(DataMatrix(ds.truth.endmembers, ds.noisy.axis())));
      m.write(dir / "weights.csv", io::encode_csv(DataMatrix(ds.truth.weights), false));
      m.write_json(dir / "ground_truth.json",
                   {{"spec", spec_to_json(spec)}, {"sigma", ds.sigma}, {"pure_rows", ds.truth.pure_rows}});
      if (shape) {
        const auto& v = ds.noisy.values();
        std::vector<double> raw;
        raw.reserve(static_cast<size_t>(v.size()));
        for (Index r = 0; r < v.rows(); ++r)
          for (Index c = 0; c < v.cols(); ++c) raw.push_back(v(r, c));
        m.write(dir / "data.hsdc", io::encode_hsdc(HyperCube(shape->first, shape->second, v.cols(), std::move(raw))));
      }
      m.save(manifest_path(manifest_flag, dir));
      std::printf("wrote %ld x %ld dataset (k=%ld, sigma=%g) to %s\n", static_cast<long>(spec.n),
                  static_cast<long>(spec.p), static_cast<long>(spec.k), ds.sigma, dir.string().c_str());
    } else if (*est) {
      Manifest m("estimate", command);
      const Input input = load_input(m, est_in, est_cube);
      m.params() = {{"g", est_params.g}, {"seed", est_seed}, {"normalize", est_params.normalize_rows},
                    {"max_sweeps", est_params.max_sweeps}, {"nmf_tol", est_params.nmf.tol},
                    {"nmf_max_iter", est_params.nmf.max_iter}};
      const auto t0 = std::chrono::steady_clock::now();
      const DimensionalityReport report = estimate(input.data, est_seed, est_params);
      const fs::path report_path = est_report;
      const fs::path curves_path = est_curves.empty() ? with_suffix(report_path, "_curves.csv") : fs::path(est_curves);
      ensure_dir(parent_or_cwd(report_path));
      ensure_dir(parent_or_cwd(curves_path));
      m.write_json(report_path, io::report_to_json(report));
      m.write(curves_path, io::curves_csv(report.curves));
      m.save(manifest_path(manifest_flag, parent_or_cwd(report_path)));
      for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::fprintf(stderr, "candidates %.0f ms, models %.0f ms, total %.0f ms\n", report.timings.candidates_ms,
                   report.timings.models_ms, elapsed_ms(t0));
      std::printf("k_CD = %ld (error-reduction peak z = %ld)\n", static_cast<long>(report.k_cd()),
                  static_cast<long>(report.selection.z));
    } else if (*ex) {
      Manifest m("extract", command);
      Index k = ex_k;
      std::uint64_t seed = 0;
      if (!ex_report.empty()) {
        const DimensionalityReport rep = io::report_from_json(json::parse(m.read(ex_report), nullptr, false));
        k = rep.k_cd();
        seed = rep.seed;
        ex_params.g = rep.g;
        ex_params.normalize_rows = rep.normalized;
        if (ex_seed && *ex_seed != seed) throw ValidationError("--seed disagrees with the report");
      } else {
        if (ex_k_opt->count() == 0) throw ValidationError("give --k or --from-report");
        if (!ex_seed) throw ValidationError("--seed is required for candidate generation");
        seed = *ex_seed;
      }
      if (k < 2) throw ValidationError("k must be at least 2");
      const Input input = load_input(m, ex_in, ex_cube);
      m.params() = {{"k", k}, {"g", ex_params.g}, {"seed", seed}, {"normalize", ex_params.normalize_rows},
                    {"max_sweeps", ex_params.max_sweeps}};
      const PreparedData prepared = prepare(input.data, ex_params);
      const CandidateMatrix v =
          build_candidates(prepared.data, prepared.reduced, seed, {ex_params.g, ex_params.max_sweeps});
      const EndmemberSet set = extract(v, k);
      const fs::path out = ex_out;
      ensure_dir(parent_or_cwd(out));
      m.write(out, io::encode_csv(DataMatrix(set.spectra, v.axis)));
      m.write_json(with_suffix(out, ".json"), io::endmembers_to_json(set, v));
      m.save(manifest_path(manifest_flag, parent_or_cwd(out)));
      std::printf("extracted %ld endmembers (source rows:", static_cast<long>(k));
      for (Index r : set.source_rows) std::printf(" %ld", static_cast<long>(r));
      std::printf("), P_L2 = %g after %d swaps\n", set.l2, set.swaps);
    } else if (*rc) {
      Manifest m("reconstruct", command);
      Input input = load_input(m, rc_in, rc_cube);
      if (!rc_shape.empty()) {
        if (input.map) throw ValidationError("--shape only applies to CSV input");
        const auto [nx, ny] = parse_shape(rc_shape);
        if (nx < 1 || ny < 1 || nx * ny != input.data.rows()) throw ValidationError("--shape does not match the row count");
        PixelIndexMap map{nx, ny, {}};
        for (Index x = 0; x < nx; ++x)
          for (Index y = 0; y < ny; ++y) map.origins.push_back({x, y});
        input.map = map;
      }
      const DataMatrix endmembers = io::decode_csv(m.read(rc_endmembers));
      const AbundanceMap ab = reconstruct(input.data, endmembers.values());
      const fs::path dir = rc_outdir;
      ensure_dir(dir);
      m.write(dir / "abundances.csv", io::encode_csv(DataMatrix(ab.weights), false));
      json links = json::array();
      if (input.map) {
        const auto images = abundance_images(ab, *input.map);
        for (size_t j = 0; j < images.size(); ++j) {
          const std::string name = ab.endmember_ids[j] + ".pgm";
          m.write_pgm(dir / name, images[j]);
          links.push_back({{"id", ab.endmember_ids[j]}, {"column", j}, {"image", name},
                           {"sidecar", io::pgm_sidecar(name).string()}});
        }
      } else {
        for (size_t j = 0; j < ab.endmember_ids.size(); ++j) links.push_back({{"id", ab.endmember_ids[j]}, {"column", j}});
      }
      m.write_json(dir / "reconstruction.json", {{"version", io::kVersion}, {"abundances", "abundances.csv"}, {"endmembers", links}});
      m.save(manifest_path(manifest_flag, dir));
      std::printf("reconstructed %ld pixels on %ld endmembers into %s\n", static_cast<long>(input.data.rows()),
                  static_cast<long>(endmembers.rows()), dir.string().c_str());
    } else if (*bl) {
      Manifest m("baselines", command);
      const Input input = load_input(m, bl_in, bl_cube);
      const auto methods = split(bl_methods);
      m.params() = {{"methods", methods}, {"pf", bl_pf}, {"normalize", bl_normalize}};
      const DataMatrix data = bl_normalize ? input.data.normalized_rows() : input.data;
      const auto results = run_baselines(data.values(), methods, bl_pf);
      const fs::path out = bl_out;
      ensure_dir(parent_or_cwd(out));
      const std::string table = io::baselines_csv(results);
      json doc = json::array();
      for (const auto& r : results) doc.push_back(io::baseline_to_json(r));
      m.write(out, table);
      m.write_json(with_suffix(out, ".json"), {{"version", io::kVersion}, {"results", doc}});
      m.save(manifest_path(manifest_flag, parent_or_cwd(out)));
      std::fputs(table.c_str(), stdout);
    } else if (*bnc) {
      Manifest m("bench", command);
      bn.grid = grid_from_json(json::parse(m.read(bn_grid), nullptr, false));
      bn.methods = split(bn_methods);
      json grid = json::array();
      for (const auto& s : bn.grid) grid.push_back(spec_to_json(s));
      m.params() = {{"repeats", bn.repeats}, {"methods", bn.methods}, {"g", bn.params.g}, {"pf", bn.false_alarm}, {"grid", grid}};
      const auto t0 = std::chrono::steady_clock::now();
      const BenchResult result = run_benchmark(bn);
      const fs::path dir = bn_out;
      ensure_dir(dir);
      for (size_t i = 0; i < bn.methods.size(); ++i)
        m.write(dir / ("confusion_" + bn.methods[i] + ".csv"), confusion_csv(result, static_cast<Index>(i)));
      const std::string table = comparison_csv(result);
      m.write(dir / "comparison_table.csv", table);
      std::ostringstream cells;
      cells << "spec,repeat,algorithm_seed";
      for (const auto& name : bn.methods) cells << ',' << name;
      cells << '\n';
      json errors = json::array();
      for (const auto& c : result.cells) {
        cells << c.spec << ',' << c.repeat << ',' << c.algorithm_seed;
        for (size_t i = 0; i < c.estimates.size(); ++i) {
          cells << ',' << (c.estimates[i] ? std::to_string(*c.estimates[i]) : "--");
          if (!c.errors[i].empty())
            errors.push_back({{"spec", c.spec}, {"repeat", c.repeat}, {"method", bn.methods[i]}, {"error", c.errors[i]}});
        }
        cells << '\n';
      }
      m.write(dir / "cells.csv", cells.str());
      m.params()["errors"] = errors;
      m.save(manifest_path(manifest_flag, dir));
      std::fputs(table.c_str(), stdout);
      std::fprintf(stderr, "benchmark finished in %.1f s\n", elapsed_ms(t0) / 1000.0);
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
  return kOk;
}
