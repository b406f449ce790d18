#pragma once

#include "chemdim/estimator.hpp"
#include "chemdim/io.hpp"
#include "chemdim/synth.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chemdim {

/// Methods: "cd" plus any name from baseline_methods().
struct BenchConfig {
  std::vector<SyntheticSpec> grid;
  int repeats = 1;
  std::vector<std::string> methods = {"cd"};
  EstimatorParams params;
  double false_alarm = 1e-5;
};

/// One (spec, repeat) run. Estimates are indexed like BenchConfig::methods;
/// an empty estimate means the method was undefined or failed.
struct BenchCell {
  Index spec = 0;
  int repeat = 0;
  std::uint64_t algorithm_seed = 0;
  std::vector<std::optional<Index>> estimates;
  std::vector<std::string> errors;  ///< per method, empty when it ran
};

struct BenchResult {
  BenchConfig config;
  std::vector<BenchCell> cells;  ///< spec-major, then repeat

  /// Estimate counts for one method and spec; key -1 collects undefined
  /// results and -2 failures.
  std::map<Index, int> counts(Index method, Index spec) const;
};

/// Seed of the CD run for a repeat. Data stay fixed per spec; repeats only
/// re-seed the algorithm.
std::uint64_t repeat_seed(std::uint64_t spec_seed, int repeat);

/// Generates each dataset once, runs the baselines once (they are
/// deterministic) and the CD estimator once per repeat. Failures are
/// recorded in the cell and the run continues.
BenchResult run_benchmark(const BenchConfig& config);

/// Rows per spec (k, n, p, snr), one column per estimated value observed
/// plus "undefined" and "failed".
std::string confusion_csv(const BenchResult& result, Index method);

/// Per spec and method: the most frequent estimate with its share, e.g.
/// "3(63%)", or just "3" when every repeat agrees.
std::string comparison_csv(const BenchResult& result);

/// Grid file: {"k": [...], "n": ..., "p": ..., "snr": ..., "seed": ...}
/// where any of k, n, p, snr may be a list (cartesian product), or
/// {"specs": [{...}, ...]} with explicit entries. Spec seeds default to
/// mix_seed(seed, index).
std::vector<SyntheticSpec> grid_from_json(const io::json& doc);
io::json spec_to_json(const SyntheticSpec& spec);

}  // namespace chemdim
