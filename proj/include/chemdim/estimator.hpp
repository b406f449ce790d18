#pragma once

#include "chemdim/metrics.hpp"
#include "chemdim/numerics.hpp"
#include "chemdim/simplex.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chemdim {

struct EstimatorParams {
  Index g = 20;
  int max_sweeps = 5;
  SemiNmfParams nmf;
  bool normalize_rows = false;  ///< scale each spectrum to unit l2 length first
};

/// One model inspected by the entropy-increase search.
struct SearchStep {
  Index u = 0;
  double entropy_increase = 0.0;  ///< S_u - S_{u-1}
  bool accepted = false;
};

struct Selection {
  Index z = 0;     ///< argmax of the error reduction
  Index k_cd = 0;  ///< selected dimensionality
  std::vector<SearchStep> trace;
  bool fallback = false;  ///< no model in [2, g-1] showed an entropy increase
};

struct ModelFits {
  std::vector<SemiNmfModel> models;  ///< u = 1..g
  MetricCurves curves;
};

struct StageTimings {
  double candidates_ms = 0.0;
  double models_ms = 0.0;
};

struct DimensionalityReport {
  Index g = 0;
  std::uint64_t seed = 0;
  bool normalized = false;
  MetricCurves curves;
  Selection selection;
  std::vector<int> nmf_iterations;
  std::vector<bool> nmf_converged;
  std::vector<std::string> warnings;
  StageTimings timings;

  Index k_cd() const { return selection.k_cd; }
};

/// Semi-NMF of V^T for every u in 1..g, seeded with mix_seed(seed, u), plus
/// the residual curves. Throws NumericalError if any model breaks down.
ModelFits fit_models(const CandidateMatrix& v, std::uint64_t seed, const SemiNmfParams& params = {});

/// Error-reduction peak, confirmed or moved by the nearest entropy increase.
Selection select_dimensionality(const MetricCurves& curves);

/// Input prepared once for repeated estimation: optional row normalization
/// and the reduced scores needed by candidate generation.
struct PreparedData {
  DataMatrix data;
  ReducedScores reduced;
  bool normalized = false;
};

PreparedData prepare(const DataMatrix& z, const EstimatorParams& params);

DimensionalityReport estimate(const PreparedData& prepared, std::uint64_t seed, const EstimatorParams& params);
DimensionalityReport estimate(const DataMatrix& z, std::uint64_t seed, const EstimatorParams& params = {});

}  // namespace chemdim
