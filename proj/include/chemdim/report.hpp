#pragma once

#include "chemdim/baselines.hpp"
#include "chemdim/estimator.hpp"
#include "chemdim/extractor.hpp"
#include "chemdim/io.hpp"

#include <string>

namespace chemdim::io {

inline constexpr const char* kVersion = "0.1.0";

// Reports hold only values determined by the inputs, so repeated runs give
// byte-identical files. Wall-clock timings are logged, not stored.
json report_to_json(const DimensionalityReport& report);
/// Columns: u, sse, normalized_sse, error_reduction, total_entropy.
std::string curves_csv(const MetricCurves& curves);

/// Rebuilds the selection-relevant fields (g, seed, normalized, k_CD).
DimensionalityReport report_from_json(const json& doc);

json endmembers_to_json(const EndmemberSet& set, const CandidateMatrix& v);

json baseline_to_json(const BaselineResult& result);
/// Columns: method, dimensionality ("--" when undefined), degenerate.
std::string baselines_csv(const std::vector<BaselineResult>& results);

}  // namespace chemdim::io
