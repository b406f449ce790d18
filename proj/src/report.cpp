#include "chemdim/report.hpp"

#include <cmath>
#include <sstream>

namespace chemdim::io {

namespace {

// JSON has no infinity; an unbounded error reduction is written as a string.
json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

json report_to_json(const DimensionalityReport& report) {
  const MetricCurves& c = report.curves;
  json curves = json::array();
  for (Index u = 1; u <= c.g(); ++u) {
    json row = {{"u", u},
                {"sse", c.sse[static_cast<size_t>(u - 1)]},
                {"normalized_sse", c.normalized[static_cast<size_t>(u - 1)]},
                {"total_entropy", c.total_entropy(u)}};
    if (u >= 2 && u <= c.g() - 1) row["error_reduction"] = number(c.rho(u));
    curves.push_back(row);
  }
  json trace = json::array();
  for (const auto& step : report.selection.trace)
    trace.push_back({{"u", step.u}, {"entropy_increase", step.entropy_increase}, {"accepted", step.accepted}});
  json nmf = json::array();
  for (size_t i = 0; i < report.nmf_iterations.size(); ++i)
    nmf.push_back({{"u", i + 1}, {"iterations", report.nmf_iterations[i]}, {"converged", static_cast<bool>(report.nmf_converged[i])}});
  return {{"version", kVersion},
          {"g", report.g},
          {"seed", report.seed},
          {"normalized", report.normalized},
          {"z", report.selection.z},
          {"k_cd", report.selection.k_cd},
          {"fallback", report.selection.fallback},
          {"search_trace", trace},
          {"curves", curves},
          {"semi_nmf", nmf},
          {"warnings", report.warnings}};
}

std::string curves_csv(const MetricCurves& curves) {
  std::ostringstream out;
  out << "u,sse,normalized_sse,error_reduction,total_entropy\n";
  for (Index u = 1; u <= curves.g(); ++u) {
    out << u << ',' << format_double(curves.sse[static_cast<size_t>(u - 1)]) << ','
        << format_double(curves.normalized[static_cast<size_t>(u - 1)]) << ',';
    if (u >= 2 && u <= curves.g() - 1) out << format_double(curves.rho(u));
    out << ',' << format_double(curves.total_entropy(u)) << '\n';
  }
  return out.str();
}

DimensionalityReport report_from_json(const json& doc) {
  try {
    DimensionalityReport r;
    r.g = doc.at("g").get<Index>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.normalized = doc.at("normalized").get<bool>();
    r.selection.z = doc.at("z").get<Index>();
    r.selection.k_cd = doc.at("k_cd").get<Index>();
    r.selection.fallback = doc.at("fallback").get<bool>();
    for (const auto& step : doc.at("search_trace"))
      r.selection.trace.push_back({step.at("u").get<Index>(), step.at("entropy_increase").get<double>(),
                                   step.at("accepted").get<bool>()});
    // Normalized SSE and error reduction are functions of the SSE curve.
    std::vector<double> sse, entropy;
    for (const auto& row : doc.at("curves")) {
      sse.push_back(row.at("sse").get<double>());
      entropy.push_back(row.at("total_entropy").get<double>());
    }
    r.curves = make_curves(std::move(sse), std::move(entropy));
    for (const auto& m : doc.at("semi_nmf")) {
      r.nmf_iterations.push_back(m.at("iterations").get<int>());
      r.nmf_converged.push_back(m.at("converged").get<bool>());
    }
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

json endmembers_to_json(const EndmemberSet& set, const CandidateMatrix& v) {
  json members = json::array();
  for (Index j = 0; j < set.size(); ++j) {
    const Index row = set.candidate_rows[static_cast<size_t>(j)];
    json m = {{"id", "E" + std::to_string(j + 1)}, {"candidate_row", row}};
    if (static_cast<size_t>(row) < v.origins.size()) {
      const auto& o = v.origins[static_cast<size_t>(row)];
      m["source_row"] = o.source_row;
      m["level"] = o.level;
      m["slot"] = o.slot;
    }
    members.push_back(m);
  }
  return {{"version", kVersion},
          {"k", set.size()},
          {"p_l2", set.l2},
          {"p_s", set.entropy},
          {"swaps", set.swaps},
          {"passes", set.passes},
          {"l2_trace", set.l2_trace},
          {"endmembers", members}};
}

json baseline_to_json(const BaselineResult& result) {
  json out = {{"method", result.method}, {"degenerate", result.degenerate}};
  out["dimensionality"] = result.dimensionality ? json(*result.dimensionality) : json(nullptr);
  json params = json::object();
  for (const auto& [name, value] : result.parameters) params[name] = value;
  out["parameters"] = params;
  return out;
}

std::string baselines_csv(const std::vector<BaselineResult>& results) {
  std::ostringstream out;
  out << "method,dimensionality,degenerate\n";
  for (const auto& r : results)
    out << r.method << ',' << (r.dimensionality ? std::to_string(*r.dimensionality) : "--") << ','
        << (r.degenerate ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace chemdim::io
