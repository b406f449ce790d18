#include "chemdim/estimator.hpp"

#include "chemdim/parallel.hpp"

#include <chrono>
#include <cmath>

namespace chemdim {

ModelFits fit_models(const CandidateMatrix& v, std::uint64_t seed, const SemiNmfParams& params) {
  const Index g = v.g;
  if (g < 3) throw ValidationError("fit_models: g must be >= 3");
  if (v.rows() < g) throw ValidationError("fit_models: candidate matrix has fewer rows than g");
  const SemiNmfProblem problem(v.spectra.transpose());

  ModelFits fits;
  fits.models.resize(static_cast<size_t>(g));
  std::vector<double> s(static_cast<size_t>(g)), entropy(static_cast<size_t>(g));
  parallel_for(static_cast<size_t>(g), [&](std::size_t t) {
    const Index u = static_cast<Index>(t) + 1;
    SemiNmfModel model = problem.fit(u, mix_seed(seed, static_cast<std::uint64_t>(u)), params);
    if (model.status == SemiNmfStatus::Breakdown)
      throw NumericalError("semi-NMF broke down at u=" + std::to_string(u));
    const Matrix residual = v.spectra - (model.w * model.h).transpose();
    s[t] = residual.squaredNorm();
    entropy[t] = total_entropy(residual, v.axis);
    fits.models[t] = std::move(model);
  });
  fits.curves = make_curves(std::move(s), std::move(entropy));
  return fits;
}

Selection select_dimensionality(const MetricCurves& curves) {
  const Index g = curves.g();
  if (g < 3 || static_cast<Index>(curves.reduction.size()) != g - 2 || static_cast<Index>(curves.entropy.size()) != g)
    throw ValidationError("select_dimensionality: curves incomplete");
  auto increase = [&](Index u) { return curves.total_entropy(u) - curves.total_entropy(u - 1); };

  Selection sel;
  sel.z = 2;
  for (Index u = 3; u <= g - 1; ++u)
    if (curves.rho(u) > curves.rho(sel.z)) sel.z = u;

  const double at_z = increase(sel.z);
  sel.trace.push_back({sel.z, at_z, at_z > 0.0});
  if (at_z > 0.0) {
    sel.k_cd = sel.z;
    return sel;
  }
  for (Index i = 1;; ++i) {
    const Index lo = sel.z - i, hi = sel.z + i;
    const bool lo_ok = lo >= 2, hi_ok = hi <= g - 1;
    if (!lo_ok && !hi_ok) break;
    const double lo_inc = lo_ok ? increase(lo) : 0.0;
    const double hi_inc = hi_ok ? increase(hi) : 0.0;
    const bool lo_up = lo_ok && lo_inc > 0.0, hi_up = hi_ok && hi_inc > 0.0;
    Index pick = 0;
    if (lo_up && hi_up)
      pick = hi_inc > lo_inc ? hi : lo;
    else if (lo_up)
      pick = lo;
    else if (hi_up)
      pick = hi;
    if (lo_ok) sel.trace.push_back({lo, lo_inc, pick == lo});
    if (hi_ok) sel.trace.push_back({hi, hi_inc, pick == hi});
    if (pick != 0) {
      sel.k_cd = pick;
      return sel;
    }
  }
  sel.k_cd = sel.z;
  sel.fallback = true;
  return sel;
}

PreparedData prepare(const DataMatrix& z, const EstimatorParams& params) {
  if (params.g < 3) throw ValidationError("estimate: g must be >= 3");
  if (z.rows() < params.g) throw ValidationError("estimate: need at least g samples");
  if (params.g - 1 > std::min(z.rows(), z.cols())) throw ValidationError("estimate: g-1 exceeds min(n, p)");
  if (z.cols() < 3) throw ValidationError("estimate: need at least 3 channels");
  PreparedData prepared{params.normalize_rows ? z.normalized_rows() : z, {}, params.normalize_rows};
  prepared.reduced = svd_reduce(prepared.data.values(), params.g - 1);
  return prepared;
}

DimensionalityReport estimate(const PreparedData& prepared, std::uint64_t seed, const EstimatorParams& params) {
  using clock = std::chrono::steady_clock;
  DimensionalityReport report;
  report.g = params.g;
  report.seed = seed;
  report.normalized = prepared.normalized;

  const auto t0 = clock::now();
  const CandidateMatrix v =
      build_candidates(prepared.data, prepared.reduced, seed, {params.g, params.max_sweeps});
  const auto t1 = clock::now();
  ModelFits fits = fit_models(v, seed, params.nmf);
  const auto t2 = clock::now();

  report.timings.candidates_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  report.timings.models_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  for (const auto& m : fits.models) {
    report.nmf_iterations.push_back(m.iterations);
    report.nmf_converged.push_back(m.converged());
  }
  report.curves = std::move(fits.curves);
  report.selection = select_dimensionality(report.curves);
  for (Index u : report.curves.sse_increases)
    report.warnings.push_back("sum of squared errors increased at u=" + std::to_string(u));
  if (report.selection.fallback)
    report.warnings.push_back("no entropy increase in [2, g-1]; k_CD falls back to the error-reduction peak");
  return report;
}

DimensionalityReport estimate(const DataMatrix& z, std::uint64_t seed, const EstimatorParams& params) {
  return estimate(prepare(z, params), seed, params);
}

}  // namespace chemdim
