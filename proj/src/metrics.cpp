#include "chemdim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace chemdim {

double sse(const ResidualMatrix& residuals) { return residuals.values.squaredNorm(); }

std::vector<double> normalize_sse(const std::vector<double>& s) {
  if (s.empty()) throw ValidationError("normalize_sse: empty input");
  double peak = 0.0;
  for (double v : s) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("normalize_sse: values must be finite and nonnegative");
    peak = std::max(peak, v);
  }
  if (peak == 0.0) throw ValidationError("normalize_sse: every model fits perfectly; nothing to normalize");
  std::vector<double> eps(s.size());
  std::transform(s.begin(), s.end(), eps.begin(), [peak](double v) { return v / peak; });
  return eps;
}

std::vector<double> error_reduction(const std::vector<double>& eps) {
  if (eps.size() < 3) throw ValidationError("error_reduction: need g >= 3");
  std::vector<double> rho;
  rho.reserve(eps.size() - 2);
  for (size_t u = 1; u + 1 < eps.size(); ++u) {
    const double num = eps[u - 1] - eps[u];
    const double den = eps[u] - eps[u + 1];
    if (den == 0.0)
      rho.push_back(num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    else
      rho.push_back(num / den);
  }
  return rho;
}

double residual_entropy(const Eigen::Ref<const Vector>& r, const SpectralAxis& axis) {
  const Index p = r.size();
  if (p < 3) throw ValidationError("residual_entropy: need at least 3 channels");
  if (axis.size() != p) throw ValidationError("residual_entropy: axis length mismatch");
  Vector slope(p - 1);
  for (Index i = 1; i < p; ++i) slope(i - 1) = std::abs((r(i) - r(i - 1)) / (axis[i] - axis[i - 1]));
  const double total = slope.sum();
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (Index i = 0; i < slope.size(); ++i) {
    const double b = slope(i) / total;
    if (b > 0.0) h -= b * std::log(b);
  }
  return h;
}

double total_entropy(const Matrix& residual_rows, const SpectralAxis& axis) {
  double s = 0.0;
  for (Index c = 0; c < residual_rows.rows(); ++c) s += residual_entropy(residual_rows.row(c).transpose(), axis);
  return s;
}

double e_rms(const Eigen::Ref<const Vector>& spectrum) {
  if (spectrum.size() == 0) throw ValidationError("e_rms: empty spectrum");
  return std::sqrt(spectrum.squaredNorm() / static_cast<double>(spectrum.size()));
}

MetricCurves make_curves(std::vector<double> sse_values, std::vector<double> entropy_values) {
  if (sse_values.size() != entropy_values.size()) throw ValidationError("make_curves: length mismatch");
  MetricCurves c;
  c.normalized = normalize_sse(sse_values);
  c.reduction = error_reduction(c.normalized);
  for (size_t u = 1; u < sse_values.size(); ++u)
    if (sse_values[u] > sse_values[u - 1]) c.sse_increases.push_back(static_cast<Index>(u + 1));
  c.sse = std::move(sse_values);
  c.entropy = std::move(entropy_values);
  return c;
}

}  // namespace chemdim
