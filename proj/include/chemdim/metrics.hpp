#pragma once

#include "chemdim/core.hpp"

#include <limits>
#include <vector>

namespace chemdim {

/// Reconstruction residuals V - (W H)^T of the model with u sources.
struct ResidualMatrix {
  Index u = 0;
  Matrix values;  ///< m x p
};

/// Per-model curves indexed by u = 1..g (position u-1).
struct MetricCurves {
  std::vector<double> sse;         ///< s_u
  std::vector<double> normalized;  ///< eps_u = s_u / max s
  std::vector<double> reduction;   ///< rho(u) for u = 2..g-1 (position u-2)
  std::vector<double> entropy;     ///< S_u
  std::vector<Index> sse_increases;  ///< u where s_u > s_{u-1}

  Index g() const { return static_cast<Index>(sse.size()); }
  double rho(Index u) const { return reduction[static_cast<size_t>(u - 2)]; }
  double total_entropy(Index u) const { return entropy[static_cast<size_t>(u - 1)]; }
};

double sse(const ResidualMatrix& residuals);

std::vector<double> normalize_sse(const std::vector<double>& s);

/// (eps_{u-1} - eps_u) / (eps_u - eps_{u+1}) for u = 2..g-1. A vanishing
/// denominator gives +inf when the numerator is positive and 0 otherwise.
std::vector<double> error_reduction(const std::vector<double>& eps);

/// Shannon entropy of the normalized absolute first derivative of r over the
/// axis. A residual with no variation has entropy 0.
double residual_entropy(const Eigen::Ref<const Vector>& r, const SpectralAxis& axis);

/// Sum of residual_entropy over the rows of R.
double total_entropy(const Matrix& residual_rows, const SpectralAxis& axis);

/// Root-mean-square intensity of a spectrum.
double e_rms(const Eigen::Ref<const Vector>& spectrum);

/// Assembles all curves from per-u sums of squares and entropies.
MetricCurves make_curves(std::vector<double> sse_values, std::vector<double> entropy_values);

}  // namespace chemdim
