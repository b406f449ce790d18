#pragma once

#include "chemdim/core.hpp"

#include <cstdint>
#include <vector>

namespace chemdim {

struct SyntheticSpec {
  Index k = 2;
  Index n = 5000;
  Index p = 1001;
  double axis_first = 900.0;
  double axis_last = 1900.0;
  double snr = 1000.0;
  std::uint64_t seed = 0;
  bool normalize_endmembers = true;
};

struct GaussianPeak {
  double height = 0.0;
  double center = 0.0;
  double width = 1.0;
};

/// Sum of Gaussians a * exp(-(x - m)^2 / (2 s^2)) evaluated on the axis.
Vector gaussian_mixture(const SpectralAxis& axis, const std::vector<GaussianPeak>& peaks);

struct PeakRanges {
  int max_peaks = 6;
  double min_width = 1.0;
  double max_width = 50.0;
};

/// k pseudo-spectra (rows), each a sum of U{1..max_peaks} Gaussians with
/// height U[0,1], integer center U over the axis range and width
/// U[min_width, max_width].
Matrix generate_endmembers(Index k, const SpectralAxis& axis, std::uint64_t seed, bool normalize = true,
                           const PeakRanges& ranges = {});

struct GroundTruth {
  Matrix endmembers;            ///< k x p
  Matrix weights;               ///< n x k, rows on the unit simplex
  std::vector<Index> pure_rows; ///< row of each endmember in the shuffled matrix
};

/// n-k mixtures with weights uniform on the simplex plus the k pure rows,
/// shuffled together.
std::pair<DataMatrix, GroundTruth> mix_dataset(const Matrix& endmembers, const SpectralAxis& axis, Index n,
                                               std::uint64_t seed);

/// Noise level giving the weakest row (by e_rms) the requested amplitude SNR.
double noise_sigma(const Matrix& clean, double snr);

/// Adds i.i.d. N(0, sigma^2) with sigma = noise_sigma(z, snr).
DataMatrix add_noise(const DataMatrix& z, double snr, std::uint64_t seed);

struct SyntheticDataset {
  SyntheticSpec spec;
  DataMatrix clean;
  DataMatrix noisy;
  GroundTruth truth;
  double sigma = 0.0;
};

SyntheticDataset generate(const SyntheticSpec& spec);

}  // namespace chemdim
