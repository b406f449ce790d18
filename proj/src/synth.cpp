#include "chemdim/synth.hpp"

#include "chemdim/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace chemdim {

Vector gaussian_mixture(const SpectralAxis& axis, const std::vector<GaussianPeak>& peaks) {
  Vector out = Vector::Zero(axis.size());
  for (const auto& pk : peaks) {
    if (!(pk.width > 0.0)) throw ValidationError("gaussian_mixture: width must be positive");
    for (Index i = 0; i < axis.size(); ++i) {
      const double d = axis[i] - pk.center;
      out(i) += pk.height * std::exp(-(d * d) / (2.0 * pk.width * pk.width));
    }
  }
  return out;
}

Matrix generate_endmembers(Index k, const SpectralAxis& axis, std::uint64_t seed, bool normalize,
                           const PeakRanges& ranges) {
  if (k < 1) throw ValidationError("generate_endmembers: k must be positive");
  Rng rng(seed);
  const auto lo = static_cast<std::int64_t>(std::ceil(axis[0]));
  const auto hi = static_cast<std::int64_t>(std::floor(axis[axis.size() - 1]));
  Matrix out(k, axis.size());
  for (Index e = 0; e < k; ++e) {
    Vector spectrum;
    // Redraw in the (measure-zero in practice) case of an all-zero spectrum.
    do {
      const auto f = rng.uniform_int(1, ranges.max_peaks);
      std::vector<GaussianPeak> peaks;
      for (std::int64_t j = 0; j < f; ++j) {
        GaussianPeak pk;
        pk.height = rng.uniform();
        pk.center = static_cast<double>(rng.uniform_int(lo, hi));
        pk.width = ranges.min_width + (ranges.max_width - ranges.min_width) * rng.uniform();
        peaks.push_back(pk);
      }
      spectrum = gaussian_mixture(axis, peaks);
    } while (!(spectrum.norm() > 0.0));
    if (normalize) spectrum /= spectrum.norm();
    out.row(e) = spectrum.transpose();
  }
  return out;
}

std::pair<DataMatrix, GroundTruth> mix_dataset(const Matrix& endmembers, const SpectralAxis& axis, Index n,
                                               std::uint64_t seed) {
  const Index k = endmembers.rows();
  if (k < 1 || n < k) throw ValidationError("mix_dataset: need n >= k >= 1");
  if (endmembers.cols() != axis.size()) throw ValidationError("mix_dataset: axis length mismatch");
  Rng rng(seed);

  Matrix weights(n, k);
  for (Index r = 0; r < n - k; ++r) {
    // Normalized exponentials are uniform on the simplex.
    double total = 0.0;
    for (Index j = 0; j < k; ++j) {
      weights(r, j) = -std::log(rng.uniform_open0());
      total += weights(r, j);
    }
    weights.row(r) /= total;
  }
  weights.bottomRows(k) = Matrix::Identity(k, k);

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i)
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_int(0, i))]);

  GroundTruth truth;
  truth.endmembers = endmembers;
  truth.weights.resize(n, k);
  truth.pure_rows.assign(static_cast<size_t>(k), 0);
  for (Index dst = 0; dst < n; ++dst) {
    const Index src = order[static_cast<size_t>(dst)];
    truth.weights.row(dst) = weights.row(src);
    if (src >= n - k) truth.pure_rows[static_cast<size_t>(src - (n - k))] = dst;
  }
  Matrix values = truth.weights * endmembers;
  for (Index j = 0; j < k; ++j) values.row(truth.pure_rows[static_cast<size_t>(j)]) = endmembers.row(j);
  return {DataMatrix(std::move(values), axis), std::move(truth)};
}

double noise_sigma(const Matrix& clean, double snr) {
  if (!(snr > 0.0)) throw ValidationError("noise: snr must be positive");
  double weakest = std::numeric_limits<double>::infinity();
  for (Index r = 0; r < clean.rows(); ++r) weakest = std::min(weakest, e_rms(clean.row(r).transpose()));
  if (!(weakest > 0.0)) throw ValidationError("noise: weakest row has zero signal");
  return weakest / snr;
}

DataMatrix add_noise(const DataMatrix& z, double snr, std::uint64_t seed) {
  const double sigma = noise_sigma(z.values(), snr);
  Rng rng(seed);
  Matrix out = z.values();
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c) out(r, c) += sigma * rng.normal();
  return DataMatrix(std::move(out), z.axis());
}

SyntheticDataset generate(const SyntheticSpec& spec) {
  if (spec.k < 2 || spec.n < spec.k) throw ValidationError("synthetic spec needs 2 <= k <= n");
  if (!(spec.snr > 0.0)) throw ValidationError("synthetic spec needs snr > 0");
  const SpectralAxis axis = SpectralAxis::linspace(spec.axis_first, spec.axis_last, spec.p);
  const Matrix endmembers = generate_endmembers(spec.k, axis, mix_seed(spec.seed, 1), spec.normalize_endmembers);
  auto [clean, truth] = mix_dataset(endmembers, axis, spec.n, mix_seed(spec.seed, 2));
  SyntheticDataset ds{spec, clean, add_noise(clean, spec.snr, mix_seed(spec.seed, 3)), std::move(truth),
                      noise_sigma(clean.values(), spec.snr)};
  return ds;
}

}  // namespace chemdim
