#include "chemdim/core.hpp"

#include <cmath>
#include <numbers>

namespace chemdim {

SpectralAxis::SpectralAxis(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw ValidationError("spectral axis needs at least 2 channels");
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw ValidationError("spectral axis has non-finite value");
    if (i > 0 && !(values_[i] > values_[i - 1]))
      throw ValidationError("spectral axis must be strictly increasing");
  }
}

SpectralAxis SpectralAxis::indices(Index p) {
  std::vector<double> v(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) v[static_cast<size_t>(i)] = static_cast<double>(i);
  return SpectralAxis(std::move(v));
}

SpectralAxis SpectralAxis::linspace(double first, double last, Index p) {
  if (p < 2) throw ValidationError("spectral axis needs at least 2 channels");
  std::vector<double> v(static_cast<size_t>(p));
  const double step = (last - first) / static_cast<double>(p - 1);
  for (Index i = 0; i < p; ++i) v[static_cast<size_t>(i)] = first + step * static_cast<double>(i);
  v.back() = last;
  return SpectralAxis(std::move(v));
}

DataMatrix::DataMatrix(Matrix values, SpectralAxis axis)
    : values_(std::move(values)), axis_(std::move(axis)) {
  if (values_.rows() < 1) throw ValidationError("data matrix has no rows");
  if (values_.cols() != axis_.size())
    throw ValidationError("data matrix column count " + std::to_string(values_.cols()) +
                          " does not match axis length " + std::to_string(axis_.size()));
  if (!values_.allFinite()) throw ValidationError("data matrix contains non-finite values");
}

DataMatrix::DataMatrix(Matrix values)
    : DataMatrix(values, SpectralAxis::indices(values.cols())) {}

DataMatrix DataMatrix::normalized_rows() const {
  Matrix out = values_;
  for (Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > 0.0) out.row(r) /= norm;
  }
  return DataMatrix(std::move(out), axis_);
}

HyperCube::HyperCube(Index nx, Index ny, Index nv, std::vector<double> values, SpectralAxis axis)
    : nx_(nx), ny_(ny), nv_(nv), values_(std::move(values)), axis_(std::move(axis)) {
  if (nx < 1 || ny < 1) throw ValidationError("cube spatial extents must be positive");
  if (nv != axis_.size()) throw ValidationError("cube channel count does not match axis");
  if (static_cast<Index>(values_.size()) != nx * ny * nv)
    throw ValidationError("cube payload size does not match nx*ny*nv");
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("cube contains non-finite values");
}

HyperCube::HyperCube(Index nx, Index ny, Index nv, std::vector<double> values)
    : HyperCube(nx, ny, nv, std::move(values), SpectralAxis::indices(nv)) {}

std::pair<DataMatrix, PixelIndexMap> unfold(const HyperCube& cube) {
  const Index n = cube.nx() * cube.ny();
  Matrix m(n, cube.nv());
  PixelIndexMap map{cube.nx(), cube.ny(), {}};
  map.origins.reserve(static_cast<size_t>(n));
  Index r = 0;
  for (Index x = 0; x < cube.nx(); ++x) {
    for (Index y = 0; y < cube.ny(); ++y, ++r) {
      for (Index c = 0; c < cube.nv(); ++c) m(r, c) = cube.at(x, y, c);
      map.origins.push_back({x, y});
    }
  }
  return {DataMatrix(std::move(m), cube.axis()), std::move(map)};
}

HyperCube fold(const DataMatrix& data, const PixelIndexMap& map) {
  if (static_cast<Index>(map.origins.size()) != data.rows())
    throw ValidationError("pixel map length does not match matrix rows");
  const Index nv = data.cols();
  std::vector<double> values(static_cast<size_t>(map.nx * map.ny * nv), 0.0);
  for (Index r = 0; r < data.rows(); ++r) {
    const auto& o = map.origins[static_cast<size_t>(r)];
    for (Index c = 0; c < nv; ++c)
      values[static_cast<size_t>(((o.x * map.ny) + o.y) * nv + c)] = data.values()(r, c);
  }
  return HyperCube(map.nx, map.ny, nv, std::move(values), data.axis());
}

ImageGrid refold(const PixelIndexMap& map, const Vector& values) {
  if (static_cast<Index>(map.origins.size()) != values.size())
    throw ValidationError("refold: " + std::to_string(values.size()) + " values for " +
                          std::to_string(map.origins.size()) + " pixels");
  ImageGrid grid = ImageGrid::Zero(map.nx, map.ny);
  for (size_t r = 0; r < map.origins.size(); ++r) {
    const auto& o = map.origins[r];
    if (o.x < 0 || o.x >= map.nx || o.y < 0 || o.y >= map.ny)
      throw ValidationError("refold: pixel origin outside grid");
    grid(o.x, o.y) = values(static_cast<Index>(r));
  }
  return grid;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

// xoshiro256** seeded through SplitMix64.
Rng::Rng(std::uint64_t seed) {
  for (int i = 0; i < 4; ++i) state_[i] = mix_seed(seed, static_cast<std::uint64_t>(i));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open0() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ValidationError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open0();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace chemdim
