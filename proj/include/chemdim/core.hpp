#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chemdim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error families. The CLI maps these onto exit codes 2, 3 and 4.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Channel positions (wavenumbers or plain channel indices), strictly increasing.
class SpectralAxis {
 public:
  SpectralAxis() = default;
  explicit SpectralAxis(std::vector<double> values);

  /// Channel indices 0, 1, ..., p-1.
  static SpectralAxis indices(Index p);
  /// p evenly spaced positions from first to last inclusive.
  static SpectralAxis linspace(double first, double last, Index p);

  Index size() const { return static_cast<Index>(values_.size()); }
  double operator[](Index i) const { return values_[static_cast<size_t>(i)]; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const SpectralAxis&) const = default;

 private:
  std::vector<double> values_;
};

/// n samples by p channels. Rows are spectra.
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(Matrix values, SpectralAxis axis);
  /// Uses channel indices as the axis.
  explicit DataMatrix(Matrix values);

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const SpectralAxis& axis() const { return axis_; }

  /// Copy with every row scaled to unit l2 length. Zero rows stay zero.
  DataMatrix normalized_rows() const;

 private:
  Matrix values_;
  SpectralAxis axis_;
};

/// nx * ny pixels, each holding a spectrum of nv channels.
class HyperCube {
 public:
  HyperCube() = default;
  /// values is laid out channel-fastest, then y, then x:
  /// values[((x * ny) + y) * nv + c].
  HyperCube(Index nx, Index ny, Index nv, std::vector<double> values,
            SpectralAxis axis);
  HyperCube(Index nx, Index ny, Index nv, std::vector<double> values);

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index nv() const { return nv_; }
  const SpectralAxis& axis() const { return axis_; }
  const std::vector<double>& raw() const { return values_; }

  double at(Index x, Index y, Index c) const {
    return values_[static_cast<size_t>(((x * ny_) + y) * nv_ + c)];
  }

  bool operator==(const HyperCube&) const = default;

 private:
  Index nx_ = 0, ny_ = 0, nv_ = 0;
  std::vector<double> values_;
  SpectralAxis axis_;
};

struct PixelOrigin {
  Index x = 0;
  Index y = 0;
  bool operator==(const PixelOrigin&) const = default;
};

/// Spatial origin of every unfolded row.
struct PixelIndexMap {
  Index nx = 0;
  Index ny = 0;
  std::vector<PixelOrigin> origins;
};

/// Nonnegative per-sample weights, one column per endmember.
struct AbundanceMap {
  Matrix weights;
  std::vector<std::string> endmember_ids;
};

/// Image grid indexed as grid(x, y).
using ImageGrid = Matrix;

std::pair<DataMatrix, PixelIndexMap> unfold(const HyperCube& cube);
HyperCube fold(const DataMatrix& data, const PixelIndexMap& map);
ImageGrid refold(const PixelIndexMap& map, const Vector& values);

/// Deterministic 64-bit generator with portable derived distributions.
/// std:: distributions are implementation-defined, which would break
/// cross-toolchain reproducibility of benchmark seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0();
  /// Uniform integer on [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();

 private:
  std::uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 mixing step; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace chemdim
