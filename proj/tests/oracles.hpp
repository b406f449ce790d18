#pragma once
// Slow reference implementations used only to check the library.

#include "chemdim/core.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using chemdim::Index;
using chemdim::Matrix;
using chemdim::Vector;

struct NnlsAnswer {
  Vector x;
  double objective = 0.0;
};

// Tries every support set: least squares on the support, kept when feasible.
// The best feasible candidate is the NNLS optimum.
inline NnlsAnswer nnls_enumerate(const Matrix& e, const Vector& y) {
  const Index k = e.cols();
  NnlsAnswer best{Vector::Zero(k), y.squaredNorm()};
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < k; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    Matrix sub(e.rows(), static_cast<Index>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = e.col(cols[c]);
    const Vector xs = sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    if ((xs.array() < 0.0).any()) continue;
    Vector x = Vector::Zero(k);
    for (size_t c = 0; c < cols.size(); ++c) x(cols[c]) = xs(static_cast<Index>(c));
    const double obj = (e * x - y).squaredNorm();
    if (obj < best.objective) best = {x, obj};
  }
  return best;
}

// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> out(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<size_t>(i)] = a(i, i);
  std::sort(out.rbegin(), out.rend());
  return out;
}

// H(b) = -sum b_i ln b_i with b_i = |dr_i / dnu_i| / sum_h |dr_h / dnu_h|,
// i, h = 2..p (1-based), and 0 ln 0 = 0.
inline double entropy_transcribed(const std::vector<double>& r, const std::vector<double>& nu) {
  const size_t p = r.size();
  long double denom = 0.0L;
  for (size_t h = 2; h <= p; ++h)
    denom += std::fabs(static_cast<long double>(r[h - 1] - r[h - 2]) / static_cast<long double>(nu[h - 1] - nu[h - 2]));
  if (denom == 0.0L) return 0.0;
  long double h_sum = 0.0L;
  for (size_t i = 2; i <= p; ++i) {
    const long double b =
        std::fabs(static_cast<long double>(r[i - 1] - r[i - 2]) / static_cast<long double>(nu[i - 1] - nu[i - 2])) / denom;
    if (b != 0.0L) h_sum -= b * std::log(b);
  }
  return static_cast<double>(h_sum);
}

// Kolmogorov-Smirnov statistic of a sample against U(0, 1).
inline double ks_uniform(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - sample[i]);
    d = std::max(d, sample[i] - static_cast<double>(i) / n);
  }
  return d;
}

inline Matrix random_matrix(chemdim::Rng& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = lo + (hi - lo) * rng.uniform();
  return m;
}

}  // namespace oracle
