#pragma once

#include "chemdim/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace chemdim {

/// Sample coordinates in the leading d singular directions of Z (no centering).
struct ReducedScores {
  Matrix scores;            ///< n x d, equal to U_d * Sigma_d
  Vector singular_values;   ///< d, descending
  Matrix loadings;          ///< p x d right singular vectors

  Index dims() const { return scores.cols(); }
  Matrix reconstruct() const { return scores * loadings.transpose(); }
  /// First d components (the leading block of a larger decomposition).
  ReducedScores leading(Index d) const;
};

/// Rank-d reduction of Z via the eigendecomposition of the smaller Gram
/// matrix (Z^T Z or Z Z^T). Requires 1 <= d <= min(n, p).
ReducedScores svd_reduce(const Matrix& z, Index d);

/// Solves min ||E x - y||^2 s.t. x >= 0 (Lawson-Hanson active set).
Vector nnls(const Matrix& e, const Vector& y);

/// Same problem stated through the Gram matrix E^T E and E^T y.
Vector nnls_gram(const Matrix& ete, const Vector& ety);

/// Column-wise NNLS for every column of Y, sharing the Gram matrix and one
/// factorization per distinct passive set (fast combinatorial NNLS).
/// Column j equals nnls(E, Y.col(j)) to solver tolerance.
Matrix nnls_batch(const Matrix& e, const Matrix& y);

/// Gram form of nnls_batch. `warm_start`, when given, supplies the previous
/// solution; its support seeds the passive sets.
Matrix nnls_batch_gram(const Matrix& ete, const Matrix& ety, const Matrix* warm_start = nullptr);

struct SemiNmfParams {
  double tol = 1e-6;     ///< relative objective change that stops iteration
  int max_iter = 200;
};

enum class SemiNmfStatus { Converged, MaxIterations, Breakdown };

/// X ~= W H with H >= 0 and W unconstrained.
struct SemiNmfModel {
  Index u = 0;
  Matrix w;                        ///< p x u
  Matrix h;                        ///< u x m, nonnegative
  double objective = 0.0;          ///< 0.5 * ||X - W H||_F^2
  std::vector<double> history;     ///< objective after each iteration
  int iterations = 0;
  SemiNmfStatus status = SemiNmfStatus::MaxIterations;

  bool converged() const { return status == SemiNmfStatus::Converged; }
};

/// Fixed data matrix X prepared for repeated semi-NMF fits. When X has more
/// rows than columns it is compressed to the R factor of a thin QR, which
/// leaves every objective value unchanged because the optimal W always lies
/// in the column space of X.
class SemiNmfProblem {
 public:
  explicit SemiNmfProblem(const Matrix& x);

  Index rows() const { return rows_; }
  Index cols() const { return target_.cols(); }

  SemiNmfModel fit(Index u, std::uint64_t seed, const SemiNmfParams& params = {}) const;

 private:
  Index rows_ = 0;
  Matrix basis_;   ///< p x m orthonormal (empty when uncompressed)
  Matrix target_;  ///< R (m x m) or X itself
};

/// Alternating least squares semi-NMF. H starts as |N(0,1)| draws from seed,
/// W = X H^T (H H^T)^+ and H = nnls_batch(W, X) alternate until the relative
/// objective change drops below tol. On a non-finite objective the last
/// finite state is returned with status Breakdown.
SemiNmfModel semi_nmf(const Matrix& x, Index u, std::uint64_t seed, const SemiNmfParams& params = {});

}  // namespace chemdim
