#include "chemdim/simplex.hpp"

#include "chemdim/parallel.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numeric>

namespace chemdim {

namespace {

double factorial(Index k) {
  double f = 1.0;
  for (Index j = 2; j <= k; ++j) f *= static_cast<double>(j);
  return f;
}

// Substitutions must beat the incumbent by more than roundoff to count as
// a strict increase; otherwise equal-volume swaps could repeat forever.
constexpr double kStrictMargin = 1e-12;

}  // namespace

double simplex_volume(const Matrix& augmented) {
  const Index i = augmented.rows();
  if (i < 2 || augmented.cols() != i) throw ValidationError("simplex_volume: need a square matrix with i >= 2");
  return std::abs(augmented.partialPivLu().determinant()) / factorial(i - 1);
}

Matrix augmented_simplex(const Matrix& scores, const std::vector<Index>& vertices) {
  const auto i = static_cast<Index>(vertices.size());
  if (scores.cols() != i - 1) throw ValidationError("augmented_simplex: scores must have i-1 columns");
  Matrix e(i, i);
  for (Index j = 0; j < i; ++j) {
    e(0, j) = 1.0;
    e.col(j).tail(i - 1) = scores.row(vertices[static_cast<size_t>(j)]).transpose();
  }
  return e;
}

SimplexResult nfindr_pass(const Matrix& scores, std::uint64_t seed, int max_sweeps) {
  const Index n = scores.rows();
  const Index i = scores.cols() + 1;
  if (i < 2) throw ValidationError("nfindr_pass: need at least one reduced dimension");
  if (n < i) throw ValidationError("nfindr_pass: " + std::to_string(n) + " rows cannot form " + std::to_string(i) + " vertices");

  // i distinct starting rows by partial Fisher-Yates.
  Rng rng(seed);
  std::vector<Index> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index j = 0; j < i; ++j) {
    const auto pick = static_cast<Index>(rng.uniform_int(j, n - 1));
    std::swap(pool[static_cast<size_t>(j)], pool[static_cast<size_t>(pick)]);
  }
  SimplexResult result;
  result.vertices.assign(pool.begin(), pool.begin() + i);

  const double scale = factorial(i - 1);
  Matrix e = augmented_simplex(scores, result.vertices);
  Eigen::PartialPivLU<Matrix> lu(e);
  double det = std::abs(lu.determinant());
  result.initial_volume = det / scale;

  // Degenerate simplices have no usable inverse; their substitutions are
  // scored by explicit determinants until the volume becomes nonzero.
  Matrix inverse;
  bool invertible = false;
  auto refactor = [&](const Matrix& m) {
    lu.compute(m);
    det = std::abs(lu.determinant());
    invertible = det > 0.0 && lu.rcond() > 1e-12;
    if (invertible) inverse = lu.inverse();
  };
  refactor(e);

  Vector column(i);
  Vector y(i);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Refactor once per sweep so rank-1 updates do not accumulate drift.
    if (sweep > 0) refactor(e);
    bool changed = false;
    for (Index r = 0; r < n; ++r) {
      column(0) = 1.0;
      column.tail(i - 1) = scores.row(r).transpose();
      bool have_y = false;
      for (Index j = 0; j < i; ++j) {
        if (result.vertices[static_cast<size_t>(j)] == r) continue;
        if (invertible) {
          // Replacing column j scales the determinant by (E^-1 a)_j.
          if (!have_y) {
            y.noalias() = inverse * column;
            have_y = true;
          }
          const double ratio = y(j);
          if (!(std::abs(ratio) > 1.0 + kStrictMargin)) continue;
          // Sherman-Morrison: E'^-1 = E^-1 - (y - e_j) (row j of E^-1) / y_j.
          const Eigen::RowVectorXd pivot_row = inverse.row(j) / ratio;
          y(j) -= 1.0;
          inverse.noalias() -= y * pivot_row;
          det *= std::abs(ratio);
          have_y = false;
        } else {
          Matrix trial = e;
          trial.col(j) = column;
          const double trial_det = std::abs(trial.partialPivLu().determinant());
          if (!(trial_det > det * (1.0 + kStrictMargin) && trial_det > 0.0)) continue;
          refactor(trial);
        }
        e.col(j) = column;
        result.vertices[static_cast<size_t>(j)] = r;
        changed = true;
      }
    }
    result.sweeps = sweep + 1;
    if (!changed) {
      result.local_maximum = true;
      break;
    }
  }
  det = std::abs(e.partialPivLu().determinant());
  result.volume = det / scale;
  return result;
}

CandidateMatrix build_candidates(const DataMatrix& z, const ReducedScores& reduced, std::uint64_t seed,
                                 const CandidateParams& params) {
  const Index g = params.g;
  if (g < 3) throw ValidationError("build_candidates: g must be >= 3");
  if (z.rows() < g) throw ValidationError("build_candidates: need at least g rows");
  if (reduced.dims() < g - 1) throw ValidationError("build_candidates: decomposition has too few components");

  std::vector<SimplexResult> passes(static_cast<size_t>(g - 1));
  parallel_for(passes.size(), [&](std::size_t t) {
    const Index i = static_cast<Index>(t) + 2;
    passes[t] = nfindr_pass(reduced.scores.leftCols(i - 1), seed ^ static_cast<std::uint64_t>(i), params.max_sweeps);
  });

  CandidateMatrix out;
  out.g = g;
  out.axis = z.axis();
  out.spectra.resize(CandidateMatrix::expected_rows(g), z.cols());
  Index row = 0;
  for (Index i = 2; i <= g; ++i) {
    const auto& pass = passes[static_cast<size_t>(i - 2)];
    for (Index slot = 0; slot < i; ++slot, ++row) {
      const Index source = pass.vertices[static_cast<size_t>(slot)];
      out.spectra.row(row) = z.values().row(source);
      out.origins.push_back({i, slot, source});
    }
  }
  return out;
}

CandidateMatrix build_candidates(const DataMatrix& z, std::uint64_t seed, const CandidateParams& params) {
  if (params.g < 3) throw ValidationError("build_candidates: g must be >= 3");
  if (z.rows() < params.g) throw ValidationError("build_candidates: need at least g rows");
  if (params.g - 1 > std::min(z.rows(), z.cols()))
    throw ValidationError("build_candidates: g-1 exceeds min(n, p)");
  return build_candidates(z, svd_reduce(z.values(), params.g - 1), seed, params);
}

}  // namespace chemdim
