#pragma once

#include "chemdim/core.hpp"
#include "chemdim/numerics.hpp"

#include <cstdint>
#include <vector>

namespace chemdim {

/// |det(E)| / (i-1)! for an augmented i x i vertex matrix whose first row is
/// all ones and whose columns hold the vertices in i-1 reduced coordinates.
double simplex_volume(const Matrix& augmented);

/// Builds the augmented matrix from vertex rows of a score matrix.
Matrix augmented_simplex(const Matrix& scores, const std::vector<Index>& vertices);

struct SimplexResult {
  std::vector<Index> vertices;  ///< row indices into the scores, one per slot
  double initial_volume = 0.0;
  double volume = 0.0;
  int sweeps = 0;
  bool local_maximum = false;   ///< last sweep made no substitution
};

/// N-FINDR style volume maximization with i = scores.cols() + 1 vertices.
/// Starts from i distinct random rows and substitutes every row into every
/// slot, keeping substitutions that strictly enlarge the simplex, until a
/// sweep changes nothing or max_sweeps is reached.
SimplexResult nfindr_pass(const Matrix& scores, std::uint64_t seed, int max_sweeps = 5);

/// Provenance of one candidate row.
struct CandidateOrigin {
  Index level = 0;       ///< vertex count i of the maximization that produced it
  Index slot = 0;        ///< vertex slot within that simplex
  Index source_row = 0;  ///< row of Z
};

/// Candidate endmembers harvested from maximizations with i = 2..g vertices.
struct CandidateMatrix {
  Matrix spectra;                       ///< m x p, exact copies of rows of Z
  std::vector<CandidateOrigin> origins; ///< one per row
  SpectralAxis axis;
  Index g = 0;

  Index rows() const { return spectra.rows(); }
  static Index expected_rows(Index g) { return g * (g + 1) / 2 - 1; }
};

struct CandidateParams {
  Index g = 20;
  int max_sweeps = 5;
};

/// For every i in 2..g run nfindr_pass on the leading i-1 reduced scores of Z
/// (seeded with seed ^ i) and append the winning rows in ascending i.
CandidateMatrix build_candidates(const DataMatrix& z, std::uint64_t seed, const CandidateParams& params = {});

/// Same, reusing a decomposition with at least g-1 components.
CandidateMatrix build_candidates(const DataMatrix& z, const ReducedScores& reduced, std::uint64_t seed,
                                 const CandidateParams& params = {});

}  // namespace chemdim
