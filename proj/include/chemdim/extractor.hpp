#pragma once

#include "chemdim/core.hpp"
#include "chemdim/simplex.hpp"

#include <vector>

namespace chemdim {

/// k_CD candidate rows selected as endmembers.
struct EndmemberSet {
  std::vector<Index> candidate_rows;  ///< rows of V, one per slot
  Matrix spectra;                     ///< k x p, bit-exact copies of those rows
  std::vector<Index> source_rows;     ///< rows of Z the candidates came from (when known)
  double l2 = 0.0;                    ///< P_L2: summed squared NNLS residual over V
  double entropy = 0.0;               ///< P_S: summed residual entropy over V
  std::vector<double> l2_trace;       ///< P_L2 after initialization and after each swap
  int swaps = 0;
  int passes = 0;

  Index size() const { return static_cast<Index>(candidate_rows.size()); }
};

struct SetScore {
  double l2 = 0.0;
  double entropy = 0.0;
};

/// The k distinct rows of V with the smallest l2 norms (exact duplicates
/// count once; norm ties resolve to the lower row index).
EndmemberSet init_endmembers(const CandidateMatrix& v, Index k);

/// NNLS of every row of V on the given rows of V, returning the summed
/// squared residual and summed residual entropy.
SetScore score_set(const std::vector<Index>& rows, const CandidateMatrix& v);

/// Swap search: each candidate is tried in every slot; among substitutions
/// that strictly lower P_L2 the one with the largest P_S is applied. Passes
/// repeat until one makes no swap.
EndmemberSet extract(const CandidateMatrix& v, Index k);

/// Continues the swap search from a given starting set.
EndmemberSet extract_from(const CandidateMatrix& v, EndmemberSet start);

/// Per-pixel NNLS weights on the endmember spectra (rows of `endmembers`).
AbundanceMap reconstruct(const DataMatrix& z, const Matrix& endmembers, std::vector<std::string> ids = {});

/// One image per endmember, refolded through the pixel map.
std::vector<ImageGrid> abundance_images(const AbundanceMap& abundances, const PixelIndexMap& map);

/// Wraps plain spectra as a candidate matrix (no provenance, g = 0).
CandidateMatrix candidates_from_rows(const DataMatrix& rows);

}  // namespace chemdim
