#include "chemdim/extractor.hpp"

#include "chemdim/metrics.hpp"
#include "chemdim/numerics.hpp"
#include "chemdim/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace chemdim {

namespace {

// canon[r] is the lowest row index holding exactly the same spectrum as r.
std::vector<Index> canonical_rows(const Matrix& v) {
  const Index m = v.rows();
  std::vector<Index> canon(static_cast<size_t>(m));
  for (Index r = 0; r < m; ++r) {
    canon[static_cast<size_t>(r)] = r;
    for (Index q = 0; q < r; ++q) {
      if (canon[static_cast<size_t>(q)] == q && v.row(q) == v.row(r)) {
        canon[static_cast<size_t>(r)] = q;
        break;
      }
    }
  }
  return canon;
}

Matrix gather_rows(const Matrix& v, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), v.cols());
  for (size_t j = 0; j < rows.size(); ++j) out.row(static_cast<Index>(j)) = v.row(rows[j]);
  return out;
}

void fill_members(EndmemberSet& set, const CandidateMatrix& v) {
  set.spectra = gather_rows(v.spectra, set.candidate_rows);
  set.source_rows.clear();
  if (v.origins.size() == static_cast<size_t>(v.rows()))
    for (Index r : set.candidate_rows) set.source_rows.push_back(v.origins[static_cast<size_t>(r)].source_row);
}

// Screening estimate of P_L2 from the Gram matrix of V. Cancellation makes it
// slightly inexact, so it only filters out clearly non-improving sets.
double gram_l2(const Matrix& gram, const std::vector<Index>& rows) {
  const auto k = static_cast<Index>(rows.size());
  Matrix a(k, k), b(k, gram.cols());
  for (Index i = 0; i < k; ++i) {
    b.row(i) = gram.row(rows[static_cast<size_t>(i)]);
    for (Index j = 0; j < k; ++j) a(i, j) = gram(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]);
  }
  const Matrix x = nnls_batch_gram(a, b);
  double total = 0.0;
  for (Index c = 0; c < gram.cols(); ++c) {
    const double r = x.col(c).dot(a * x.col(c)) - 2.0 * x.col(c).dot(b.col(c)) + gram(c, c);
    total += std::max(r, 0.0);
  }
  return total;
}

}  // namespace

SetScore score_set(const std::vector<Index>& rows, const CandidateMatrix& v) {
  if (rows.empty()) throw ValidationError("score_set: empty endmember set");
  for (Index r : rows)
    if (r < 0 || r >= v.rows()) throw ValidationError("score_set: row index out of range");
  const Matrix e = gather_rows(v.spectra, rows);
  const Matrix x = nnls_batch(e.transpose(), v.spectra.transpose());
  Matrix residual = x.transpose() * e - v.spectra;
  // Copies of a member are reproduced exactly; drop their rounding residue so
  // it does not feed the entropy.
  for (Index r = 0; r < v.rows(); ++r)
    for (Index j = 0; j < e.rows(); ++j)
      if (v.spectra.row(r) == e.row(j)) {
        residual.row(r).setZero();
        break;
      }
  return {residual.squaredNorm(), total_entropy(residual, v.axis)};
}

EndmemberSet init_endmembers(const CandidateMatrix& v, Index k) {
  if (k < 1) throw ValidationError("init_endmembers: k must be positive");
  const Index m = v.rows();
  const std::vector<Index> canon = canonical_rows(v.spectra);
  const Vector norms = v.spectra.rowwise().norm();
  std::vector<Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) < norms(b); });

  EndmemberSet set;
  std::vector<bool> taken(static_cast<size_t>(m), false);
  for (Index r : order) {
    if (set.size() == k) break;
    const Index c = canon[static_cast<size_t>(r)];
    if (taken[static_cast<size_t>(c)]) continue;
    taken[static_cast<size_t>(c)] = true;
    set.candidate_rows.push_back(r);
  }
  if (set.size() < k)
    throw ValidationError("init_endmembers: only " + std::to_string(set.size()) + " distinct candidates for k=" +
                          std::to_string(k));
  fill_members(set, v);
  const SetScore s = score_set(set.candidate_rows, v);
  set.l2 = s.l2;
  set.entropy = s.entropy;
  set.l2_trace = {s.l2};
  return set;
}

EndmemberSet extract_from(const CandidateMatrix& v, EndmemberSet set) {
  const Index m = v.rows();
  const Index k = set.size();
  if (k < 1) throw ValidationError("extract: empty starting set");
  const std::vector<Index> canon = canonical_rows(v.spectra);
  for (Index r : set.candidate_rows)
    if (r < 0 || r >= m) throw ValidationError("extract: starting set row out of range");
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < a; ++b)
      if (canon[static_cast<size_t>(set.candidate_rows[static_cast<size_t>(a)])] ==
          canon[static_cast<size_t>(set.candidate_rows[static_cast<size_t>(b)])])
        throw ValidationError("extract: starting set has duplicate spectra");

  const Matrix gram = v.spectra * v.spectra.transpose();
  const double margin = 1e-9 * gram.trace();
  SetScore current = score_set(set.candidate_rows, v);
  set.l2 = current.l2;
  set.entropy = current.entropy;
  if (set.l2_trace.empty()) set.l2_trace.push_back(current.l2);

  struct Trial {
    bool improving = false;
    SetScore score;
  };
  std::vector<Trial> trials(static_cast<size_t>(k));
  for (;;) {
    ++set.passes;
    bool swapped = false;
    for (Index c = 0; c < m; ++c) {
      const Index cc = canon[static_cast<size_t>(c)];
      bool present = false;
      for (Index r : set.candidate_rows) present = present || canon[static_cast<size_t>(r)] == cc;
      // A spectrum already in the set would either duplicate another slot or
      // leave the set unchanged; neither can be a strict improvement.
      if (present) continue;

      parallel_for(static_cast<size_t>(k), [&](std::size_t j) {
        std::vector<Index> rows = set.candidate_rows;
        rows[j] = c;
        Trial t;
        if (gram_l2(gram, rows) < current.l2 + margin) {
          t.score = score_set(rows, v);
          t.improving = t.score.l2 < current.l2;
        }
        trials[j] = t;
      });
      Index best = -1;
      for (Index j = 0; j < k; ++j) {
        const Trial& t = trials[static_cast<size_t>(j)];
        if (t.improving && (best < 0 || t.score.entropy > trials[static_cast<size_t>(best)].score.entropy)) best = j;
      }
      if (best < 0) continue;
      set.candidate_rows[static_cast<size_t>(best)] = c;
      current = trials[static_cast<size_t>(best)].score;
      set.l2_trace.push_back(current.l2);
      ++set.swaps;
      swapped = true;
    }
    if (!swapped) break;
  }
  set.l2 = current.l2;
  set.entropy = current.entropy;
  fill_members(set, v);
  return set;
}

EndmemberSet extract(const CandidateMatrix& v, Index k) { return extract_from(v, init_endmembers(v, k)); }

AbundanceMap reconstruct(const DataMatrix& z, const Matrix& endmembers, std::vector<std::string> ids) {
  const Index k = endmembers.rows();
  if (k < 1) throw ValidationError("reconstruct: no endmembers");
  if (endmembers.cols() != z.cols())
    throw ValidationError("reconstruct: endmembers have " + std::to_string(endmembers.cols()) +
                          " channels, data has " + std::to_string(z.cols()));
  if (ids.empty())
    for (Index j = 0; j < k; ++j) ids.push_back("E" + std::to_string(j + 1));
  if (static_cast<Index>(ids.size()) != k) throw ValidationError("reconstruct: one id per endmember required");

  const Matrix ete = endmembers * endmembers.transpose();
  const Index n = z.rows();
  // Fixed block size keeps results independent of the thread count.
  constexpr Index block = 512;
  const Index blocks = (n + block - 1) / block;
  AbundanceMap out{Matrix(n, k), std::move(ids)};
  parallel_for(static_cast<size_t>(blocks), [&](std::size_t b) {
    const Index first = static_cast<Index>(b) * block;
    const Index count = std::min(block, n - first);
    const Matrix ety = endmembers * z.values().middleRows(first, count).transpose();
    out.weights.middleRows(first, count) = nnls_batch_gram(ete, ety).transpose();
  });
  return out;
}

std::vector<ImageGrid> abundance_images(const AbundanceMap& abundances, const PixelIndexMap& map) {
  std::vector<ImageGrid> images;
  for (Index j = 0; j < abundances.weights.cols(); ++j) images.push_back(refold(map, abundances.weights.col(j)));
  return images;
}

CandidateMatrix candidates_from_rows(const DataMatrix& rows) {
  CandidateMatrix v;
  v.spectra = rows.values();
  v.axis = rows.axis();
  for (Index r = 0; r < rows.rows(); ++r) v.origins.push_back({0, 0, r});
  return v;
}

}  // namespace chemdim
