#include "chemdim/extractor.hpp"
#include "chemdim/metrics.hpp"
#include "chemdim/parallel.hpp"
#include "chemdim/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace chemdim;

namespace {

CandidateMatrix wrap(const Matrix& rows) { return candidates_from_rows(DataMatrix(rows)); }

// Lowest-norm distinct rows by sorting (norm, index) pairs and skipping
// rows equal to any earlier pick.
std::vector<Index> sort_dedup(const Matrix& v, Index k) {
  std::vector<std::pair<double, Index>> order;
  for (Index r = 0; r < v.rows(); ++r) order.push_back({v.row(r).norm(), r});
  std::sort(order.begin(), order.end());
  std::vector<Index> out;
  for (const auto& [norm, r] : order) {
    bool dup = false;
    for (Index q : out) dup = dup || v.row(q) == v.row(r);
    if (!dup) out.push_back(r);
    if (static_cast<Index>(out.size()) == k) break;
  }
  return out;
}

bool pairwise_distinct(const Matrix& rows) {
  for (Index a = 0; a < rows.rows(); ++a)
    for (Index b = 0; b < a; ++b)
      if (rows.row(a) == rows.row(b)) return false;
  return true;
}

}  // namespace

TEST_CASE("init picks the lowest-norm distinct rows") {
  Matrix v(4, 3);
  v << 1, 0, 0, 2, 0, 0, 2, 0, 0, 3, 0, 0;
  const EndmemberSet s = init_endmembers(wrap(v), 2);
  CHECK(s.candidate_rows == std::vector<Index>{0, 1});
  Matrix w(4, 3);
  w << 2, 0, 0, 0, 2, 0, 2, 0, 0, 1, 1, 0;
  const EndmemberSet all = init_endmembers(wrap(w), 3);
  std::vector<Index> rows = all.candidate_rows;
  std::sort(rows.begin(), rows.end());
  CHECK(rows == std::vector<Index>{0, 1, 3});
  CHECK_THROWS_AS(init_endmembers(wrap(w), 4), ValidationError);
}

TEST_CASE("init on a synthetic candidate matrix agrees with sort and dedup") {
  const SyntheticDataset ds = generate({5, 2000, 201, 900, 1900, 1000, 3, true});
  const CandidateMatrix v = build_candidates(ds.noisy, 4, {20, 5});
  REQUIRE(v.rows() == 209);
  const EndmemberSet s = init_endmembers(v, 5);
  CHECK(s.candidate_rows == sort_dedup(v.spectra, 5));
  CHECK(pairwise_distinct(s.spectra));
}

TEST_CASE("score of a set that spans the data is zero") {
  Matrix e(2, 4);
  e << 1, 0, 2, 0, 0, 1, 0, 3;
  Matrix v(5, 4);
  v.topRows(2) = e;
  v.row(2) = 0.5 * e.row(0) + 2.0 * e.row(1);
  v.row(3) = 3.0 * e.row(0);
  v.row(4) = e.row(0) + e.row(1);
  const SetScore s = score_set({0, 1}, wrap(v));
  CHECK(s.l2 < 1e-24);
}

TEST_CASE("score matches the rowwise nnls oracle") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix v = oracle::random_matrix(rng, 5, 4, -1.0, 1.0);
    const std::vector<Index> rows = {static_cast<Index>(rng.uniform_int(0, 2)), 3};
    double want = 0.0;
    Matrix residual(5, 4);
    Matrix e(4, 2);
    e.col(0) = v.row(rows[0]).transpose();
    e.col(1) = v.row(rows[1]).transpose();
    for (Index c = 0; c < 5; ++c) {
      const auto ans = oracle::nnls_enumerate(e, v.row(c).transpose());
      want += ans.objective;
      residual.row(c) = (e * ans.x).transpose() - v.row(c);
    }
    // A member reproduces itself exactly; its rounding-level residual has no meaningful entropy.
    for (Index r : rows) residual.row(r).setZero();
    const SetScore s = score_set(rows, wrap(v));
    CHECK(s.l2 == doctest::Approx(want).epsilon(1e-9));
    CHECK(s.entropy == doctest::Approx(total_entropy(residual, SpectralAxis::indices(4))).epsilon(1e-9));
  }
}

TEST_CASE("extract on a matrix with exactly k distinct rows returns them") {
  Matrix base(3, 6);
  base << 1, 2, 0, 0, 1, 0, 0, 1, 3, 1, 0, 0, 0, 0, 0, 2, 1, 4;
  Matrix v(7, 6);
  v << base, base.row(1), base.row(0), base.row(2), base.row(1);
  const EndmemberSet s = extract(wrap(v), 3);
  CHECK(s.l2 < 1e-20);
  CHECK(pairwise_distinct(s.spectra));
  for (Index j = 0; j < 3; ++j) {
    bool found = false;
    for (Index b = 0; b < 3; ++b) found = found || s.spectra.row(j) == base.row(b);
    CHECK(found);
  }
}

TEST_CASE("extract invariants on random candidate matrices") {
  Rng rng(2);
  for (int t = 0; t < 25; ++t) {
    const Index m = rng.uniform_int(6, 30), p = rng.uniform_int(5, 25), k = rng.uniform_int(2, 4);
    Matrix v = oracle::random_matrix(rng, m, p, 0.0, 1.0);
    v.row(m - 1) = v.row(0);  // an exact duplicate
    const CandidateMatrix cv = wrap(v);
    const EndmemberSet s = extract(cv, k);
    REQUIRE(s.size() == k);
    CHECK(pairwise_distinct(s.spectra));
    for (Index j = 0; j < k; ++j) CHECK(s.spectra.row(j) == v.row(s.candidate_rows[static_cast<size_t>(j)]));
    for (size_t i = 1; i < s.l2_trace.size(); ++i) CHECK(s.l2_trace[i] < s.l2_trace[i - 1]);
    CHECK(s.l2_trace.size() == static_cast<size_t>(s.swaps) + 1);
    CHECK(s.l2 == s.l2_trace.back());
    // Converged: no single distinct substitution strictly lowers P_L2.
    for (Index c = 0; c < m; ++c)
      for (Index j = 0; j < k; ++j) {
        auto rows = s.candidate_rows;
        rows[static_cast<size_t>(j)] = c;
        Matrix chosen(k, p);
        for (Index q = 0; q < k; ++q) chosen.row(q) = v.row(rows[static_cast<size_t>(q)]);
        if (!pairwise_distinct(chosen)) continue;
        CHECK(score_set(rows, cv).l2 >= s.l2);
      }
    // Idempotent and deterministic.
    const EndmemberSet again = extract_from(cv, s);
    CHECK(again.candidate_rows == s.candidate_rows);
    CHECK(again.swaps == s.swaps);
    CHECK(extract(cv, k).candidate_rows == s.candidate_rows);
  }
}

TEST_CASE("extract recovers planted pure rows") {
  const SyntheticDataset ds = generate({4, 1500, 201, 900, 1900, 1000, 17, true});
  const CandidateMatrix v = build_candidates(ds.noisy, 3, {12, 5});
  const EndmemberSet s = extract(v, 4);
  auto got = s.source_rows, want = ds.truth.pure_rows;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  CHECK(got == want);
}

TEST_CASE("extract does not depend on the thread count") {
  const SyntheticDataset ds = generate({3, 600, 151, 900, 1900, 100, 5, true});
  const CandidateMatrix v = build_candidates(ds.noisy, 3, {10, 5});
  set_thread_count(1);
  const EndmemberSet a = extract(v, 3);
  set_thread_count(5);
  const EndmemberSet b = extract(v, 3);
  set_thread_count(0);
  CHECK(a.candidate_rows == b.candidate_rows);
  CHECK(a.l2_trace == b.l2_trace);
  CHECK(a.entropy == b.entropy);
}

TEST_CASE("reconstruct of the endmembers themselves gives indicator weights") {
  Rng rng(3);
  const Matrix e = oracle::random_matrix(rng, 3, 10, 0.0, 1.0);
  const AbundanceMap ab = reconstruct(DataMatrix(e), e);
  CHECK((ab.weights - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(ab.endmember_ids == std::vector<std::string>{"E1", "E2", "E3"});
  for (Index r = 0; r < 3; ++r) {
    const auto want = oracle::nnls_enumerate(e.transpose(), e.row(r).transpose());
    CHECK((ab.weights.row(r).transpose() - want.x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("reconstruct handles zero pixels and checks channels") {
  Rng rng(4);
  const Matrix e = oracle::random_matrix(rng, 2, 6, 0.0, 1.0);
  Matrix z(3, 6);
  z.row(0).setZero();
  z.row(1) = 0.3 * e.row(0) + 0.7 * e.row(1);
  z.row(2) = -e.row(0);
  const AbundanceMap ab = reconstruct(DataMatrix(z), e);
  CHECK(ab.weights.row(0).isZero());
  CHECK(ab.weights(1, 0) == doctest::Approx(0.3));
  CHECK(ab.weights(1, 1) == doctest::Approx(0.7));
  CHECK((ab.weights.array() >= 0.0).all());
  CHECK_THROWS_AS(reconstruct(DataMatrix(z), Matrix::Ones(2, 5)), ValidationError);
}

TEST_CASE("reconstruction images follow the pixel map") {
  Rng rng(5);
  const Matrix e = oracle::random_matrix(rng, 2, 4, 0.0, 1.0);
  std::vector<double> raw;
  Matrix truth(2, 3);
  truth << 0.0, 0.5, 1.0, 1.5, 2.0, 2.5;
  for (Index x = 0; x < 2; ++x)
    for (Index y = 0; y < 3; ++y) {
      const Vector s = truth(x, y) * e.row(0).transpose() + e.row(1).transpose();
      raw.insert(raw.end(), s.data(), s.data() + 4);
    }
  const auto [data, map] = unfold(HyperCube(2, 3, 4, raw));
  const auto images = abundance_images(reconstruct(data, e), map);
  REQUIRE(images.size() == 2);
  CHECK((images[0] - truth).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((images[1].array() - 1.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("reconstruct weights do not depend on the thread count") {
  Rng rng(6);
  const Matrix e = oracle::random_matrix(rng, 3, 20, 0.0, 1.0);
  const Matrix z = oracle::random_matrix(rng, 3000, 20, 0.0, 1.0);
  set_thread_count(1);
  const AbundanceMap a = reconstruct(DataMatrix(z), e);
  set_thread_count(3);
  const AbundanceMap b = reconstruct(DataMatrix(z), e);
  set_thread_count(0);
  CHECK(a.weights == b.weights);
}
