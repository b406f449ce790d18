#include "chemdim/numerics.hpp"
#include "chemdim/parallel.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace chemdim;

TEST_CASE("svd_reduce of a rank-1 matrix") {
  Vector a(4), b(3);
  a << 1, 2, 3, 4;
  b << 0.5, -1, 2;
  const Matrix z = a * b.transpose();
  const ReducedScores r = svd_reduce(z, 1);
  CHECK((r.reconstruct() - z).norm() < 1e-12 * z.norm());
  CHECK(r.singular_values(0) == doctest::Approx(a.norm() * b.norm()));
}

TEST_CASE("svd_reduce of the identity") {
  const ReducedScores r = svd_reduce(Matrix::Identity(3, 3), 3);
  for (Index i = 0; i < 3; ++i) CHECK(r.singular_values(i) == doctest::Approx(1.0));
  const Matrix g = r.scores.transpose() * r.scores;
  CHECK((g - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("svd_reduce truncation error equals the trailing eigenvalues") {
  Rng rng(1);
  const Matrix z = oracle::random_matrix(rng, 50, 20);
  const auto eig = oracle::jacobi_eigenvalues(z.transpose() * z);
  const ReducedScores r = svd_reduce(z, 5);
  double tail = 0.0;
  for (size_t i = 5; i < eig.size(); ++i) tail += eig[i];
  CHECK((z - r.reconstruct()).squaredNorm() == doctest::Approx(tail).epsilon(1e-10));
  for (Index i = 0; i < 5; ++i)
    CHECK(r.singular_values(i) * r.singular_values(i) == doctest::Approx(eig[static_cast<size_t>(i)]).epsilon(1e-10));
  // wide input goes through the other Gram matrix
  const Matrix w = z.transpose();
  CHECK((w - svd_reduce(w, 5).reconstruct()).squaredNorm() == doctest::Approx(tail).epsilon(1e-10));
}

TEST_CASE("svd_reduce with full rank reconstructs the input") {
  Rng rng(2);
  for (auto [n, p] : {std::pair<Index, Index>{30, 8}, {8, 30}, {12, 12}}) {
    const Matrix z = oracle::random_matrix(rng, n, p);
    const ReducedScores r = svd_reduce(z, std::min(n, p));
    CHECK((z - r.reconstruct()).norm() <= 1e-9 * z.norm());
    for (Index i = 1; i < r.dims(); ++i) CHECK(r.singular_values(i) <= r.singular_values(i - 1));
  }
  CHECK_THROWS_AS(svd_reduce(Matrix::Identity(3, 3), 0), ValidationError);
  CHECK_THROWS_AS(svd_reduce(Matrix::Identity(3, 3), 4), ValidationError);
}

TEST_CASE("leading components of a larger decomposition") {
  Rng rng(3);
  const Matrix z = oracle::random_matrix(rng, 40, 10);
  const ReducedScores big = svd_reduce(z, 6);
  const ReducedScores small = big.leading(3);
  CHECK(small.dims() == 3);
  CHECK((small.scores - big.scores.leftCols(3)).norm() == 0.0);
}

TEST_CASE("nnls clamps the identity problem") {
  Vector y(2);
  y << 3, -1;
  const Vector x = nnls(Matrix::Identity(2, 2), y);
  CHECK(x(0) == doctest::Approx(3.0));
  CHECK(x(1) == 0.0);
}

TEST_CASE("nnls recovers positive coefficients on orthogonal columns") {
  Matrix e = Matrix::Zero(4, 2);
  e(0, 0) = 2;
  e(1, 1) = 3;
  Vector y = 1.5 * e.col(0) + 0.25 * e.col(1);
  const Vector x = nnls(e, y);
  CHECK(x(0) == doctest::Approx(1.5));
  CHECK(x(1) == doctest::Approx(0.25));
}

TEST_CASE("nnls agrees with support enumeration") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const Index k = rng.uniform_int(1, 4), p = rng.uniform_int(k, 8);
    const Matrix e = oracle::random_matrix(rng, p, k);
    const Vector y = oracle::random_matrix(rng, p, 1).col(0);
    const auto want = oracle::nnls_enumerate(e, y);
    const Vector x = nnls(e, y);
    CHECK((x - want.x).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("nnls satisfies the KKT conditions") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const Index k = rng.uniform_int(1, 10), p = rng.uniform_int(k, 30);
    const Matrix e = oracle::random_matrix(rng, p, k);
    const Vector y = oracle::random_matrix(rng, p, 1).col(0);
    const Vector x = nnls(e, y);
    const Matrix ete = e.transpose() * e;
    const double tol = 1e-10 * ete.norm();
    const Vector grad = ete * x - e.transpose() * y;
    for (Index j = 0; j < k; ++j) {
      CHECK(x(j) >= 0.0);
      if (x(j) > 0.0) CHECK(std::abs(grad(j)) <= tol);
      else CHECK(grad(j) >= -tol);
    }
  }
}

TEST_CASE("nnls rejects non-finite input") {
  Matrix e = Matrix::Identity(2, 2);
  Vector y(2);
  y << 1, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(nnls(e, y), ValidationError);
}

TEST_CASE("nnls_batch matches columnwise nnls") {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const Index k = rng.uniform_int(1, 10), p = rng.uniform_int(k, 50), n = rng.uniform_int(1, 20);
    const Matrix e = oracle::random_matrix(rng, p, k);
    const Matrix y = oracle::random_matrix(rng, p, n);
    const Matrix x = nnls_batch(e, y);
    for (Index c = 0; c < n; ++c) CHECK((x.col(c) - nnls(e, y.col(c))).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("nnls_batch with identical columns and with Y = E") {
  Rng rng(7);
  const Matrix e = oracle::random_matrix(rng, 12, 4, 0.0, 1.0);
  Matrix y(12, 3);
  y.col(0) = y.col(1) = y.col(2) = oracle::random_matrix(rng, 12, 1).col(0);
  const Matrix x = nnls_batch(e, y);
  CHECK(x.col(0) == x.col(1));
  CHECK(x.col(1) == x.col(2));
  const Matrix xi = nnls_batch(e, e);
  CHECK((xi - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
  for (Index c = 0; c < 4; ++c) CHECK((xi.col(c) - nnls(e, e.col(c))).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("nnls_batch warm start does not change the answer") {
  Rng rng(8);
  const Matrix e = oracle::random_matrix(rng, 20, 6);
  const Matrix y = oracle::random_matrix(rng, 20, 15);
  const Matrix ete = e.transpose() * e, ety = e.transpose() * y;
  const Matrix cold = nnls_batch_gram(ete, ety);
  const Matrix warm_seed = oracle::random_matrix(rng, 6, 15, 0.0, 1.0);
  const Matrix warm = nnls_batch_gram(ete, ety, &warm_seed);
  CHECK((cold - warm).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("semi_nmf fits an exact rank-1 factorization") {
  Rng rng(9);
  const Vector w = oracle::random_matrix(rng, 30, 1).col(0);
  const Vector h = oracle::random_matrix(rng, 12, 1, 0.1, 1.0).col(0);
  const Matrix x = w * h.transpose();
  const SemiNmfModel m = semi_nmf(x, 1, 1);
  CHECK(m.objective <= 1e-6 * 0.5 * x.squaredNorm());
  CHECK((m.h.array() >= 0.0).all());
}

TEST_CASE("semi_nmf objective never increases") {
  Rng rng(10);
  for (int t = 0; t < 30; ++t) {
    const Index p = rng.uniform_int(5, 40), m = rng.uniform_int(4, 25), u = rng.uniform_int(1, std::min<Index>(m, 6));
    const Matrix x = oracle::random_matrix(rng, p, m);
    const SemiNmfModel model = semi_nmf(x, u, rng.next_u64());
    for (size_t i = 1; i < model.history.size(); ++i) CHECK(model.history[i] <= model.history[i - 1]);
    CHECK((model.h.array() >= 0.0).all());
    CHECK(std::isfinite(model.objective));
    CHECK(model.objective == doctest::Approx(0.5 * (x - model.w * model.h).squaredNorm()).epsilon(1e-9));
  }
}

TEST_CASE("semi_nmf recovers exact conical mixtures without losing components") {
  Rng rng(12);
  int solved = 0;
  for (int t = 0; t < 40; ++t) {
    const Index p = rng.uniform_int(20, 60), m = rng.uniform_int(30, 80), u = rng.uniform_int(2, 5);
    const Matrix x = oracle::random_matrix(rng, p, u) * oracle::random_matrix(rng, u, m, 0.0, 1.0);
    const SemiNmfModel model = semi_nmf(x, u, rng.next_u64(), {1e-12, 2000});
    for (Index i = 0; i < u; ++i) CHECK((model.h.row(i).array() > 0.0).any());
    if (model.objective <= 1e-8 * x.squaredNorm()) ++solved;
  }
  CHECK(solved >= 38);
}

TEST_CASE("semi_nmf with u = m fits at least as well as u = m - 1") {
  Rng rng(11);
  const Matrix x = oracle::random_matrix(rng, 15, 5);
  const SemiNmfModel a = semi_nmf(x, 4, 3), b = semi_nmf(x, 5, 3);
  CHECK(b.objective <= a.objective + 1e-12);
  CHECK_THROWS_AS(semi_nmf(x, 6, 3), ValidationError);
  CHECK_THROWS_AS(semi_nmf(x, 0, 3), ValidationError);
}

TEST_CASE("semi_nmf compression leaves the objective unchanged") {
  Rng rng(12);
  // Tall input takes the QR path; the same fit on the square R factor must
  // reach the same objective.
  const Matrix x = oracle::random_matrix(rng, 60, 8);
  const SemiNmfModel tall = semi_nmf(x, 3, 5);
  Eigen::HouseholderQR<Matrix> qr(x);
  const Matrix r = qr.matrixQR().topRows(8).triangularView<Eigen::Upper>();
  const SemiNmfModel square = semi_nmf(r, 3, 5);
  CHECK(tall.objective == doctest::Approx(square.objective).epsilon(1e-8));
  CHECK(tall.w.rows() == 60);
}

TEST_CASE("semi_nmf is deterministic and thread-count independent") {
  Rng rng(13);
  const Matrix x = oracle::random_matrix(rng, 40, 20);
  set_thread_count(1);
  const SemiNmfModel a = semi_nmf(x, 4, 77);
  set_thread_count(4);
  const SemiNmfModel b = semi_nmf(x, 4, 77);
  set_thread_count(0);
  CHECK(a.w == b.w);
  CHECK(a.h == b.h);
  CHECK(a.history == b.history);
}
