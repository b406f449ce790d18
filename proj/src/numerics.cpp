#include "chemdim/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>

namespace chemdim {

ReducedScores ReducedScores::leading(Index d) const {
  if (d < 1 || d > dims()) throw ValidationError("leading: d out of range");
  return {scores.leftCols(d), singular_values.head(d), loadings.leftCols(d)};
}

ReducedScores svd_reduce(const Matrix& z, Index d) {
  const Index n = z.rows(), p = z.cols();
  if (d < 1 || d > std::min(n, p))
    throw ValidationError("svd_reduce: d=" + std::to_string(d) + " outside [1, min(n,p)=" +
                          std::to_string(std::min(n, p)) + "]");
  const bool tall = n >= p;
  Matrix gram = Matrix::Zero(tall ? p : n, tall ? p : n);
  if (tall)
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  else
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("svd_reduce: eigendecomposition did not converge");

  // Eigenvalues come back ascending; take the top d in descending order.
  const Index m = gram.rows();
  ReducedScores out;
  out.singular_values.resize(d);
  Matrix basis(m, d);
  for (Index j = 0; j < d; ++j) {
    out.singular_values(j) = std::sqrt(std::max(eig.eigenvalues()(m - 1 - j), 0.0));
    basis.col(j) = eig.eigenvectors().col(m - 1 - j);
  }
  if (tall) {
    out.loadings = std::move(basis);
    out.scores = z * out.loadings;
  } else {
    // basis holds left singular vectors; loadings follow from Z^T U / sigma.
    out.scores = basis * out.singular_values.asDiagonal();
    out.loadings = z.transpose() * basis;
    for (Index j = 0; j < d; ++j) {
      const double s = out.singular_values(j);
      if (s > 0.0)
        out.loadings.col(j) /= s;
      else
        out.loadings.col(j).setZero();
    }
  }
  return out;
}

namespace {

using Mask = std::vector<char>;

double gram_tolerance(const Matrix& ete) {
  const double norm1 = ete.size() == 0 ? 0.0 : ete.cwiseAbs().colwise().sum().maxCoeff();
  return 10.0 * std::numeric_limits<double>::epsilon() * norm1 * static_cast<double>(std::max<Index>(ete.rows(), 1));
}

void check_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw ValidationError(std::string("nnls: non-finite ") + what);
}

// A component whose H row is all zero gets a zero W column from the
// pseudo-inverse and can never come back. Restart it on the worst-fit column
// of the residual with its optimal nonnegative weights; with the other
// components fixed this cannot raise the objective.
void revive_dead_components(const Matrix& x, Matrix& w, Matrix& h) {
  Matrix residual;
  for (Index i = 0; i < h.rows(); ++i) {
    if ((h.row(i).array() > 0.0).any()) continue;
    if (residual.size() == 0) residual = x - w * h;
    Index worst = 0;
    const double norm = residual.colwise().squaredNorm().maxCoeff(&worst);
    if (!(norm > std::numeric_limits<double>::epsilon() * x.squaredNorm())) return;
    const Vector dir = residual.col(worst);
    const Vector coeff = ((dir.transpose() * residual).transpose() / norm).cwiseMax(0.0);
    w.col(i) = dir;
    h.row(i) = coeff.transpose();
    residual.noalias() -= dir * coeff.transpose();
  }
}

Matrix solve_subsystem(const Matrix& a, const Matrix& b) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    const Vector diag = llt.matrixLLT().diagonal();
    if (diag.minCoeff() > 1e-7 * diag.maxCoeff()) return llt.solve(b);
  }
  return a.completeOrthogonalDecomposition().solve(b);
}

// Least squares restricted to each column's passive set, one factorization
// per distinct set. Entries outside the passive set are zero.
void solve_passive_sets(const Matrix& ete, const Matrix& ety, const std::vector<Mask>& passive,
                        const std::vector<Index>& cols, Matrix& out) {
  std::map<Mask, std::vector<Index>> groups;
  for (Index c : cols) groups[passive[static_cast<size_t>(c)]].push_back(c);
  for (const auto& [mask, members] : groups) {
    std::vector<Index> idx;
    for (Index i = 0; i < static_cast<Index>(mask.size()); ++i)
      if (mask[static_cast<size_t>(i)]) idx.push_back(i);
    for (Index c : members) out.col(c).setZero();
    if (idx.empty()) continue;
    const auto np = static_cast<Index>(idx.size());
    Matrix a(np, np), b(np, static_cast<Index>(members.size()));
    for (Index r = 0; r < np; ++r) {
      for (Index s = 0; s < np; ++s) a(r, s) = ete(idx[r], idx[s]);
      for (Index j = 0; j < b.cols(); ++j) b(r, j) = ety(idx[r], members[static_cast<size_t>(j)]);
    }
    const Matrix sol = solve_subsystem(a, b);
    for (Index j = 0; j < b.cols(); ++j)
      for (Index r = 0; r < np; ++r) out(idx[r], members[static_cast<size_t>(j)]) = sol(r, j);
  }
}

}  // namespace

Vector nnls_gram(const Matrix& ete, const Vector& ety) {
  const Index k = ete.rows();
  if (k < 1 || ete.cols() != k || ety.size() != k) throw ValidationError("nnls: dimension mismatch");
  check_finite(ete, "gram matrix");
  check_finite(ety, "right-hand side");
  const double tol = gram_tolerance(ete);

  Vector x = Vector::Zero(k);
  Mask passive(static_cast<size_t>(k), 0), banned(static_cast<size_t>(k), 0);
  Vector w = ety;
  const int max_outer = 3 * static_cast<int>(k) + 30;
  for (int outer = 0; outer < max_outer; ++outer) {
    Index entering = -1;
    double best = tol;
    for (Index i = 0; i < k; ++i)
      if (!passive[static_cast<size_t>(i)] && !banned[static_cast<size_t>(i)] && w(i) > best) {
        best = w(i);
        entering = i;
      }
    if (entering < 0) break;
    passive[static_cast<size_t>(entering)] = 1;

    Matrix s(k, 1);
    const std::vector<Index> col{0};
    for (int inner = 0; inner < 3 * static_cast<int>(k) + 30; ++inner) {
      std::vector<Mask> masks{passive};
      solve_passive_sets(ete, ety, masks, col, s);
      double alpha = std::numeric_limits<double>::infinity();
      Index leaving = -1;
      for (Index i = 0; i < k; ++i) {
        if (!passive[static_cast<size_t>(i)] || s(i, 0) > 0.0) continue;
        const double a = x(i) / (x(i) - s(i, 0));
        if (a < alpha) {
          alpha = a;
          leaving = i;
        }
      }
      if (leaving < 0) break;
      x += alpha * (s.col(0) - x);
      passive[static_cast<size_t>(leaving)] = 0;
      x(leaving) = 0.0;
      for (Index i = 0; i < k; ++i)
        if (passive[static_cast<size_t>(i)] && x(i) <= 0.0) {
          passive[static_cast<size_t>(i)] = 0;
          x(i) = 0.0;
        }
      // A variable that cannot enter with a positive value is numerically
      // degenerate; exclude it instead of cycling.
      if (leaving == entering && alpha == 0.0) banned[static_cast<size_t>(entering)] = 1;
    }
    std::vector<Mask> masks{passive};
    solve_passive_sets(ete, ety, masks, col, s);
    x = s.col(0).cwiseMax(0.0);
    w = ety - ete * x;
  }
  return x;
}

Vector nnls(const Matrix& e, const Vector& y) {
  if (e.rows() != y.size()) throw ValidationError("nnls: E rows must match y length");
  check_finite(e, "matrix");
  check_finite(y, "vector");
  Vector x = nnls_gram(e.transpose() * e, e.transpose() * y);
  // The normal equations square the conditioning; redo the final passive-set
  // solve on E itself and keep it when it stays feasible.
  std::vector<Index> idx;
  for (Index i = 0; i < x.size(); ++i)
    if (x(i) > 0.0) idx.push_back(i);
  if (idx.empty()) return x;
  Matrix ep(e.rows(), static_cast<Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) ep.col(static_cast<Index>(j)) = e.col(idx[j]);
  const Eigen::ColPivHouseholderQR<Matrix> qr(ep);
  if (qr.rank() < ep.cols()) return x;
  const Vector z = qr.solve(y);
  if ((z.array() <= 0.0).any()) return x;
  for (size_t j = 0; j < idx.size(); ++j) x(idx[j]) = z(static_cast<Index>(j));
  return x;
}

Matrix nnls_batch_gram(const Matrix& ete, const Matrix& ety, const Matrix* warm_start) {
  const Index k = ete.rows(), n = ety.cols();
  if (k < 1 || ete.cols() != k || ety.rows() != k) throw ValidationError("nnls_batch: dimension mismatch");
  check_finite(ete, "gram matrix");
  check_finite(ety, "right-hand side");
  const double tol = gram_tolerance(ete);

  std::vector<Mask> passive(static_cast<size_t>(n), Mask(static_cast<size_t>(k), 0));
  Matrix d = Matrix::Zero(k, n);
  std::vector<Index> fset(static_cast<size_t>(n));
  for (Index c = 0; c < n; ++c) fset[static_cast<size_t>(c)] = c;

  if (warm_start && warm_start->rows() == k && warm_start->cols() == n) {
    for (Index c = 0; c < n; ++c)
      for (Index i = 0; i < k; ++i)
        if ((*warm_start)(i, c) > 0.0) {
          passive[static_cast<size_t>(c)][static_cast<size_t>(i)] = 1;
          d(i, c) = (*warm_start)(i, c);
        }
  } else {
    // Start from the support of the unconstrained solution.
    Matrix unconstrained(k, n);
    std::vector<Mask> all(static_cast<size_t>(n), Mask(static_cast<size_t>(k), 1));
    solve_passive_sets(ete, ety, all, fset, unconstrained);
    for (Index c = 0; c < n; ++c)
      for (Index i = 0; i < k; ++i)
        if (unconstrained(i, c) > tol) {
          passive[static_cast<size_t>(c)][static_cast<size_t>(i)] = 1;
          d(i, c) = unconstrained(i, c);
        }
  }

  Matrix trial = Matrix::Zero(k, n);
  const int max_outer = 3 * static_cast<int>(k) + 30;
  for (int outer = 0; !fset.empty(); ++outer) {
    if (outer >= max_outer) {
      for (Index c : fset) d.col(c) = nnls_gram(ete, ety.col(c));
      break;
    }
    solve_passive_sets(ete, ety, passive, fset, trial);

    // Step back toward the feasible point until every passive entry is positive.
    auto infeasible = [&](Index c) {
      for (Index i = 0; i < k; ++i)
        if (passive[static_cast<size_t>(c)][static_cast<size_t>(i)] && trial(i, c) <= 0.0) return true;
      return false;
    };
    std::vector<Index> hset;
    for (Index c : fset)
      if (infeasible(c)) hset.push_back(c);
    for (int inner = 0; !hset.empty() && inner < 3 * static_cast<int>(k) + 30; ++inner) {
      for (Index c : hset) {
        auto& mask = passive[static_cast<size_t>(c)];
        double alpha = std::numeric_limits<double>::infinity();
        Index leaving = -1;
        for (Index i = 0; i < k; ++i) {
          if (!mask[static_cast<size_t>(i)] || trial(i, c) > 0.0) continue;
          const double a = d(i, c) / (d(i, c) - trial(i, c));
          if (a < alpha) {
            alpha = a;
            leaving = i;
          }
        }
        d.col(c) += alpha * (trial.col(c) - d.col(c));
        mask[static_cast<size_t>(leaving)] = 0;
        d(leaving, c) = 0.0;
        for (Index i = 0; i < k; ++i)
          if (mask[static_cast<size_t>(i)] && d(i, c) <= 0.0) {
            mask[static_cast<size_t>(i)] = 0;
            d(i, c) = 0.0;
          }
      }
      solve_passive_sets(ete, ety, passive, hset, trial);
      std::vector<Index> next;
      for (Index c : hset)
        if (infeasible(c)) next.push_back(c);
      hset.swap(next);
    }
    for (Index c : hset) {
      // Feasibility loop did not settle; finish this column alone.
      trial.col(c) = nnls_gram(ete, ety.col(c));
      auto& mask = passive[static_cast<size_t>(c)];
      for (Index i = 0; i < k; ++i) mask[static_cast<size_t>(i)] = trial(i, c) > 0.0;
    }

    std::vector<Index> next_fset;
    for (Index c : fset) {
      d.col(c) = trial.col(c).cwiseMax(0.0);
      const Vector w = ety.col(c) - ete * d.col(c);
      auto& mask = passive[static_cast<size_t>(c)];
      Index entering = -1;
      double best = tol;
      for (Index i = 0; i < k; ++i)
        if (!mask[static_cast<size_t>(i)] && w(i) > best) {
          best = w(i);
          entering = i;
        }
      if (entering >= 0) {
        mask[static_cast<size_t>(entering)] = 1;
        next_fset.push_back(c);
      }
    }
    fset.swap(next_fset);
  }
  return d;
}

Matrix nnls_batch(const Matrix& e, const Matrix& y) {
  if (e.rows() != y.rows()) throw ValidationError("nnls_batch: E rows must match Y rows");
  check_finite(e, "matrix");
  check_finite(y, "matrix");
  return nnls_batch_gram(e.transpose() * e, e.transpose() * y);
}

SemiNmfProblem::SemiNmfProblem(const Matrix& x) : rows_(x.rows()) {
  if (!x.allFinite()) throw ValidationError("semi_nmf: non-finite input");
  if (x.rows() > x.cols()) {
    Eigen::HouseholderQR<Matrix> qr(x);
    basis_ = qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
    target_ = qr.matrixQR().topRows(x.cols()).triangularView<Eigen::Upper>();
  } else {
    target_ = x;
  }
}

SemiNmfModel SemiNmfProblem::fit(Index u, std::uint64_t seed, const SemiNmfParams& params) const {
  const Matrix& x = target_;
  const Index m = x.cols();
  if (u < 1) throw ValidationError("semi_nmf: u must be >= 1");
  if (u > m) throw ValidationError("semi_nmf: u=" + std::to_string(u) + " exceeds m=" + std::to_string(m));

  Rng rng(seed);
  Matrix h(u, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < u; ++i) h(i, j) = std::abs(rng.normal());

  auto update_w = [&](const Matrix& hh) -> Matrix {
    const Matrix hht = hh * hh.transpose();
    const Matrix xht = x * hh.transpose();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(hht);
    return xht * cod.pseudoInverse();
  };
  auto objective = [&](const Matrix& ww, const Matrix& hh) { return 0.5 * (x - ww * hh).squaredNorm(); };
  auto finish = [&](SemiNmfModel& model) {
    if (basis_.size() > 0) model.w = basis_ * model.w;
  };

  SemiNmfModel model;
  model.u = u;
  model.w = update_w(h);
  model.h = h;
  double previous = objective(model.w, model.h);
  model.objective = previous;
  if (!std::isfinite(previous)) {
    model.status = SemiNmfStatus::Breakdown;
    finish(model);
    return model;
  }
  model.history.push_back(previous);

  for (int it = 1; it <= params.max_iter; ++it) {
    const Matrix wtw = model.w.transpose() * model.w;
    const Matrix wtx = model.w.transpose() * x;
    Matrix h_next = nnls_batch_gram(wtw, wtx, &model.h);
    Matrix w_next = update_w(h_next);
    revive_dead_components(x, w_next, h_next);
    const double current = objective(w_next, h_next);
    if (!std::isfinite(current) || !h_next.allFinite() || !w_next.allFinite()) {
      model.status = SemiNmfStatus::Breakdown;
      finish(model);
      return model;
    }
    model.iterations = it;
    // Both half-steps are exact minimizations, so a larger objective can only
    // come from roundoff in the subproblem solves; keep the better state.
    if (current <= previous) {
      model.h = std::move(h_next);
      model.w = std::move(w_next);
      model.objective = current;
    }
    model.history.push_back(model.objective);
    const double change = (previous - model.objective) / std::max(previous, std::numeric_limits<double>::min());
    previous = model.objective;
    if (change < params.tol) {
      model.status = SemiNmfStatus::Converged;
      finish(model);
      return model;
    }
  }
  model.status = SemiNmfStatus::MaxIterations;
  finish(model);
  return model;
}

SemiNmfModel semi_nmf(const Matrix& x, Index u, std::uint64_t seed, const SemiNmfParams& params) {
  if (u > x.cols()) throw ValidationError("semi_nmf: u=" + std::to_string(u) + " exceeds m=" + std::to_string(x.cols()));
  return SemiNmfProblem(x).fit(u, seed, params);
}

}  // namespace chemdim
