#include "chemdim/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace chemdim {

namespace {

Vector descending_eigenvalues(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return solver.eigenvalues().reverse();
}

Matrix scatter(const Matrix& z) {
  Matrix s = Matrix::Zero(z.cols(), z.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  return s.selfadjointView<Eigen::Lower>();
}

// Eigenvalues below this are rounding noise of a rank-deficient matrix.
double zero_level(const Vector& values) {
  return values.size() * std::numeric_limits<double>::epsilon() * std::max(values(0), 0.0);
}

bool rank_deficient(const Vector& values) {
  const double floor = zero_level(values);
  return (values.array() <= floor).any();
}

BaselineResult wax_kailath(const EigenSpectra& s, bool mdl_form) {
  BaselineResult out;
  out.method = mdl_form ? "mdl" : "aic";
  out.degenerate = s.n <= s.p;
  if (rank_deficient(s.correlation)) return out;

  const Index p = s.p;
  const auto n = static_cast<double>(s.n);
  double best = std::numeric_limits<double>::infinity();
  for (Index q = 0; q < p; ++q) {
    const auto tail = s.correlation.tail(p - q);
    const double arith = tail.mean();
    const double geo = std::exp(tail.array().log().mean());
    const double fit = n * static_cast<double>(p - q) * std::log(geo / arith);
    const auto dq = static_cast<double>(q), dp = static_cast<double>(p);
    const double value = mdl_form ? -fit + 0.5 * dq * (2.0 * dp - dq) * std::log(n)
                                  : -2.0 * fit + 2.0 * dq * (2.0 * dp - dq);
    if (value < best) {
      best = value;
      out.dimensionality = q;
    }
  }
  return out;
}

}  // namespace

EigenSpectra eigen_spectra(const Matrix& z) {
  if (z.rows() < 2 || z.cols() < 2) throw ValidationError("baselines need at least 2 samples and 2 channels");
  if (!z.allFinite()) throw ValidationError("baselines: non-finite input");
  EigenSpectra s;
  s.n = z.rows();
  s.p = z.cols();
  const auto n = static_cast<double>(s.n);
  const Matrix raw = scatter(z);
  const Vector mean = z.colwise().mean().transpose();
  s.correlation = descending_eigenvalues(raw / n);
  s.covariance = descending_eigenvalues(raw / n - mean * mean.transpose());
  return s;
}

double normal_quantile(double probability) {
  if (!(probability > 0.0 && probability < 1.0)) throw ValidationError("normal_quantile: probability must be in (0, 1)");
  // Bisection on the CDF written with erfc, accurate far into the tails.
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < probability ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BaselineResult hfc(const EigenSpectra& s, double false_alarm) {
  if (!(false_alarm > 0.0 && false_alarm < 1.0)) throw ValidationError("hfc: false-alarm probability must be in (0, 1)");
  BaselineResult out;
  out.method = "hfc";
  out.parameters = {{"false_alarm", false_alarm}};
  const double z = normal_quantile(1.0 - false_alarm);
  const auto n = static_cast<double>(s.n);
  Index count = 0;
  for (Index l = 0; l < s.p; ++l) {
    const double rhat = s.correlation(l), r = s.covariance(l);
    const double sigma = std::sqrt(2.0 * (rhat * rhat + r * r) / n);
    if (rhat - r > z * sigma) ++count;
  }
  out.dimensionality = count;
  return out;
}

BaselineResult aic(const EigenSpectra& s) { return wax_kailath(s, false); }

BaselineResult mdl(const EigenSpectra& s) { return wax_kailath(s, true); }

BaselineResult fif(const EigenSpectra& s) {
  BaselineResult out;
  out.method = "fif";
  out.degenerate = s.n <= s.p;
  if (rank_deficient(s.correlation)) return out;

  const Index c = std::min(s.n, s.p);
  const auto r = static_cast<double>(std::max(s.n, s.p));
  // Scatter eigenvalues are n times the correlation eigenvalues.
  const Vector lambda = s.correlation.head(c) * static_cast<double>(s.n);
  double best = std::numeric_limits<double>::infinity();
  for (Index q = 1; q < c; ++q) {
    const double rest = static_cast<double>(c - q);
    const double re = std::sqrt(lambda.tail(c - q).sum() / (r * rest));
    const double ind = re / (rest * rest);
    if (ind < best) {
      best = ind;
      out.dimensionality = q;
    }
  }
  return out;
}

BaselineResult variance_threshold(const EigenSpectra& s, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("variance_threshold: fraction must be in (0, 1)");
  BaselineResult out;
  out.method = "var" + std::to_string(static_cast<int>(std::lround(fraction * 100.0)));
  out.parameters = {{"fraction", fraction}};
  const Vector var = s.covariance.cwiseMax(0.0);
  const double total = var.sum();
  if (!(total > 0.0)) {
    out.dimensionality = 0;
    return out;
  }
  double cumulative = 0.0;
  for (Index q = 0; q < var.size(); ++q) {
    cumulative += var(q);
    if (cumulative >= fraction * total) {
      out.dimensionality = q + 1;
      return out;
    }
  }
  out.dimensionality = var.size();
  return out;
}

const std::vector<std::string>& baseline_methods() {
  static const std::vector<std::string> names = {"hfc", "aic", "mdl", "fif", "var95", "var99"};
  return names;
}

std::vector<BaselineResult> run_baselines(const Matrix& z, const std::vector<std::string>& methods,
                                          double false_alarm) {
  for (const auto& m : methods)
    if (std::find(baseline_methods().begin(), baseline_methods().end(), m) == baseline_methods().end())
      throw ValidationError("unknown baseline method '" + m + "'");
  const EigenSpectra s = eigen_spectra(z);
  std::vector<BaselineResult> out;
  for (const auto& m : methods) {
    if (m == "hfc") out.push_back(hfc(s, false_alarm));
    else if (m == "aic") out.push_back(aic(s));
    else if (m == "mdl") out.push_back(mdl(s));
    else if (m == "fif") out.push_back(fif(s));
    else if (m == "var95") out.push_back(variance_threshold(s, 0.95));
    else out.push_back(variance_threshold(s, 0.99));
  }
  return out;
}

KMeansResult kmeanspp(const Matrix& z, Index k, std::uint64_t seed, int max_iter) {
  const Index n = z.rows();
  if (k < 1 || k > n) throw ValidationError("kmeanspp: need 1 <= k <= n");
  if (max_iter < 1) throw ValidationError("kmeanspp: max_iter must be positive");
  Rng rng(seed);
  KMeansResult out;
  out.centroids.resize(k, z.cols());

  // k-means++ seeding: each new centre is drawn with probability
  // proportional to the squared distance to the nearest existing centre.
  Vector nearest(n);
  Index first = static_cast<Index>(rng.uniform_int(0, n - 1));
  out.centroids.row(0) = z.row(first);
  for (Index r = 0; r < n; ++r) nearest(r) = (z.row(r) - z.row(first)).squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index r = 0; r < n; ++r) {
        acc += nearest(r);
        if (acc > target && nearest(r) > 0.0) {
          pick = r;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.uniform_int(0, n - 1));
    }
    out.centroids.row(c) = z.row(pick);
    for (Index r = 0; r < n; ++r) nearest(r) = std::min(nearest(r), (z.row(r) - z.row(pick)).squaredNorm());
  }

  out.labels.assign(static_cast<size_t>(n), -1);
  Vector dist(n);
  auto assign = [&]() {
    bool changed = false;
    for (Index r = 0; r < n; ++r) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < k; ++c) {
        const double d = (z.row(r) - out.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || out.labels[static_cast<size_t>(r)] != best;
      out.labels[static_cast<size_t>(r)] = best;
      dist(r) = best_d;
    }
    return changed;
  };
  assign();
  out.inertia.push_back(dist.sum());

  for (int it = 0; it < max_iter; ++it) {
    Matrix sums = Matrix::Zero(k, z.cols());
    std::vector<Index> counts(static_cast<size_t>(k), 0);
    for (Index r = 0; r < n; ++r) {
      sums.row(out.labels[static_cast<size_t>(r)]) += z.row(r);
      ++counts[static_cast<size_t>(out.labels[static_cast<size_t>(r)])];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) {
        out.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<size_t>(c)]);
      } else {
        Index far = 0;
        dist.maxCoeff(&far);
        out.centroids.row(c) = z.row(far);
        dist(far) = 0.0;
      }
    }
    const bool changed = assign();
    out.iterations = it + 1;
    out.inertia.push_back(dist.sum());
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace chemdim
