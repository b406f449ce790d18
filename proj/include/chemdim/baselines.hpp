#pragma once

#include "chemdim/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chemdim {

/// One virtual-dimensionality estimate.
struct BaselineResult {
  std::string method;
  std::optional<Index> dimensionality;  ///< empty when the method cannot run ("--")
  bool degenerate = false;              ///< n <= p for AIC/MDL/FIF
  std::vector<std::pair<std::string, double>> parameters;
};

/// Eigenvalues shared by the estimators, all in descending order.
struct EigenSpectra {
  Index n = 0;
  Index p = 0;
  Vector correlation;  ///< of Z^T Z / n (no centering)
  Vector covariance;   ///< of the mean-centered Z^T Z / n
};

EigenSpectra eigen_spectra(const Matrix& z);

/// Inverse of the standard normal CDF.
double normal_quantile(double probability);

/// Harsanyi-Farrand-Chang: counts channels l whose correlation eigenvalue
/// exceeds the covariance eigenvalue by more than
///   Phi^-1(1 - P_F) * sqrt(2 (rhat_l^2 + r_l^2) / n).
BaselineResult hfc(const EigenSpectra& s, double false_alarm = 1e-5);

/// Wax-Kailath criteria over the correlation eigenvalues l_1 >= ... >= l_p.
/// With G_q and A_q the geometric and arithmetic means of l_{q+1..p}:
///   AIC(q) = -2 n (p-q) ln(G_q / A_q) + 2 q (2p - q)
///   MDL(q) = -n (p-q) ln(G_q / A_q) + q (2p - q) ln(n) / 2
/// minimized over q = 0..p-1.
BaselineResult aic(const EigenSpectra& s);
BaselineResult mdl(const EigenSpectra& s);

/// Malinowski factor indicator over the eigenvalues of the scatter matrix
/// Z^T Z (c = min(n,p), r = max(n,p)):
///   RE(q) = sqrt(sum_{j>q} lambda_j / (r (c - q))),  IND(q) = RE(q) / (c - q)^2
/// minimized over q = 1..c-1.
BaselineResult fif(const EigenSpectra& s);

/// Smallest q whose leading centered principal components explain at least
/// `fraction` of the total variance.
BaselineResult variance_threshold(const EigenSpectra& s, double fraction);

/// Method names accepted by run_baselines.
const std::vector<std::string>& baseline_methods();

/// Runs the named methods (hfc, aic, mdl, fif, var95, var99) on Z.
std::vector<BaselineResult> run_baselines(const Matrix& z, const std::vector<std::string>& methods,
                                          double false_alarm = 1e-5);

struct KMeansResult {
  Matrix centroids;              ///< k x p
  std::vector<Index> labels;     ///< one per row
  std::vector<double> inertia;   ///< after seeding and after each iteration
  int iterations = 0;
  bool converged = false;        ///< labels stopped changing before max_iter
};

/// Lloyd iterations from k-means++ seeding. An emptied cluster is reseeded
/// with the point farthest from its current centroid.
KMeansResult kmeanspp(const Matrix& z, Index k, std::uint64_t seed, int max_iter = 300);

}  // namespace chemdim
