#pragma once

#include <vector>

#include "tvbeta/estimator.hpp"

namespace tvbeta {

// What to do with the cross-validation loss when a leave-one-out fit fails
// (nonexistence or no convergence).
enum class CvFailurePolicy {
  InfiniteLoss,     // default: the whole candidate bandwidth scores +inf
  SkipRenormalize,  // drop the failed term, rescale by N / (N - failures)
};

struct CvOptions {
  FitOptions fit;
  CvFailurePolicy policy = CvFailurePolicy::InfiniteLoss;
};

struct CvResult {
  std::vector<double> grid;    // candidate bandwidths
  std::vector<double> losses;  // leave-one-out losses, +inf where failed
  std::vector<int> failures;   // failed leave-one-out fits per candidate
  double h_opt = 0.0;          // argmin over finite losses, smaller h on ties
};

// Fit at T_l with snapshot l excluded; the building block of the
// cross-validation loss, exposed so the exclusion is testable directly.
FitReport loo_fit(const DynamicNetwork& net, int l, double h,
                  const FitOptions& opts = {}, const KernelSpec& spec = {});

// Leave-one-out cross-validation of the bandwidth: for each candidate h the
// loss sums, over snapshots, the squared Frobenius distance between the held
// out snapshot and the edge probabilities fitted without it.
CvResult loo_cv(const DynamicNetwork& net, const std::vector<double>& h_grid,
                const CvOptions& opts = {}, const KernelSpec& spec = {});

// The default candidate grid: 26 equispaced points on [0.05, 0.3].
std::vector<double> default_h_grid();

// Rate-based bandwidth transfer from a reference design:
// h0 ((n0 N0) / (n N))^{1/5}.
double rate_bandwidth(int n, int N, int n0 = 40, int N0 = 100, double h0 = 0.23);

}  // namespace tvbeta
