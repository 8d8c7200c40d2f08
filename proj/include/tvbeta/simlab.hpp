#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tvbeta/estimator.hpp"
#include "tvbeta/inference.hpp"
#include "tvbeta/network.hpp"

namespace tvbeta {

// A ground-truth parameter curve family theta*(t). The built-in families
// split the nodes into four equal blocks (n divisible by 4, n >= 8) and give
// each block its own sender/receiver curve; the last sender curve also covers
// node n, and the last receiver effect is pinned to zero.
class ParamFamily {
 public:
  static ParamFamily benchmark(int n);  // moderate curves, dense-ish networks
  static ParamFamily sparse(int n);     // steep curves pushing degrees to the boundary
  static ParamFamily constant(int n, double c);
  static ParamFamily fixed(ParamVector theta);
  static ParamFamily custom(int n, TruthFn fn, std::string name = "custom");

  ParamVector eval(double t) const { return fn_(t); }
  TruthFn truth() const { return fn_; }
  int n() const { return n_; }
  const std::string& name() const { return name_; }

 private:
  ParamFamily(int n, TruthFn fn, std::string name);

  int n_;
  TruthFn fn_;
  std::string name_;
};

struct SimDesign {
  int n = 40;
  int N = 100;
  double h = 0.23;
  double a = 0.1;
  double b = 0.9;
  int reps = 100;
  std::uint64_t seed = 1;
};

// One synthetic replicate: observation times iid uniform on [a, b] (sorted),
// every off-diagonal edge an independent coin flip at the truth. Replicates
// own disjoint substreams of the design seed, so any one of them can be
// regenerated in isolation.
DynamicNetwork generate(const SimDesign& design, const ParamFamily& family,
                        int replicate);

struct RmseResult {
  double summed = 0.0;          // sqrt(mean over times of the squared coordinate norm)
  double per_coordinate = 0.0;  // same with the norm averaged over coordinates
};

// Estimation error of a fitted trajectory against the truth at the given
// times, which must all be present in the trajectory grid.
RmseResult rmse(const ParamTrajectory& est, const ParamFamily& family,
                const std::vector<double>& times);

struct BiasSdRow {
  Provenance method = Provenance::Smoothed;
  double t = 0.0;
  int node = 0;  // 0-based
  double alpha_bias = 0.0;
  double alpha_sd = 0.0;
  double beta_bias = 0.0;
  double beta_sd = 0.0;
  int used = 0;      // replicates entering the cell
  int excluded = 0;  // replicates dropped because the fit failed at this t
};

// Monte Carlo bias and sample SD (ddof 1) of the fitted sender/receiver
// effects at selected times and nodes, for each requested method. The
// point-wise method is evaluated at the observation time nearest to t; the
// smoothed point-wise method kernel-averages the converged point-wise fits.
std::vector<BiasSdRow> bias_sd_table(const SimDesign& design,
                                     const ParamFamily& family,
                                     const std::vector<double>& ts,
                                     const std::vector<int>& nodes,
                                     const std::vector<Provenance>& methods,
                                     const FitOptions& opts = {},
                                     const KernelSpec& spec = {});

struct NormalityDiag {
  Eigen::MatrixXd z;          // successful replicates x coords, standardized
  std::vector<double> ks;     // per-coordinate KS distance to standard normal
  double ellipse_coverage = 0.0;  // fraction inside the Mahalanobis-9 ellipse
  int failed = 0;                 // replicates excluded
  Eigen::VectorXd mean_corrected;    // mean standardized value, bias-corrected
  Eigen::VectorXd mean_uncorrected;  // same without the bias correction
};

// Standardizes sqrt(Nnh) (theta_hat_q - theta*_q - k21 h^2 mu_q) by
// sqrt(k02 Sigma_qq) with Sigma evaluated at the truth, per replicate, for
// the requested free-coordinate indices (0-based; q < n are senders). The
// ellipse coverage uses the first two requested coordinates jointly.
NormalityDiag normality_diag(const SimDesign& design, const ParamFamily& family,
                             double t, const std::vector<int>& coords, int reps,
                             const FitOptions& opts = {},
                             const KernelSpec& spec = {});

// Difficulty label of a truth family: the largest value of
// (1 + e^{alpha_i + beta_j})^2 / e^{alpha_i + beta_j} over a time grid and all
// ordered pairs i != j. Equals 4 when all effects vanish; grows with sparsity
// or density.
double q_diagnostic(const ParamFamily& family, double a, double b,
                    int grid_size = 201);

}  // namespace tvbeta
