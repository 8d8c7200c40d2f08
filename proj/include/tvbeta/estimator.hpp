#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "tvbeta/kernel.hpp"
#include "tvbeta/network.hpp"
#include "tvbeta/structured_jacobian.hpp"

namespace tvbeta {

struct FitOptions {
  int max_iter = 100;
  double tol = 1e-10;         // on the scaled residual sup-norm
  int max_halvings = 30;      // step-halving line search budget
  int stagnation_window = 20; // iterations without residual progress
  double escape = 40.0;       // |coordinate| beyond this flags nonexistence
  std::optional<ParamVector> init;  // default: all zeros
};

struct FitReport {
  ParamVector theta;
  bool converged = false;
  bool nonexistence = false;
  int iterations = 0;
  double final_residual = 0.0;  // sup-norm of the scaled equations
  double kernel_mass = 0.0;     // sum_l K_h(t - T_l)
};

// Kernel-weighted out-/in-degree sums at time t (both length n).
std::pair<Eigen::VectorXd, Eigen::VectorXd> smoothed_degrees(
    const DynamicNetwork& net, double t, double h, const KernelSpec& spec = {});

// The smoothed estimating equations at (t, theta): for each sender i the
// weighted out-degree minus its weighted expectation, then the same for the
// first n-1 receivers. Length 2n-1; the fitted theta drives this to zero.
Eigen::VectorXd residual(const DynamicNetwork& net, double t,
                         const ParamVector& theta, double h,
                         const KernelSpec& spec = {});

// Unweighted system matrix of one snapshot's expectation: coupling entries
// p_ij (1 - p_ij) / n for i != j, diagonals their row/column sums.
StructuredJacobian v0_matrix(const ParamVector& theta);

// System matrix of the scaled equations: density_estimate(t) * v0_matrix.
// Equals minus the Jacobian of residual / (N n).
StructuredJacobian jacobian(const DynamicNetwork& net, double t,
                            const ParamVector& theta, double h,
                            const KernelSpec& spec = {});

// Damped Newton on arbitrary weighted degree targets: dbar (length n) and
// bbar (length n-1) are the degree targets, kappa the total weight, denom the
// residual scaling. Building block for every fit below; exposed for pooled /
// custom systems and for tests.
FitReport solve_weighted_equations(const Eigen::VectorXd& dbar,
                                   const Eigen::VectorXd& bbar, double kappa,
                                   double denom, const FitOptions& opts = {});

// Fit at one time point: solves the kernel-smoothed equations by damped
// Newton with the exact SPD solve; the update is theta += solve(V, F / (Nn)).
// Nonexistence (a weighted degree at the boundary of its range, parameter
// escape, or residual stagnation) is flagged, not thrown.
FitReport newton_solve(const DynamicNetwork& net, double t, double h,
                       const FitOptions& opts = {}, const KernelSpec& spec = {});

struct TrajectoryFit {
  ParamTrajectory trajectory;
  std::vector<FitReport> reports;  // aligned with trajectory.grid
};

// Fits every grid point, warm-starting within fixed-size chunks so results
// do not depend on the thread count.
TrajectoryFit fit_trajectory(const DynamicNetwork& net,
                             const std::vector<double>& grid, double h,
                             const FitOptions& opts = {},
                             const KernelSpec& spec = {});

// Observed times merged with an equispaced grid over the window.
std::vector<double> default_grid(const DynamicNetwork& net, int equispaced = 101);

struct PointwiseFit {
  std::vector<double> times;       // the observation times
  std::vector<FitReport> reports;  // single-snapshot fits
};

// Solves the single-snapshot equations at every observation time. Sparse
// snapshots frequently have no solution; those fits carry the nonexistence
// flag rather than failing the whole sweep.
PointwiseFit pointwise_fit(const DynamicNetwork& net, const FitOptions& opts = {});

struct SmoothedPointwiseFit {
  std::vector<double> grid;
  std::vector<std::optional<ParamVector>> params;  // nullopt = gap
  int gaps = 0;

  // Throws DataError if any grid point is a gap.
  ParamTrajectory trajectory() const;
};

// Nadaraya-Watson smoothing of the existing point-wise estimates. Grid points
// whose kernel window contains no existing estimate are flagged as gaps.
SmoothedPointwiseFit smooth_pointwise(const PointwiseFit& pw, double h,
                                      const std::vector<double>& grid,
                                      const KernelSpec& spec = {});

enum class Side { Left, Right };

// Fit using only snapshots strictly before t (Left) or at/after t (Right).
FitReport one_sided_fit(const DynamicNetwork& net, double t, double h, Side side,
                        const FitOptions& opts = {}, const KernelSpec& spec = {});

struct ChangePointScan {
  double t_hat = 0.0;
  std::vector<double> grid;
  std::vector<double> gap;      // squared distance between one-sided fits; NaN if skipped
  std::vector<int> skipped;     // grid indices where a one-sided fit failed
};

// Scans [a1, b1] for the largest squared distance between the left and right
// one-sided fits. Requires a margin of at least h between [a1, b1] and the
// observation window ends.
ChangePointScan change_point_scan(const DynamicNetwork& net, double h,
                                  double a1, double b1,
                                  const std::vector<double>& grid,
                                  const FitOptions& opts = {},
                                  const KernelSpec& spec = {});

}  // namespace tvbeta
