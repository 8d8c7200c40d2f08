#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "tvbeta/estimator.hpp"

namespace tvbeta {

struct VarianceReport {
  Eigen::MatrixXd sigma_hat;  // S(V) V S(V)^T, (2n-1) x (2n-1)
  double scale = 0.0;         // k02 / (N n h)
  Eigen::VectorXd se;         // sqrt(k02 sigma_hat_qq / (N n h)) per coordinate
  double fhat = 0.0;          // kernel density estimate at t
};

// Plug-in variance of the fitted coordinates at time t: the system matrix at
// theta_hat, its closed-form approximate inverse S, and the sandwich
// S V S^T scaled by the kernel constants.
VarianceReport variance_estimate(const DynamicNetwork& net, double t,
                                 const ParamVector& theta_hat, double h,
                                 const KernelSpec& spec = {});

struct ConfidenceBand {
  Eigen::MatrixXd lower;  // grid x (2n-1)
  Eigen::MatrixXd upper;
};

// Per-coordinate normal bands theta_hat_q +/- z se_q along a trajectory;
// reports must align with the trajectory grid.
ConfidenceBand confidence_band(const ParamTrajectory& traj,
                               const std::vector<VarianceReport>& reports,
                               double level);

using TruthFn = std::function<ParamVector(double)>;

struct TheoreticalBias {
  Eigen::VectorXd mu;       // length 2n-1, the leading bias of each coordinate
  Eigen::MatrixXd u;        // edge probabilities at the truth, diag zero
  Eigen::MatrixXd mu_pair;  // u'_ij f' + u''_ij f / 2 per ordered pair
  double f = 0.0;           // sampling density at t
  double fprime = 0.0;      // its derivative at t
};

// Leading smoothing-bias coefficients at time t for a known truth curve and
// sampling density. Pair curvature is taken by central differences with step
// 1e-3 of the window length, so t must sit at least one step inside [a, b].
// The bias of coordinate q is k21 h^2 mu[q] to first order.
TheoreticalBias theoretical_bias(const TruthFn& truth, double t, double f,
                                 double fprime, double window_a, double window_b);

}  // namespace tvbeta
