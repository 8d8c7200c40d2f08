#pragma once

#include <Eigen/Dense>

#include "tvbeta/errors.hpp"

namespace tvbeta {

// System matrix of the smoothed estimating equations, stored by blocks:
// an n-vector of sender diagonals, an (n-1)-vector of receiver diagonals and
// the non-negative n x (n-1) coupling block; both off-diagonal quadrants of
// the sender block and of the receiver block are structurally zero. Row i's
// slack over its off-diagonal mass and the slack total act as a bordering
// (2n)-th row/column in the closed-form approximate inverse.
class StructuredJacobian {
 public:
  StructuredJacobian(Eigen::VectorXd diag_alpha, Eigen::VectorXd diag_beta,
                     Eigen::MatrixXd cross);

  int n() const { return static_cast<int>(diag_alpha_.size()); }
  int dim() const { return 2 * n() - 1; }

  const Eigen::VectorXd& diag_alpha() const { return diag_alpha_; }
  const Eigen::VectorXd& diag_beta() const { return diag_beta_; }
  const Eigen::MatrixXd& cross() const { return cross_; }

  // Slack v_{ii} - sum_{j != i} v_{ij} per row, length 2n-1.
  Eigen::VectorXd border() const;

  // Total slack: equals 2 * sum_i v_{ii} - sum_{i<=n, j} v_{ij} whenever the
  // receiver diagonals match their column sums.
  double border_total() const;

  Eigen::MatrixXd dense() const;

  StructuredJacobian scaled(double c) const;

 private:
  Eigen::VectorXd diag_alpha_;  // length n
  Eigen::VectorXd diag_beta_;   // length n-1
  Eigen::MatrixXd cross_;       // n x (n-1)
};

struct ClassBounds {
  double m;
  double M;
};

// Tightest [m, M] over the class-defining entries: the first n-1 sender row
// slacks and the off coupling entries (i != j). Throws StructureError when a
// structural condition fails: a negative coupling entry, a nonzero pinned
// coupling entry (i == j), sender row n having nonzero slack, or a receiver
// diagonal differing from its column sum.
ClassBounds class_bounds(const StructuredJacobian& V, double tol = 1e-10);

// Closed-form approximate inverse: reciprocal diagonal plus a rank-one
// border correction, +1/border_total on the two diagonal quadrants and
// -1/border_total on the coupling quadrants. Throws SingularError when a
// diagonal entry or the border total is zero.
Eigen::MatrixXd approx_inverse(const StructuredJacobian& V);

// Exact symmetric positive-definite solve of V x = rhs with an infinity-norm
// residual guarantee of rtol * ||rhs||_inf (one refinement step if needed).
Eigen::VectorXd solve(const StructuredJacobian& V, const Eigen::VectorXd& rhs,
                      double rtol = 1e-10);

}  // namespace tvbeta
