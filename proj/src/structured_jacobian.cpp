#include "tvbeta/structured_jacobian.hpp"

#include <cmath>
#include <string>

namespace tvbeta {

StructuredJacobian::StructuredJacobian(Eigen::VectorXd diag_alpha,
                                       Eigen::VectorXd diag_beta,
                                       Eigen::MatrixXd cross)
    : diag_alpha_(std::move(diag_alpha)),
      diag_beta_(std::move(diag_beta)),
      cross_(std::move(cross)) {
  const Eigen::Index n = diag_alpha_.size();
  if (n < 2) throw ConfigError("StructuredJacobian: needs n >= 2");
  if (diag_beta_.size() != n - 1 || cross_.rows() != n || cross_.cols() != n - 1)
    throw ConfigError("StructuredJacobian: block sizes must be n, n-1, n x (n-1)");
  if (!diag_alpha_.allFinite() || !diag_beta_.allFinite() || !cross_.allFinite())
    throw ConfigError("StructuredJacobian: entries must be finite");
}

Eigen::VectorXd StructuredJacobian::border() const {
  const int nn = n();
  Eigen::VectorXd s(dim());
  s.head(nn) = diag_alpha_ - cross_.rowwise().sum();
  s.tail(nn - 1) = diag_beta_ - cross_.colwise().sum().transpose();
  return s;
}

double StructuredJacobian::border_total() const { return border().sum(); }

Eigen::MatrixXd StructuredJacobian::dense() const {
  const int nn = n();
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(dim(), dim());
  V.topLeftCorner(nn, nn).diagonal() = diag_alpha_;
  V.bottomRightCorner(nn - 1, nn - 1).diagonal() = diag_beta_;
  V.topRightCorner(nn, nn - 1) = cross_;
  V.bottomLeftCorner(nn - 1, nn) = cross_.transpose();
  return V;
}

StructuredJacobian StructuredJacobian::scaled(double c) const {
  return StructuredJacobian(c * diag_alpha_, c * diag_beta_, c * cross_);
}

ClassBounds class_bounds(const StructuredJacobian& V, double tol) {
  const int n = V.n();
  const Eigen::MatrixXd& C = V.cross();
  const double scale = std::max(
      {1.0, V.diag_alpha().cwiseAbs().maxCoeff(),
       V.diag_beta().cwiseAbs().maxCoeff(), C.cwiseAbs().maxCoeff()});
  std::string failed;
  auto fail = [&](const std::string& msg) {
    if (!failed.empty()) failed += "; ";
    failed += msg;
  };

  for (int i = 0; i + 1 < n; ++i)
    if (std::abs(C(i, i)) > tol * scale)
      fail("coupling entry (" + std::to_string(i + 1) + "," +
           std::to_string(i + 1) + ") must be zero");
  if (C.minCoeff() < -tol * scale) fail("negative coupling entry");

  const Eigen::VectorXd slack = V.border();
  if (std::abs(slack[n - 1]) > tol * scale)
    fail("sender row n must have zero slack");
  for (int j = 0; j + 1 < n; ++j)
    if (std::abs(slack[n + j]) > tol * scale)
      fail("receiver diagonal " + std::to_string(j + 1) +
           " must equal its column sum");

  if (!failed.empty()) throw StructureError("class_bounds: " + failed);

  double lo = slack.head(n - 1).minCoeff();
  double hi = slack.head(n - 1).maxCoeff();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      if (i == j) continue;
      lo = std::min(lo, C(i, j));
      hi = std::max(hi, C(i, j));
    }
  }
  return {lo, hi};
}

Eigen::MatrixXd approx_inverse(const StructuredJacobian& V) {
  const int n = V.n();
  const int d = V.dim();
  const double total = V.border_total();
  if (total == 0.0)
    throw SingularError("approx_inverse: zero border total");
  if ((V.diag_alpha().array() == 0.0).any() ||
      (V.diag_beta().array() == 0.0).any())
    throw SingularError("approx_inverse: zero diagonal entry");

  const double g = 1.0 / total;
  Eigen::MatrixXd S(d, d);
  S.topLeftCorner(n, n).setConstant(g);
  S.bottomRightCorner(n - 1, n - 1).setConstant(g);
  S.topRightCorner(n, n - 1).setConstant(-g);
  S.bottomLeftCorner(n - 1, n).setConstant(-g);
  S.diagonal().head(n) += V.diag_alpha().cwiseInverse();
  S.diagonal().tail(n - 1) += V.diag_beta().cwiseInverse();
  return S;
}

Eigen::VectorXd solve(const StructuredJacobian& V, const Eigen::VectorXd& rhs,
                      double rtol) {
  if (rhs.size() != V.dim())
    throw ConfigError("solve: rhs length must equal 2n-1");
  const Eigen::MatrixXd dense = V.dense();
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success)
    throw SingularError("solve: factorization failed (matrix not positive definite)");
  Eigen::VectorXd x = llt.solve(rhs);
  const double target = rtol * std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
  double resid = (dense * x - rhs).cwiseAbs().maxCoeff();
  if (resid > target) {
    x += llt.solve(rhs - dense * x);
    resid = (dense * x - rhs).cwiseAbs().maxCoeff();
    if (resid > target || !x.allFinite())
      throw SingularError("solve: residual tolerance not reached");
  }
  if (!x.allFinite()) throw SingularError("solve: non-finite solution");
  return x;
}

}  // namespace tvbeta
