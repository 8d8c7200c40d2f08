#include "tvbeta/inference.hpp"

#include <cmath>

#include "tvbeta/stats.hpp"

namespace tvbeta {

VarianceReport variance_estimate(const DynamicNetwork& net, double t,
                                 const ParamVector& theta_hat, double h,
                                 const KernelSpec& spec) {
  const Eigen::VectorXd w = kernel_weights(net, t, h, spec);
  const double kappa = w.sum();
  if (!(kappa > 0.0))
    throw NoDataError("variance_estimate: no snapshot carries kernel weight at t");

  const double N = net.size();
  const double n = net.n();
  VarianceReport out;
  out.fhat = kappa / N;

  const StructuredJacobian V = v0_matrix(theta_hat).scaled(out.fhat);
  const Eigen::MatrixXd S = approx_inverse(V);
  out.sigma_hat = S * V.dense() * S.transpose();
  out.scale = moments(spec).k02 / (N * n * h);
  out.se = (out.scale * out.sigma_hat.diagonal()).cwiseMax(0.0).cwiseSqrt();
  return out;
}

ConfidenceBand confidence_band(const ParamTrajectory& traj,
                               const std::vector<VarianceReport>& reports,
                               double level) {
  traj.check();
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("confidence_band: level must lie in (0, 1)");
  if (reports.size() != traj.grid.size())
    throw ConfigError("confidence_band: one variance report per grid point");

  const double z = normal_quantile(0.5 * (1.0 + level));
  const int p = 2 * traj.n() - 1;
  ConfidenceBand band;
  band.lower.resize(static_cast<Eigen::Index>(traj.grid.size()), p);
  band.upper.resize(static_cast<Eigen::Index>(traj.grid.size()), p);
  for (std::size_t g = 0; g < traj.grid.size(); ++g) {
    if (reports[g].se.size() != p)
      throw ConfigError("confidence_band: variance report size mismatch");
    const Eigen::VectorXd theta = traj.params[g].free();
    band.lower.row(static_cast<Eigen::Index>(g)) =
        (theta - z * reports[g].se).transpose();
    band.upper.row(static_cast<Eigen::Index>(g)) =
        (theta + z * reports[g].se).transpose();
  }
  return band;
}

TheoreticalBias theoretical_bias(const TruthFn& truth, double t, double f,
                                 double fprime, double window_a,
                                 double window_b) {
  if (!(window_a < window_b))
    throw ConfigError("theoretical_bias: window must satisfy a < b");
  const double step = 1e-3 * (window_b - window_a);
  if (t - step < window_a || t + step > window_b)
    throw ConfigError("theoretical_bias: t too close to the window edge for differences");
  if (!(f > 0.0)) throw ConfigError("theoretical_bias: density must be positive");

  const ParamVector th0 = truth(t);
  const ParamVector thm = truth(t - step);
  const ParamVector thp = truth(t + step);
  const int n = th0.n();
  if (thm.n() != n || thp.n() != n)
    throw ConfigError("theoretical_bias: truth changed size across evaluations");

  auto prob_matrix = [n](const ParamVector& th) {
    Eigen::MatrixXd u(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        u(i, j) = i == j ? 0.0 : edge_prob(th.alpha(i), th.beta(j));
    return u;
  };

  const Eigen::MatrixXd u0 = prob_matrix(th0);
  const Eigen::MatrixXd um = prob_matrix(thm);
  const Eigen::MatrixXd up = prob_matrix(thp);
  const Eigen::MatrixXd u1 = (up - um) / (2.0 * step);
  const Eigen::MatrixXd u2 = (up - 2.0 * u0 + um) / (step * step);

  TheoreticalBias out;
  out.u = u0;
  out.mu_pair = u1 * fprime + 0.5 * u2 * f;
  out.f = f;
  out.fprime = fprime;

  // Normalizers come from the unweighted system matrix at the truth.
  const StructuredJacobian V0 = v0_matrix(th0);
  const double shared =
      out.mu_pair.col(n - 1).head(n - 1).sum() / n / (f * V0.border_total());

  out.mu.resize(2 * n - 1);
  for (int q = 0; q < n; ++q) {
    const double own =
        (out.mu_pair.row(q).sum() / n) / (f * V0.diag_alpha()[q]);
    out.mu[q] = own + shared;
  }
  for (int j = 0; j + 1 < n; ++j) {
    const double own =
        (out.mu_pair.col(j).sum() / n) / (f * V0.diag_beta()[j]);
    out.mu[n + j] = own - shared;
  }
  return out;
}

}  // namespace tvbeta
