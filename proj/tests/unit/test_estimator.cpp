#include "tvbeta/estimator.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "tvbeta/rng.hpp"
#include "tvbeta/simlab.hpp"

namespace {

using namespace tvbeta;

DynamicNetwork random_network(int n, int N, const ParamVector& theta,
                              std::uint64_t seed, double a = 0.0, double b = 1.0) {
  SimDesign d;
  d.n = n;
  d.N = N;
  d.a = a;
  d.b = b;
  d.seed = seed;
  return generate(d, ParamFamily::fixed(theta), 0);
}

ParamVector random_theta(int n, SplitMix64& rng, double scale = 1.0) {
  Eigen::VectorXd alpha(n), beta(n - 1);
  for (int i = 0; i < n; ++i) alpha[i] = rng.uniform(-scale, scale);
  for (int j = 0; j + 1 < n; ++j) beta[j] = rng.uniform(-scale, scale);
  return ParamVector(alpha, beta);
}

// The estimating equations written as the naive triple loop over snapshots,
// senders and receivers; the production code vectorizes all of it.
Eigen::VectorXd residual_by_hand(const DynamicNetwork& net, double t,
                                 const ParamVector& theta, double h) {
  const int n = net.n();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(2 * n - 1);
  for (int l = 0; l < net.size(); ++l) {
    const double w = kh(KernelSpec{}, t, net.time(l), h);
    for (int i = 0; i < n; ++i) {
      double expected = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) expected += edge_prob(theta.alpha(i), theta.beta(j));
      double d = 0.0;
      for (int j = 0; j < n; ++j) d += net.snapshot(l)(i, j);
      F[i] += w * (d - expected);
    }
    for (int j = 0; j + 1 < n; ++j) {
      double expected = 0.0;
      for (int i = 0; i < n; ++i)
        if (i != j) expected += edge_prob(theta.alpha(i), theta.beta(j));
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += net.snapshot(l)(i, j);
      F[n + j] += w * (d - expected);
    }
  }
  return F;
}

}  // namespace

TEST_CASE("smoothed degrees divided by the kernel mass estimate the mean degree") {
  const int n = 40;
  DynamicNetwork net = random_network(n, 2000, ParamVector(n), 7);
  const double h = 0.2;
  const auto [dbar, bbar] = smoothed_degrees(net, 0.5, h);
  const double kappa = kernel_weights(net, 0.5, h).sum();
  REQUIRE(kappa > 0.0);
  // flat effects put every edge at probability 1/2: mean degree (n-1)/2
  for (int i = 0; i < n; ++i) {
    CHECK(dbar[i] / kappa == doctest::Approx(0.5 * (n - 1)).epsilon(0.03));
    CHECK(bbar[i] / kappa == doctest::Approx(0.5 * (n - 1)).epsilon(0.03));
  }
  CHECK_THROWS_AS(smoothed_degrees(net, 1.5, h), ConfigError);
}

TEST_CASE("vectorized equations match the naive triple loop") {
  SplitMix64 rng(12);
  const int n = 5;
  const ParamVector truth = random_theta(n, rng);
  DynamicNetwork net = random_network(n, 3, truth, 13);
  const ParamVector at = random_theta(n, rng);
  const Eigen::VectorXd fast = residual(net, 0.45, at, 0.3);
  const Eigen::VectorXd slow = residual_by_hand(net, 0.45, at, 0.3);
  CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + slow.cwiseAbs().maxCoeff()));
  CHECK_THROWS_AS(residual(net, 0.45, ParamVector(n + 1), 0.3), ConfigError);
}

TEST_CASE("the system matrix is minus the derivative of the scaled equations") {
  SplitMix64 rng(21);
  const int n = 6;
  DynamicNetwork net = random_network(n, 10, random_theta(n, rng), 22);
  const ParamVector at = random_theta(n, rng);
  const double t = 0.5, h = 0.25;
  const double denom = static_cast<double>(net.size()) * n;

  const Eigen::MatrixXd V = jacobian(net, t, at, h).dense();
  const int d = 2 * n - 1;
  Eigen::MatrixXd fd(d, d);
  const double step = 1e-5;
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd up = at.free(), dn = at.free();
    up[k] += step;
    dn[k] -= step;
    fd.col(k) = (residual(net, t, ParamVector::from_free(up), h) -
                 residual(net, t, ParamVector::from_free(dn), h)) /
                (2.0 * step * denom);
  }
  CHECK((V + fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("the fitted point matches the weighted degrees to the requested tolerance") {
  SplitMix64 rng(33);
  const int n = 12;
  const ParamVector truth = random_theta(n, rng, 0.8);
  DynamicNetwork net = random_network(n, 25, truth, 34);
  const double t = 0.5, h = 0.3;

  const FitReport rep = newton_solve(net, t, h);
  REQUIRE(rep.converged);
  REQUIRE_FALSE(rep.nonexistence);
  const double denom = static_cast<double>(net.size()) * n;
  const Eigen::VectorXd F = residual(net, t, rep.theta, h);
  CHECK(F.cwiseAbs().maxCoeff() <= 1e-10 * denom);
  CHECK(rep.final_residual <= 1e-10);
  CHECK(rep.kernel_mass == doctest::Approx(kernel_weights(net, t, h).sum()));
}

TEST_CASE("restarting from a different point lands on the same root") {
  SplitMix64 rng(44);
  const int n = 10;
  const ParamVector truth = random_theta(n, rng, 0.7);
  DynamicNetwork net = random_network(n, 30, truth, 45);

  FitOptions cold;
  FitOptions warm;
  warm.init = truth;
  FitOptions far;
  Eigen::VectorXd off = Eigen::VectorXd::Constant(2 * n - 1, 1.5);
  far.init = ParamVector::from_free(off);

  const FitReport a = newton_solve(net, 0.4, 0.3, cold);
  const FitReport b = newton_solve(net, 0.4, 0.3, warm);
  const FitReport c = newton_solve(net, 0.4, 0.3, far);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  REQUIRE(c.converged);
  CHECK((a.theta.free() - b.theta.free()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((a.theta.free() - c.theta.free()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("a flat kernel with a wide window reduces to the pooled fit") {
  SplitMix64 rng(55);
  const int n = 8;
  DynamicNetwork net = random_network(n, 20, random_theta(n, rng, 0.5), 56);
  const KernelSpec flat{KernelFamily::Uniform};

  // every snapshot gets the same weight, so the root solves the averaged
  // (pooled) degree equations
  FitOptions tight;
  tight.tol = 1e-12;
  const FitReport smoothed = newton_solve(net, 0.5, 50.0, tight, flat);
  REQUIRE(smoothed.converged);

  Eigen::VectorXd davg = Eigen::VectorXd::Zero(n), bavg = Eigen::VectorXd::Zero(n - 1);
  for (int l = 0; l < net.size(); ++l) {
    davg += net.out_degree_rows().row(l).transpose();
    bavg += net.in_degree_rows().row(l).head(n - 1).transpose();
  }
  davg /= net.size();
  bavg /= net.size();
  const FitReport pooled = solve_weighted_equations(davg, bavg, 1.0, n, tight);
  REQUIRE(pooled.converged);
  CHECK((smoothed.theta.free() - pooled.theta.free()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("boundary degree targets are flagged as nonexistence without iterating") {
  const int n = 6;
  // node 0 sends to everyone in every snapshot: its weighted out-degree sits
  // at the top of its range and no finite root exists
  Adjacency full = Adjacency::Zero(n, n);
  for (int j = 1; j < n; ++j) full(0, j) = 1;
  full(1, 2) = 1;
  full(3, 1) = 1;
  DynamicNetwork net({0.4, 0.6}, {full, full}, 0.0, 1.0);

  const FitReport rep = newton_solve(net, 0.5, 0.5);
  CHECK(rep.nonexistence);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 0);

  // an all-zero in-degree column trips the lower boundary the same way
  Adjacency sparse = Adjacency::Zero(n, n);
  sparse(0, 1) = 1;
  sparse(2, 1) = 1;
  sparse(1, 3) = 1;
  DynamicNetwork net2({0.4, 0.6}, {sparse, sparse}, 0.0, 1.0);
  const FitReport rep2 = newton_solve(net2, 0.5, 0.5);
  CHECK(rep2.nonexistence);
}

TEST_CASE("a time with no kernel mass raises the no-data error") {
  const int n = 4;
  DynamicNetwork net = random_network(n, 5, ParamVector(n), 66, 0.0, 0.2);
  DynamicNetwork wide({0.1, 0.15}, {net.snapshot(0), net.snapshot(1)}, 0.0, 1.0);
  CHECK_THROWS_AS(newton_solve(wide, 0.9, 0.05), NoDataError);
  CHECK_THROWS_AS(solve_weighted_equations(Eigen::VectorXd::Ones(4),
                                           Eigen::VectorXd::Ones(3), 0.0, 4.0),
                  NoDataError);
  CHECK_THROWS_AS(solve_weighted_equations(Eigen::VectorXd::Ones(4),
                                           Eigen::VectorXd::Ones(3), 1.0, 0.0),
                  ConfigError);
}

TEST_CASE("trajectory fits are identical for any thread count") {
  SplitMix64 rng(77);
  const int n = 8;
  DynamicNetwork net = random_network(n, 60, random_theta(n, rng, 0.6), 78);
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(0.05 + 0.9 * k / 40.0);

  setenv("TVBETA_THREADS", "3", 1);
  const TrajectoryFit multi = fit_trajectory(net, grid, 0.25);
  setenv("TVBETA_THREADS", "1", 1);
  const TrajectoryFit single = fit_trajectory(net, grid, 0.25);
  unsetenv("TVBETA_THREADS");

  REQUIRE(multi.trajectory.params.size() == single.trajectory.params.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK((multi.trajectory.params[g].free() - single.trajectory.params[g].free())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(multi.reports[g].iterations == single.reports[g].iterations);
  }

  CHECK_THROWS_AS(fit_trajectory(net, {}, 0.25), ConfigError);
  CHECK_THROWS_AS(fit_trajectory(net, {0.5, 0.4}, 0.25), ConfigError);
  CHECK_THROWS_AS(fit_trajectory(net, {0.5, 1.4}, 0.25), ConfigError);
}

TEST_CASE("the default grid merges observation times with an equispaced cover") {
  const int n = 4;
  DynamicNetwork net = random_network(n, 7, ParamVector(n), 88, 0.1, 0.9);
  const std::vector<double> grid = default_grid(net, 11);
  // contains both endpoints and every observation time, strictly increasing
  CHECK(grid.front() == 0.1);
  CHECK(grid.back() == 0.9);
  for (double t : net.times())
    CHECK(std::find(grid.begin(), grid.end(), t) != grid.end());
  for (std::size_t g = 1; g < grid.size(); ++g) CHECK(grid[g - 1] < grid[g]);
  CHECK(grid.size() <= 7u + 11u);
  CHECK_THROWS_AS(default_grid(net, 1), ConfigError);
}

TEST_CASE("single-snapshot sweeps flag failures instead of throwing") {
  const int n = 6;
  Adjacency full = Adjacency::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) full(i, j) = (i + j) % 2;  // balanced, fit exists
  Adjacency dead = Adjacency::Zero(n, n);   // empty snapshot, no fit
  dead(0, 1) = 1;
  DynamicNetwork net({0.2, 0.5, 0.8}, {full, dead, full}, 0.0, 1.0);

  const PointwiseFit pw = pointwise_fit(net);
  REQUIRE(pw.reports.size() == 3);
  CHECK(pw.reports[0].converged);
  CHECK(pw.reports[1].nonexistence);
  CHECK(pw.reports[2].converged);
  CHECK(pw.times == net.times());
}

TEST_CASE("smoothing the single-snapshot estimates averages them and flags gaps") {
  const int n = 6;
  Adjacency a = Adjacency::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) a(i, j) = (i + 2 * j) % 3 != 0;
  DynamicNetwork net({0.4, 0.45, 0.5}, {a, a, a}, 0.0, 1.0);

  const PointwiseFit pw = pointwise_fit(net);
  REQUIRE(pw.reports[0].converged);
  // identical snapshots give identical estimates; any average reproduces them
  const SmoothedPointwiseFit sm = smooth_pointwise(pw, 0.2, {0.38, 0.47});
  CHECK(sm.gaps == 0);
  REQUIRE(sm.params[0].has_value());
  CHECK((sm.params[0]->free() - pw.reports[0].theta.free()).cwiseAbs().maxCoeff() <
        1e-12);
  const ParamTrajectory traj = sm.trajectory();
  CHECK(traj.provenance == Provenance::SmoothedPointWise);

  // a far-away grid point has no estimate inside its kernel window
  const SmoothedPointwiseFit gappy = smooth_pointwise(pw, 0.05, {0.1, 0.45});
  CHECK(gappy.gaps == 1);
  CHECK_FALSE(gappy.params[0].has_value());
  CHECK(gappy.params[1].has_value());
  CHECK_THROWS_AS(gappy.trajectory(), DataError);

  CHECK_THROWS_AS(smooth_pointwise(pw, 0.0, {0.5}), ConfigError);
  CHECK_THROWS_AS(smooth_pointwise(pw, 0.1, {}), ConfigError);
  CHECK_THROWS_AS(smooth_pointwise(pw, 0.1, {0.5, 0.5}), ConfigError);
}

TEST_CASE("one-sided fits use only their own side of the evaluation point") {
  const int n = 6;
  SplitMix64 rng(91);
  DynamicNetwork net = random_network(n, 40, random_theta(n, rng, 0.4), 92);
  const KernelSpec flat{KernelFamily::Uniform};

  // at the left window edge the right-sided window holds every snapshot, so
  // a wide flat kernel reproduces the two-sided (pooled) fit exactly
  const FitReport right = one_sided_fit(net, 0.0, 50.0, Side::Right, {}, flat);
  const FitReport both = newton_solve(net, 0.0, 50.0, {}, flat);
  REQUIRE(right.converged);
  REQUIRE(both.converged);
  CHECK((right.theta.free() - both.theta.free()).cwiseAbs().maxCoeff() == 0.0);

  const FitReport left = one_sided_fit(net, 1.0, 50.0, Side::Left, {}, flat);
  REQUIRE(left.converged);
  CHECK((left.theta.free() - both.theta.free()).cwiseAbs().maxCoeff() == 0.0);

  // nothing lies strictly left of the left window edge
  CHECK_THROWS_AS(one_sided_fit(net, 0.0, 50.0, Side::Left, {}, flat), NoDataError);
}

TEST_CASE("the scan locates an abrupt shift in the sender effects") {
  const int n = 16;
  const double jump_at = 0.5;
  ParamFamily family = ParamFamily::custom(n, [n, jump_at](double t) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, t >= jump_at ? 1.0 : 0.0);
    return ParamVector(alpha, Eigen::VectorXd::Zero(n - 1));
  });
  SimDesign d;
  d.n = n;
  d.N = 200;
  d.a = 0.0;
  d.b = 1.0;
  d.seed = 5;
  DynamicNetwork net = generate(d, family, 0);

  const double h = 0.1;
  std::vector<double> grid;
  for (int k = 0; k <= 30; ++k) grid.push_back(0.35 + 0.3 * k / 30.0);
  const ChangePointScan scan = change_point_scan(net, h, 0.35, 0.65, grid);
  CHECK(std::abs(scan.t_hat - jump_at) <= h);
  CHECK(scan.gap.size() == grid.size());

  CHECK_THROWS_AS(change_point_scan(net, h, 0.05, 0.65, grid), ConfigError);
  CHECK_THROWS_AS(change_point_scan(net, h, 0.65, 0.35, grid), ConfigError);
  CHECK_THROWS_AS(change_point_scan(net, h, 0.35, 0.65, {0.2}), ConfigError);
}
