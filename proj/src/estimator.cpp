#include "tvbeta/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tvbeta/parallel.hpp"

namespace tvbeta {

namespace {

constexpr std::size_t kFitChunk = 16;  // warm-start unit, fixed for determinism

// P_ij = logistic(alpha_i + beta_j) and W = P (1 - P), diagonals zeroed.
void edge_prob_matrices(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                        Eigen::MatrixXd& P, Eigen::MatrixXd& W) {
  const Eigen::Index n = alpha.size();
  Eigen::ArrayXXd X = alpha.replicate(1, n).array();
  X.rowwise() += beta.transpose().array();
  const Eigen::ArrayXXd E = (-X.abs()).exp();  // exp(-|x|), never overflows
  const Eigen::ArrayXXd Pa = (X >= 0.0).select(1.0 / (1.0 + E), E / (1.0 + E));
  P = Pa.matrix();
  W = (Pa * (1.0 - Pa)).matrix();
  P.diagonal().setZero();
  W.diagonal().setZero();
}

// Residual of the weighted equations given the edge probabilities.
Eigen::VectorXd equations(const Eigen::VectorXd& dbar, const Eigen::VectorXd& bbar,
                          double kappa, const Eigen::MatrixXd& P) {
  const Eigen::Index n = dbar.size();
  Eigen::VectorXd F(2 * n - 1);
  F.head(n) = dbar - kappa * P.rowwise().sum();
  F.tail(n - 1) = bbar - kappa * P.colwise().sum().head(n - 1).transpose();
  return F;
}

// Dense system matrix with entries s * W off the diagonal blocks.
void build_system(const Eigen::MatrixXd& W, double s, Eigen::MatrixXd& V) {
  const Eigen::Index n = W.rows();
  const Eigen::Index d = 2 * n - 1;
  V.setZero(d, d);
  V.diagonal().head(n) = s * W.rowwise().sum();
  V.diagonal().tail(n - 1) = s * W.colwise().sum().head(n - 1).transpose();
  V.topRightCorner(n, n - 1) = s * W.leftCols(n - 1);
  V.bottomLeftCorner(n - 1, n) = V.topRightCorner(n, n - 1).transpose();
}

struct WeightedTargets {
  Eigen::VectorXd dbar;  // length n
  Eigen::VectorXd bbar;  // length n-1
  double kappa = 0.0;
};

WeightedTargets weighted_targets(const DynamicNetwork& net,
                                 const Eigen::VectorXd& w) {
  WeightedTargets tg;
  tg.kappa = w.sum();
  tg.dbar = net.out_degree_rows().transpose() * w;
  const Eigen::VectorXd bfull = net.in_degree_rows().transpose() * w;
  tg.bbar = bfull.head(net.n() - 1);
  return tg;
}

void check_time(const DynamicNetwork& net, double t) {
  if (!(t >= net.window_a() && t <= net.window_b()))
    throw ConfigError("evaluation time outside the observation window");
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> smoothed_degrees(
    const DynamicNetwork& net, double t, double h, const KernelSpec& spec) {
  check_time(net, t);
  const Eigen::VectorXd w = kernel_weights(net, t, h, spec);
  return {net.out_degree_rows().transpose() * w,
          net.in_degree_rows().transpose() * w};
}

Eigen::VectorXd residual(const DynamicNetwork& net, double t,
                         const ParamVector& theta, double h,
                         const KernelSpec& spec) {
  check_time(net, t);
  if (theta.n() != net.n())
    throw ConfigError("residual: parameter size must match the network");
  const Eigen::VectorXd w = kernel_weights(net, t, h, spec);
  const WeightedTargets tg = weighted_targets(net, w);
  Eigen::MatrixXd P, W;
  edge_prob_matrices(theta.alpha(), theta.beta(), P, W);
  return equations(tg.dbar, tg.bbar, tg.kappa, P);
}

StructuredJacobian v0_matrix(const ParamVector& theta) {
  const int n = theta.n();
  Eigen::MatrixXd P, W;
  edge_prob_matrices(theta.alpha(), theta.beta(), P, W);
  const double s = 1.0 / n;
  return StructuredJacobian(s * W.rowwise().sum(),
                            s * W.colwise().sum().head(n - 1).transpose(),
                            s * W.leftCols(n - 1));
}

StructuredJacobian jacobian(const DynamicNetwork& net, double t,
                            const ParamVector& theta, double h,
                            const KernelSpec& spec) {
  check_time(net, t);
  if (theta.n() != net.n())
    throw ConfigError("jacobian: parameter size must match the network");
  const double fhat = density_estimate(net, t, h, spec);
  return v0_matrix(theta).scaled(fhat);
}

FitReport solve_weighted_equations(const Eigen::VectorXd& dbar,
                                   const Eigen::VectorXd& bbar, double kappa,
                                   double denom, const FitOptions& opts) {
  const Eigen::Index n = dbar.size();
  if (n < 2) throw ConfigError("solve_weighted_equations: needs n >= 2");
  if (bbar.size() != n - 1)
    throw ConfigError("solve_weighted_equations: bbar must have length n-1");
  if (!(denom > 0.0)) throw ConfigError("solve_weighted_equations: denom > 0");
  if (!(kappa > 0.0))
    throw NoDataError("solve_weighted_equations: no observation weight");

  const int d = static_cast<int>(2 * n - 1);
  FitReport report{ParamVector(static_cast<int>(n))};
  report.kernel_mass = kappa;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  if (opts.init) {
    if (opts.init->n() != n)
      throw ConfigError("solve_weighted_equations: init size mismatch");
    theta = opts.init->free();
  }

  // A solution exists only if every weighted degree sits strictly inside its
  // range (0, kappa (n-1)); a boundary target pushes the optimum to infinity.
  const double margin = 1e-9 * kappa;
  bool boundary = (dbar.array() <= 0.0).any() ||
                  (dbar.array() >= kappa * (n - 1) - margin).any() ||
                  (bbar.array() <= 0.0).any() ||
                  (bbar.array() >= kappa * (n - 1) - margin).any();

  // edge_prob_matrices wants the full beta (with the pinned zero appended)
  auto full_beta = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
    beta.head(n - 1) = th.tail(n - 1);
    return beta;
  };
  Eigen::MatrixXd P, W, Pt, Wt;
  edge_prob_matrices(theta.head(n), full_beta(theta), P, W);
  Eigen::VectorXd F = equations(dbar, bbar, kappa, P);
  double rn = F.cwiseAbs().maxCoeff() / denom;

  if (boundary) {
    report.theta = ParamVector(theta.head(n), full_beta(theta).head(n - 1));
    report.nonexistence = true;
    report.final_residual = rn;
    return report;
  }

  Eigen::MatrixXd V(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(d);
  const double s = kappa / denom;

  double best_rn = rn;
  int last_improve = 0;
  int iterations = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (rn <= opts.tol) break;

    build_system(W, s, V);
    llt.compute(V);
    if (llt.info() != Eigen::Success) {
      report.nonexistence = true;  // singular system, no unique root
      break;
    }
    const Eigen::VectorXd delta = llt.solve(F / denom);
    if (!delta.allFinite()) {
      report.nonexistence = true;
      break;
    }

    // Step halving on the residual sup-norm keeps it strictly decreasing.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial, Ft;
    double rnt = rn;
    for (int k = 0; k <= opts.max_halvings; ++k) {
      trial = theta + step * delta;
      edge_prob_matrices(trial.head(n), full_beta(trial), Pt, Wt);
      Ft = equations(dbar, bbar, kappa, Pt);
      rnt = Ft.cwiseAbs().maxCoeff() / denom;
      if (rnt < rn) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      report.nonexistence = true;  // stalled line search
      break;
    }

    theta = trial;
    P.swap(Pt);
    W.swap(Wt);
    F = Ft;
    rn = rnt;
    ++iterations;

    if (theta.cwiseAbs().maxCoeff() > opts.escape) {
      report.nonexistence = true;  // parameter escape
      break;
    }
    if (rn < best_rn * (1.0 - 1e-3)) {
      best_rn = rn;
      last_improve = iter;
    } else if (iter - last_improve >= opts.stagnation_window) {
      report.nonexistence = true;  // residual stagnation
      break;
    }
  }

  report.theta = ParamVector(theta.head(n), full_beta(theta).head(n - 1));
  report.iterations = iterations;
  report.final_residual = rn;
  report.converged = !report.nonexistence && rn <= opts.tol;
  return report;
}

FitReport newton_solve(const DynamicNetwork& net, double t, double h,
                       const FitOptions& opts, const KernelSpec& spec) {
  check_time(net, t);
  const Eigen::VectorXd w = kernel_weights(net, t, h, spec);
  const WeightedTargets tg = weighted_targets(net, w);
  if (!(tg.kappa > 0.0))
    throw NoDataError("newton_solve: no snapshot carries kernel weight at t");
  const double denom = static_cast<double>(net.size()) * net.n();
  return solve_weighted_equations(tg.dbar, tg.bbar, tg.kappa, denom, opts);
}

TrajectoryFit fit_trajectory(const DynamicNetwork& net,
                             const std::vector<double>& grid, double h,
                             const FitOptions& opts, const KernelSpec& spec) {
  if (grid.empty()) throw ConfigError("fit_trajectory: empty grid");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!(grid[g] >= net.window_a() && grid[g] <= net.window_b()))
      throw ConfigError("fit_trajectory: grid point outside the window");
    if (g > 0 && !(grid[g - 1] < grid[g]))
      throw ConfigError("fit_trajectory: grid must be strictly increasing");
  }

  std::vector<FitReport> reports(grid.size(), FitReport{ParamVector(net.n())});
  parallel_chunks(grid.size(), kFitChunk, [&](std::size_t b, std::size_t e) {
    FitOptions local = opts;
    for (std::size_t g = b; g < e; ++g) {
      if (g > b && reports[g - 1].converged && !reports[g - 1].nonexistence)
        local.init = reports[g - 1].theta;
      else
        local.init = opts.init;
      reports[g] = newton_solve(net, grid[g], h, local, spec);
    }
  });

  ParamTrajectory traj;
  traj.grid = grid;
  traj.provenance = Provenance::Smoothed;
  traj.params.reserve(grid.size());
  for (const auto& r : reports) traj.params.push_back(r.theta);
  traj.check();
  return {std::move(traj), std::move(reports)};
}

std::vector<double> default_grid(const DynamicNetwork& net, int equispaced) {
  if (equispaced < 2) throw ConfigError("default_grid: needs >= 2 grid points");
  std::set<double> pts(net.times().begin(), net.times().end());
  const double a = net.window_a();
  const double b = net.window_b();
  for (int k = 0; k < equispaced; ++k)
    pts.insert(a + (b - a) * k / (equispaced - 1));
  return {pts.begin(), pts.end()};
}

PointwiseFit pointwise_fit(const DynamicNetwork& net, const FitOptions& opts) {
  const int N = net.size();
  const int n = net.n();
  PointwiseFit pw;
  pw.times = net.times();
  pw.reports.assign(N, FitReport{ParamVector(n)});

  parallel_chunks(N, kFitChunk, [&](std::size_t b, std::size_t e) {
    FitOptions local = opts;
    for (std::size_t l = b; l < e; ++l) {
      if (l > b && pw.reports[l - 1].converged && !pw.reports[l - 1].nonexistence)
        local.init = pw.reports[l - 1].theta;
      else
        local.init = opts.init;
      const Eigen::VectorXd dbar = net.out_degree_rows().row(l).transpose();
      const Eigen::VectorXd bbar =
          net.in_degree_rows().row(l).head(n - 1).transpose();
      pw.reports[l] = solve_weighted_equations(dbar, bbar, 1.0, n, local);
    }
  });
  return pw;
}

SmoothedPointwiseFit smooth_pointwise(const PointwiseFit& pw, double h,
                                      const std::vector<double>& grid,
                                      const KernelSpec& spec) {
  if (!(h > 0.0)) throw ConfigError("smooth_pointwise: bandwidth must be positive");
  if (grid.empty()) throw ConfigError("smooth_pointwise: empty grid");
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (!(grid[g - 1] < grid[g]))
      throw ConfigError("smooth_pointwise: grid must be strictly increasing");

  std::vector<int> usable;
  for (std::size_t l = 0; l < pw.reports.size(); ++l)
    if (pw.reports[l].converged && !pw.reports[l].nonexistence)
      usable.push_back(static_cast<int>(l));

  SmoothedPointwiseFit out;
  out.grid = grid;
  out.params.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double kappa = 0.0;
    Eigen::VectorXd acc;
    for (int l : usable) {
      const double w = kernel_eval(spec, (grid[g] - pw.times[l]) / h) / h;
      if (w <= 0.0) continue;
      const Eigen::VectorXd th = pw.reports[l].theta.free();
      if (acc.size() == 0) acc = Eigen::VectorXd::Zero(th.size());
      acc += w * th;
      kappa += w;
    }
    if (kappa > 0.0)
      out.params[g] = ParamVector::from_free(acc / kappa);
    else
      ++out.gaps;
  }
  return out;
}

ParamTrajectory SmoothedPointwiseFit::trajectory() const {
  ParamTrajectory traj;
  traj.grid = grid;
  traj.provenance = Provenance::SmoothedPointWise;
  for (std::size_t g = 0; g < params.size(); ++g) {
    if (!params[g])
      throw DataError("smoothed point-wise trajectory has a gap at grid point " +
                      std::to_string(g + 1));
    traj.params.push_back(*params[g]);
  }
  traj.check();
  return traj;
}

FitReport one_sided_fit(const DynamicNetwork& net, double t, double h, Side side,
                        const FitOptions& opts, const KernelSpec& spec) {
  check_time(net, t);
  Eigen::VectorXd w = kernel_weights(net, t, h, spec);
  for (int l = 0; l < net.size(); ++l) {
    const bool keep = side == Side::Right ? net.time(l) >= t : net.time(l) < t;
    if (!keep) w[l] = 0.0;
  }
  const WeightedTargets tg = weighted_targets(net, w);
  if (!(tg.kappa > 0.0))
    throw NoDataError("one_sided_fit: no snapshots on the requested side of t");
  const double denom = static_cast<double>(net.size()) * net.n();
  FitReport report = solve_weighted_equations(tg.dbar, tg.bbar, tg.kappa, denom, opts);
  return report;
}

ChangePointScan change_point_scan(const DynamicNetwork& net, double h,
                                  double a1, double b1,
                                  const std::vector<double>& grid,
                                  const FitOptions& opts, const KernelSpec& spec) {
  if (!(a1 < b1)) throw ConfigError("change_point_scan: needs a1 < b1");
  if (a1 - net.window_a() < h || net.window_b() - b1 < h)
    throw ConfigError(
        "change_point_scan: scan interval needs a margin of h inside the window");
  if (grid.empty()) throw ConfigError("change_point_scan: empty grid");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g] < a1 || grid[g] > b1)
      throw ConfigError("change_point_scan: grid point outside [a1, b1]");
    if (g > 0 && !(grid[g - 1] < grid[g]))
      throw ConfigError("change_point_scan: grid must be strictly increasing");
  }

  const std::size_t G = grid.size();
  std::vector<double> gap(G, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> ok(G, 0);

  parallel_chunks(G, 8, [&](std::size_t b, std::size_t e) {
    FitOptions left_opts = opts;
    FitOptions right_opts = opts;
    for (std::size_t g = b; g < e; ++g) {
      FitReport left{ParamVector(net.n())};
      FitReport right{ParamVector(net.n())};
      bool good = true;
      try {
        left = one_sided_fit(net, grid[g], h, Side::Left, left_opts, spec);
        right = one_sided_fit(net, grid[g], h, Side::Right, right_opts, spec);
      } catch (const NoDataError&) {
        good = false;
      }
      good = good && left.converged && !left.nonexistence && right.converged &&
             !right.nonexistence;
      if (good) {
        gap[g] = (right.theta.free() - left.theta.free()).squaredNorm();
        ok[g] = 1;
        left_opts.init = left.theta;
        right_opts.init = right.theta;
      } else {
        left_opts.init = opts.init;
        right_opts.init = opts.init;
      }
    }
  });

  ChangePointScan out;
  out.grid = grid;
  out.gap = std::move(gap);
  int best = -1;
  for (std::size_t g = 0; g < G; ++g) {
    if (!ok[g]) {
      out.skipped.push_back(static_cast<int>(g));
      continue;
    }
    if (best < 0 || out.gap[g] > out.gap[static_cast<std::size_t>(best)])
      best = static_cast<int>(g);
  }
  if (best < 0)
    throw DataError("change_point_scan: no scan point had both one-sided fits");
  out.t_hat = grid[static_cast<std::size_t>(best)];
  return out;
}

}  // namespace tvbeta
