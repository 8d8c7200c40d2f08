#include "tvbeta/bandwidth.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "tvbeta/parallel.hpp"

namespace tvbeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd loo_weights(const DynamicNetwork& net, int l, double h,
                            const KernelSpec& spec) {
  Eigen::VectorXd w = kernel_weights(net, net.time(l), h, spec);
  w[l] = 0.0;
  return w;
}

FitReport loo_fit_impl(const DynamicNetwork& net, int l, double h,
                       const FitOptions& opts, const KernelSpec& spec) {
  const Eigen::VectorXd w = loo_weights(net, l, h, spec);
  const double kappa = w.sum();
  if (!(kappa > 0.0))
    throw NoDataError("loo_fit: no other snapshot carries kernel weight");
  const int n = net.n();
  const Eigen::VectorXd dbar = net.out_degree_rows().transpose() * w;
  const Eigen::VectorXd bbar =
      (net.in_degree_rows().transpose() * w).head(n - 1);
  const double denom = static_cast<double>(net.size()) * n;
  return solve_weighted_equations(dbar, bbar, kappa, denom, opts);
}

// || A(T_l) - W_hat ||_F^2 for the fitted effects.
double holdout_loss(const DynamicNetwork& net, int l, const ParamVector& theta) {
  const int n = net.n();
  const Adjacency& A = net.snapshot(l);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ai = theta.alpha(i);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = static_cast<double>(A(i, j)) - logistic(ai + theta.beta(j));
      loss += r * r;
    }
  }
  return loss;
}

}  // namespace

FitReport loo_fit(const DynamicNetwork& net, int l, double h,
                  const FitOptions& opts, const KernelSpec& spec) {
  if (l < 0 || l >= net.size())
    throw ConfigError("loo_fit: snapshot index out of range");
  return loo_fit_impl(net, l, h, opts, spec);
}

CvResult loo_cv(const DynamicNetwork& net, const std::vector<double>& h_grid,
                const CvOptions& opts, const KernelSpec& spec) {
  if (h_grid.empty()) throw ConfigError("loo_cv: empty bandwidth grid");
  for (double h : h_grid)
    if (!(h > 0.0)) throw ConfigError("loo_cv: bandwidths must be positive");

  const std::size_t N = static_cast<std::size_t>(net.size());
  const std::size_t H = h_grid.size();

  // One cell per (candidate, snapshot); chunks never span two candidates so
  // warm starts stay within one bandwidth.
  std::vector<double> terms(H * N, kInf);
  std::vector<char> failed(H * N, 0);
  constexpr std::size_t kCvChunk = 32;

  parallel_chunks(H * N, kCvChunk, [&](std::size_t b, std::size_t e) {
    FitOptions local = opts.fit;
    std::optional<ParamVector> warm;
    std::size_t warm_h = SIZE_MAX;
    for (std::size_t idx = b; idx < e; ++idx) {
      const std::size_t hi = idx / N;
      const int l = static_cast<int>(idx % N);
      if (hi != warm_h) warm.reset();  // never carry a start across bandwidths
      local.init = warm ? warm : opts.fit.init;
      bool ok = true;
      FitReport rep{ParamVector(net.n())};
      try {
        rep = loo_fit_impl(net, l, h_grid[hi], local, spec);
      } catch (const NoDataError&) {
        ok = false;
      }
      ok = ok && rep.converged && !rep.nonexistence;
      if (ok) {
        terms[idx] = holdout_loss(net, l, rep.theta);
        failed[idx] = 0;
        warm = rep.theta;
        warm_h = hi;
      } else {
        terms[idx] = 0.0;
        failed[idx] = 1;
        warm.reset();
      }
    }
  });

  CvResult out;
  out.grid = h_grid;
  out.losses.assign(H, 0.0);
  out.failures.assign(H, 0);
  for (std::size_t hi = 0; hi < H; ++hi) {
    double sum = 0.0;
    int fails = 0;
    for (std::size_t l = 0; l < N; ++l) {
      if (failed[hi * N + l])
        ++fails;
      else
        sum += terms[hi * N + l];
    }
    out.failures[hi] = fails;
    if (fails == 0) {
      out.losses[hi] = sum;
    } else if (opts.policy == CvFailurePolicy::SkipRenormalize &&
               fails < static_cast<int>(N)) {
      out.losses[hi] = sum * static_cast<double>(N) / (N - fails);
    } else {
      out.losses[hi] = kInf;
    }
  }

  int best = -1;
  for (std::size_t hi = 0; hi < H; ++hi) {
    if (!std::isfinite(out.losses[hi])) continue;
    if (best < 0 || out.losses[hi] < out.losses[static_cast<std::size_t>(best)] ||
        (out.losses[hi] == out.losses[static_cast<std::size_t>(best)] &&
         h_grid[hi] < h_grid[static_cast<std::size_t>(best)]))
      best = static_cast<int>(hi);
  }
  if (best < 0)
    throw DataError("loo_cv: every bandwidth candidate failed");
  out.h_opt = h_grid[static_cast<std::size_t>(best)];
  return out;
}

std::vector<double> default_h_grid() {
  std::vector<double> grid(26);
  for (int k = 0; k < 26; ++k) grid[static_cast<std::size_t>(k)] = 0.05 + 0.01 * k;
  return grid;
}

double rate_bandwidth(int n, int N, int n0, int N0, double h0) {
  if (n < 2 || N < 1 || n0 < 2 || N0 < 1 || !(h0 > 0.0))
    throw ConfigError("rate_bandwidth: invalid design sizes");
  return h0 * std::pow(static_cast<double>(n0) * N0 /
                           (static_cast<double>(n) * N),
                       0.2);
}

}  // namespace tvbeta
