#include "tvbeta/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "tvbeta/kernel.hpp"
#include "tvbeta/parallel.hpp"
#include "tvbeta/rng.hpp"
#include "tvbeta/stats.hpp"
#include "tvbeta/structured_jacobian.hpp"

namespace tvbeta {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Node i (0-based) -> block 0..3: equal quarters, with every node past the
// third boundary (the last receiver included) folded into the final block.
int block_of(int i, int n) { return std::min(3, i / (n / 4)); }

double benchmark_alpha(int blk, double t) {
  switch (blk) {
    case 0: return -0.8 * (3.0 * t - 0.6);
    case 1: return -3.6 * (t - 0.3) * (t - 0.3) / (t - 3.0);
    case 2: return -std::pow(0.4, t);
    default: return -3.2 * (t - 0.5) * (t - 0.5) / (1.0 + t * t);
  }
}

double benchmark_beta(int blk, double t) {
  switch (blk) {
    case 0: return 2.0 * (t - 0.5) * (t - 0.5) / (t - 2.0);
    case 1: {
      const double c = t - 0.3;
      return -1.6 * t * c * c * c + (t - 0.2) * (t - 0.2) + 0.2 * t;
    }
    case 2: return -1.8 * (t + 0.6) * std::sin(0.2 * kPi * t);
    default: return -1.6 * (t - 0.2) * (t - 0.2) * std::sin(kPi * t);
  }
}

double sparse_alpha(int blk, double t) {
  switch (blk) {
    case 0: return -2.0 * (3.0 * t - 0.6);
    case 1: return -8.0 * (t - 0.6) * (t - 0.6) / (t - 3.0);
    case 2: return -std::pow(2.0, t);
    default: return -4.2 * (t - 0.5) * (t - 0.5) / (1.0 + t * t);
  }
}

double sparse_beta(int blk, double t) {
  switch (blk) {
    case 0: return -6.0 * (t - 0.5) * (t - 0.5) / (t - 2.0);
    case 1: {
      const double c = t - 0.3;
      return -2.0 * c * c * c + (t - 0.2) * (t - 0.2) + 0.2 * t;
    }
    case 2: return -4.0 * (t + 0.8) * std::sin(0.2 * kPi * t);
    default: return -5.0 * (t - 0.2) * (t - 0.2) * std::sin(0.2 * kPi * t);
  }
}

ParamFamily block_family(int n, std::string name, double (*alpha)(int, double),
                         double (*beta)(int, double)) {
  if (n < 8 || n % 4 != 0)
    throw ConfigError("block curve families need n divisible by 4 and n >= 8");
  TruthFn fn = [n, alpha, beta](double t) {
    Eigen::VectorXd a(n), b(n - 1);
    for (int i = 0; i < n; ++i) a[i] = alpha(block_of(i, n), t);
    for (int j = 0; j + 1 < n; ++j) b[j] = beta(block_of(j, n), t);
    return ParamVector(std::move(a), std::move(b));
  };
  return ParamFamily::custom(n, std::move(fn), std::move(name));
}

}  // namespace

ParamFamily::ParamFamily(int n, TruthFn fn, std::string name)
    : n_(n), fn_(std::move(fn)), name_(std::move(name)) {
  if (n_ < 2) throw ConfigError("parameter family needs n >= 2");
  if (!fn_) throw ConfigError("parameter family needs a curve function");
}

ParamFamily ParamFamily::benchmark(int n) {
  return block_family(n, "benchmark", benchmark_alpha, benchmark_beta);
}

ParamFamily ParamFamily::sparse(int n) {
  return block_family(n, "sparse", sparse_alpha, sparse_beta);
}

ParamFamily ParamFamily::constant(int n, double c) {
  Eigen::VectorXd a = Eigen::VectorXd::Constant(n, c);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(n - 1, c);
  return fixed(ParamVector(std::move(a), std::move(b)));
}

ParamFamily ParamFamily::fixed(ParamVector theta) {
  const int n = theta.n();
  TruthFn fn = [theta = std::move(theta)](double) { return theta; };
  return ParamFamily(n, std::move(fn), "fixed");
}

ParamFamily ParamFamily::custom(int n, TruthFn fn, std::string name) {
  return ParamFamily(n, std::move(fn), std::move(name));
}

DynamicNetwork generate(const SimDesign& design, const ParamFamily& family,
                        int replicate) {
  if (design.n != family.n())
    throw ConfigError("generate: design and family disagree on n");
  if (design.N < 1) throw ConfigError("generate: need at least one snapshot");
  if (!(design.a < design.b)) throw ConfigError("generate: empty window");
  SplitMix64 rng =
      substream(design.seed, static_cast<std::uint64_t>(replicate));

  std::vector<double> times(static_cast<std::size_t>(design.N));
  for (double& t : times) t = rng.uniform(design.a, design.b);
  std::sort(times.begin(), times.end());

  const int n = design.n;
  std::vector<Adjacency> snaps;
  snaps.reserve(times.size());
  for (double t : times) {
    const ParamVector theta = family.eval(t);
    Adjacency A = Adjacency::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const double ai = theta.alpha(i);
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        A(i, j) = rng.bernoulli(logistic(ai + theta.beta(j))) ? 1 : 0;
      }
    }
    snaps.push_back(std::move(A));
  }
  return DynamicNetwork(std::move(times), std::move(snaps), design.a, design.b);
}

RmseResult rmse(const ParamTrajectory& est, const ParamFamily& family,
                const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("rmse: no evaluation times");
  const int dim = 2 * family.n() - 1;
  double total = 0.0;
  for (double t : times) {
    const auto it = std::lower_bound(est.grid.begin(), est.grid.end(), t);
    if (it == est.grid.end() || *it != t)
      throw ConfigError("rmse: evaluation time missing from the fit grid");
    const std::size_t g = static_cast<std::size_t>(it - est.grid.begin());
    total += (est.params[g].free() - family.eval(t).free()).squaredNorm();
  }
  RmseResult out;
  out.summed = std::sqrt(total / static_cast<double>(times.size()));
  out.per_coordinate = out.summed / std::sqrt(static_cast<double>(dim));
  return out;
}

std::vector<BiasSdRow> bias_sd_table(const SimDesign& design,
                                     const ParamFamily& family,
                                     const std::vector<double>& ts,
                                     const std::vector<int>& nodes,
                                     const std::vector<Provenance>& methods,
                                     const FitOptions& opts,
                                     const KernelSpec& spec) {
  if (ts.empty() || nodes.empty() || methods.empty())
    throw ConfigError("bias_sd_table: empty times, nodes or methods");
  for (Provenance m : methods)
    if (m == Provenance::Truth)
      throw ConfigError("bias_sd_table: truth is not an estimation method");
  for (int v : nodes)
    if (v < 0 || v >= design.n)
      throw ConfigError("bias_sd_table: node index out of range");
  if (design.reps < 2)
    throw ConfigError("bias_sd_table: need at least two replicates");

  const std::size_t R = static_cast<std::size_t>(design.reps);
  const std::size_t S = ts.size();
  const std::size_t M = methods.size();
  const std::size_t V = nodes.size();

  const bool want_spw =
      std::find(methods.begin(), methods.end(),
                Provenance::SmoothedPointWise) != methods.end();

  // vals[(m * S + s)] : R x V, row r valid iff ok[(m * S + s)][r]
  std::vector<Eigen::MatrixXd> va(M * S, Eigen::MatrixXd::Zero(R, V));
  std::vector<Eigen::MatrixXd> vb(M * S, Eigen::MatrixXd::Zero(R, V));
  std::vector<std::vector<char>> ok(M * S, std::vector<char>(R, 0));

  parallel_chunks(R, 4, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const DynamicNetwork net = generate(design, family, static_cast<int>(r));

      // shared point-wise sweep when any point-wise flavour is requested
      PointwiseFit pw;
      std::map<int, FitReport> nearest_fit;
      if (want_spw) pw = pointwise_fit(net, opts);

      for (std::size_t m = 0; m < M; ++m) {
        switch (methods[m]) {
          case Provenance::Smoothed: {
            FitOptions local = opts;
            for (std::size_t s = 0; s < S; ++s) {
              const FitReport rep =
                  newton_solve(net, ts[s], design.h, local, spec);
              if (rep.converged && !rep.nonexistence) {
                for (std::size_t k = 0; k < V; ++k) {
                  va[m * S + s](r, k) = rep.theta.alpha(nodes[k]);
                  vb[m * S + s](r, k) = rep.theta.beta(nodes[k]);
                }
                ok[m * S + s][r] = 1;
                local.init = rep.theta;
              } else {
                local.init = opts.init;
              }
            }
            break;
          }
          case Provenance::PointWise: {
            for (std::size_t s = 0; s < S; ++s) {
              // observation time nearest to ts[s], earlier index on ties
              int l = 0;
              double best = std::abs(net.time(0) - ts[s]);
              for (int c = 1; c < net.size(); ++c) {
                const double d = std::abs(net.time(c) - ts[s]);
                if (d < best) { best = d; l = c; }
              }
              const FitReport* rep = nullptr;
              if (want_spw) {
                rep = &pw.reports[static_cast<std::size_t>(l)];
              } else {
                auto it = nearest_fit.find(l);
                if (it == nearest_fit.end()) {
                  const Eigen::VectorXd dbar =
                      net.out_degree_rows().row(l).transpose();
                  const Eigen::VectorXd bbar =
                      net.in_degree_rows().row(l).head(net.n() - 1).transpose();
                  it = nearest_fit
                           .emplace(l, solve_weighted_equations(
                                           dbar, bbar, 1.0,
                                           static_cast<double>(net.n()), opts))
                           .first;
                }
                rep = &it->second;
              }
              if (rep->converged && !rep->nonexistence) {
                for (std::size_t k = 0; k < V; ++k) {
                  va[m * S + s](r, k) = rep->theta.alpha(nodes[k]);
                  vb[m * S + s](r, k) = rep->theta.beta(nodes[k]);
                }
                ok[m * S + s][r] = 1;
              }
            }
            break;
          }
          case Provenance::SmoothedPointWise: {
            const SmoothedPointwiseFit sp =
                smooth_pointwise(pw, design.h, ts, spec);
            for (std::size_t s = 0; s < S; ++s) {
              if (sp.params[s]) {
                for (std::size_t k = 0; k < V; ++k) {
                  va[m * S + s](r, k) = sp.params[s]->alpha(nodes[k]);
                  vb[m * S + s](r, k) = sp.params[s]->beta(nodes[k]);
                }
                ok[m * S + s][r] = 1;
              }
            }
            break;
          }
          case Provenance::Truth:
            break;  // rejected above
        }
      }
    }
  });

  std::vector<BiasSdRow> rows;
  rows.reserve(M * S * V);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t s = 0; s < S; ++s) {
      const ParamVector truth = family.eval(ts[s]);
      int used = 0;
      for (std::size_t r = 0; r < R; ++r) used += ok[m * S + s][r];
      for (std::size_t k = 0; k < V; ++k) {
        BiasSdRow row;
        row.method = methods[m];
        row.t = ts[s];
        row.node = nodes[k];
        row.used = used;
        row.excluded = static_cast<int>(R) - used;
        double ma = 0.0, mb = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          if (!ok[m * S + s][r]) continue;
          ma += va[m * S + s](r, k);
          mb += vb[m * S + s](r, k);
        }
        if (used > 0) { ma /= used; mb /= used; }
        double sa = 0.0, sb = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          if (!ok[m * S + s][r]) continue;
          sa += (va[m * S + s](r, k) - ma) * (va[m * S + s](r, k) - ma);
          sb += (vb[m * S + s](r, k) - mb) * (vb[m * S + s](r, k) - mb);
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.alpha_bias = used > 0 ? ma - truth.alpha(nodes[k]) : nan;
        row.beta_bias = used > 0 ? mb - truth.beta(nodes[k]) : nan;
        row.alpha_sd = used > 1 ? std::sqrt(sa / (used - 1)) : nan;
        row.beta_sd = used > 1 ? std::sqrt(sb / (used - 1)) : nan;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

NormalityDiag normality_diag(const SimDesign& design, const ParamFamily& family,
                             double t, const std::vector<int>& coords, int reps,
                             const FitOptions& opts, const KernelSpec& spec) {
  if (reps < 1) throw ConfigError("normality_diag: need at least one replicate");
  if (coords.empty()) throw ConfigError("normality_diag: no coordinates");
  const int dim = 2 * design.n - 1;
  for (int q : coords)
    if (q < 0 || q >= dim)
      throw ConfigError("normality_diag: coordinate index out of range");

  const ParamVector truth = family.eval(t);
  const double f = 1.0 / (design.b - design.a);  // uniform sampling law
  const TheoreticalBias bias =
      theoretical_bias(family.truth(), t, f, 0.0, design.a, design.b);
  const KernelMoments mom = moments(spec);

  const StructuredJacobian Vbar = v0_matrix(truth).scaled(f);
  const Eigen::MatrixXd S = approx_inverse(Vbar);
  const Eigen::MatrixXd Sigma = S * Vbar.dense() * S.transpose();

  const double rate =
      std::sqrt(static_cast<double>(design.N) * design.n * design.h);
  const Eigen::VectorXd shift = mom.k21 * design.h * design.h * bias.mu;
  const Eigen::VectorXd truth_free = truth.free();

  const std::size_t R = static_cast<std::size_t>(reps);
  Eigen::MatrixXd raw(R, coords.size());      // sqrt(Nnh) (theta_hat - theta*)
  std::vector<char> ok(R, 0);

  parallel_chunks(R, 4, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const DynamicNetwork net = generate(design, family, static_cast<int>(r));
      const FitReport rep = newton_solve(net, t, design.h, opts, spec);
      if (!rep.converged || rep.nonexistence) continue;
      const Eigen::VectorXd dev = rep.theta.free() - truth_free;
      for (std::size_t k = 0; k < coords.size(); ++k)
        raw(r, k) = rate * dev[coords[k]];
      ok[r] = 1;
    }
  });

  NormalityDiag out;
  out.failed = 0;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < R; ++r) {
    if (ok[r]) keep.push_back(r);
    else ++out.failed;
  }
  if (keep.empty()) throw DataError("normality_diag: every replicate failed");

  const std::size_t G = keep.size();
  out.z.resize(G, coords.size());
  Eigen::MatrixXd z_raw(G, coords.size());
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const int q = coords[k];
      const double sd = std::sqrt(mom.k02 * Sigma(q, q));
      z_raw(g, k) = raw(keep[g], k) / sd;
      out.z(g, k) = (raw(keep[g], k) - rate * shift[q]) / sd;
    }
  }
  out.mean_corrected = out.z.colwise().mean().transpose();
  out.mean_uncorrected = z_raw.colwise().mean().transpose();

  out.ks.resize(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) {
    std::vector<double> col(G);
    for (std::size_t g = 0; g < G; ++g) col[g] = out.z(g, k);
    out.ks[k] = ks_normal(std::move(col));
  }

  out.ellipse_coverage = std::numeric_limits<double>::quiet_NaN();
  if (coords.size() >= 2) {
    Eigen::Matrix2d C;
    C << Sigma(coords[0], coords[0]), Sigma(coords[0], coords[1]),
        Sigma(coords[1], coords[0]), Sigma(coords[1], coords[1]);
    C *= mom.k02;
    const Eigen::Matrix2d Cinv = C.inverse();
    int inside = 0;
    for (std::size_t g = 0; g < G; ++g) {
      Eigen::Vector2d y(raw(keep[g], 0) - rate * shift[coords[0]],
                        raw(keep[g], 1) - rate * shift[coords[1]]);
      if (y.dot(Cinv * y) <= 9.0) ++inside;
    }
    out.ellipse_coverage = static_cast<double>(inside) / static_cast<double>(G);
  }
  return out;
}

double q_diagnostic(const ParamFamily& family, double a, double b,
                    int grid_size) {
  if (!(a < b)) throw ConfigError("q_diagnostic: empty window");
  if (grid_size < 2) throw ConfigError("q_diagnostic: need at least two grid points");
  const int n = family.n();
  double worst = 0.0;
  for (int g = 0; g < grid_size; ++g) {
    const double t = a + (b - a) * g / (grid_size - 1);
    const ParamVector theta = family.eval(t);
    double extreme = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        extreme = std::max(extreme, std::abs(theta.alpha(i) + theta.beta(j)));
      }
    }
    worst = std::max(worst, 2.0 + 2.0 * std::cosh(extreme));
  }
  return worst;
}

}  // namespace tvbeta
