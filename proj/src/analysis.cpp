#include "tvbeta/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvbeta/errors.hpp"

namespace tvbeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Curve values as an n x L matrix (rows = nodes, columns = grid points).
Eigen::MatrixXd curve_matrix(const ParamTrajectory& traj, CurveKind kind) {
  const int n = traj.n();
  const int L = static_cast<int>(traj.grid.size());
  Eigen::MatrixXd X(n, L);
  for (int g = 0; g < L; ++g)
    for (int i = 0; i < n; ++i)
      X(i, g) = kind == CurveKind::Alpha ? traj.params[static_cast<std::size_t>(g)].alpha(i)
                                         : traj.params[static_cast<std::size_t>(g)].beta(i);
  return X;
}

Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid) {
  const int L = static_cast<int>(grid.size());
  Eigen::VectorXd w(L);
  w[0] = (grid[1] - grid[0]) / 2.0;
  for (int g = 1; g + 1 < L; ++g)
    w[g] = (grid[static_cast<std::size_t>(g) + 1] -
            grid[static_cast<std::size_t>(g) - 1]) /
           2.0;
  w[L - 1] = (grid[static_cast<std::size_t>(L) - 1] -
              grid[static_cast<std::size_t>(L) - 2]) /
             2.0;
  return w;
}

void check_square(const TrajectoryDistance& dist) {
  if (dist.D.rows() < 2 || dist.D.rows() != dist.D.cols())
    throw ConfigError("distance matrix must be square with n >= 2");
}

// Deterministic PAM seeding + swap phase; labels are medoid list indices.
std::vector<int> pam_assign(const Eigen::MatrixXd& D,
                            const std::vector<int>& medoids) {
  const int n = static_cast<int>(D.rows());
  std::vector<int> lab(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    double best = kInf;
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      const double d = D(i, medoids[m]);
      if (d < best) {
        best = d;
        lab[static_cast<std::size_t>(i)] = static_cast<int>(m);
      }
    }
  }
  return lab;
}

double pam_cost(const Eigen::MatrixXd& D, const std::vector<int>& medoids) {
  const int n = static_cast<int>(D.rows());
  double cost = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = kInf;
    for (int m : medoids) best = std::min(best, D(i, m));
    cost += best;
  }
  return cost;
}

// 1..K labels in order of each cluster's first appearance over the points.
std::vector<int> relabel_first_occurrence(const std::vector<int>& raw, int K) {
  std::vector<int> map(static_cast<std::size_t>(K), 0);
  std::vector<int> out(raw.size(), 0);
  int next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    int& slot = map[static_cast<std::size_t>(raw[i])];
    if (slot == 0) slot = ++next;
    out[i] = slot;
  }
  return out;
}

}  // namespace

TrajectoryDistance trajectory_distance(const ParamTrajectory& traj,
                                       CurveKind kind) {
  if (traj.grid.size() < 2)
    throw ConfigError("trajectory_distance: need at least two grid points");
  traj.check();

  const Eigen::MatrixXd X = curve_matrix(traj, kind);
  const Eigen::VectorXd w = trapezoid_weights(traj.grid);

  // D_ij^2 = q_i + q_j - 2 S_ij with S the weighted Gram matrix.
  const Eigen::MatrixXd S = X * w.asDiagonal() * X.transpose();
  const Eigen::VectorXd q = S.diagonal();
  const int n = static_cast<int>(X.rows());

  TrajectoryDistance out;
  out.kind = kind;
  out.grid = traj.grid;
  out.D.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d2 = std::max(0.0, q[i] + q[j] - 2.0 * S(i, j));
      const double d = std::sqrt(d2);
      out.D(i, j) = d;
      out.D(j, i) = d;
    }
  }
  return out;
}

Eigen::MatrixXd mds_embed(const TrajectoryDistance& dist, int dim) {
  check_square(dist);
  const int n = static_cast<int>(dist.D.rows());
  if (dim < 1 || dim > n)
    throw ConfigError("mds_embed: dimension must lie in [1, n]");

  const Eigen::MatrixXd D2 = dist.D.array().square().matrix();
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd B = -0.5 * J * D2 * J;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success)
    throw SingularError("mds_embed: eigendecomposition failed");

  Eigen::MatrixXd coords(n, dim);
  for (int k = 0; k < dim; ++k) {
    const int col = n - 1 - k;  // eigenvalues ascend; take the top ones
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    for (int i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    coords.col(k) = v * std::sqrt(std::max(eig.eigenvalues()[col], 0.0));
  }
  return coords;
}

std::vector<int> cluster(const TrajectoryDistance& dist, int K) {
  check_square(dist);
  const Eigen::MatrixXd& D = dist.D;
  const int n = static_cast<int>(D.rows());
  if (K < 1 || K > n) throw ConfigError("cluster: K must lie in [1, n]");

  if (K == n) {
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lab[static_cast<std::size_t>(i)] = i + 1;
    return lab;
  }

  // Seed: total-distance minimizer, then max-min additions.
  std::vector<int> medoids;
  {
    int first = 0;
    double best = kInf;
    for (int i = 0; i < n; ++i) {
      const double tot = D.row(i).sum();
      if (tot < best) {
        best = tot;
        first = i;
      }
    }
    medoids.push_back(first);
  }
  while (static_cast<int>(medoids.size()) < K) {
    int pick = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      if (std::find(medoids.begin(), medoids.end(), i) != medoids.end())
        continue;
      double near = kInf;
      for (int m : medoids) near = std::min(near, D(i, m));
      if (near > far) {
        far = near;
        pick = i;
      }
    }
    medoids.push_back(pick);
  }

  // Swap phase: apply the best strictly improving swap until none exists.
  double cost = pam_cost(D, medoids);
  for (;;) {
    double best_cost = cost;
    int best_m = -1, best_x = -1;
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      for (int x = 0; x < n; ++x) {
        if (std::find(medoids.begin(), medoids.end(), x) != medoids.end())
          continue;
        std::vector<int> trial = medoids;
        trial[m] = x;
        const double c = pam_cost(D, trial);
        if (c < best_cost - 1e-15) {
          best_cost = c;
          best_m = static_cast<int>(m);
          best_x = x;
        }
      }
    }
    if (best_m < 0) break;
    medoids[static_cast<std::size_t>(best_m)] = best_x;
    cost = best_cost;
  }

  return relabel_first_occurrence(pam_assign(D, medoids), K);
}

std::vector<int> cluster_kmeans_mds(const TrajectoryDistance& dist, int K,
                                    int dim) {
  check_square(dist);
  const int n = static_cast<int>(dist.D.rows());
  if (K < 1 || K > n) throw ConfigError("cluster: K must lie in [1, n]");
  dim = std::min(dim, n);

  const Eigen::MatrixXd X = mds_embed(dist, dim);

  // Same deterministic seeding as the medoid backend, in embedded space.
  std::vector<int> seeds;
  {
    int first = 0;
    double best = kInf;
    for (int i = 0; i < n; ++i) {
      double tot = 0.0;
      for (int j = 0; j < n; ++j) tot += (X.row(i) - X.row(j)).norm();
      if (tot < best) {
        best = tot;
        first = i;
      }
    }
    seeds.push_back(first);
  }
  while (static_cast<int>(seeds.size()) < K) {
    int pick = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      if (std::find(seeds.begin(), seeds.end(), i) != seeds.end()) continue;
      double near = kInf;
      for (int s : seeds) near = std::min(near, (X.row(i) - X.row(s)).norm());
      if (near > far) {
        far = near;
        pick = i;
      }
    }
    seeds.push_back(pick);
  }

  Eigen::MatrixXd centers(K, dim);
  for (int k = 0; k < K; ++k) centers.row(k) = X.row(seeds[static_cast<std::size_t>(k)]);

  std::vector<int> lab(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < 100; ++it) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      int bestk = 0;
      double best = kInf;
      for (int k = 0; k < K; ++k) {
        const double d = (X.row(i) - centers.row(k)).squaredNorm();
        if (d < best) {
          best = d;
          bestk = k;
        }
      }
      if (lab[static_cast<std::size_t>(i)] != bestk) {
        lab[static_cast<std::size_t>(i)] = bestk;
        moved = true;
      }
    }
    if (!moved && it > 0) break;
    for (int k = 0; k < K; ++k) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(dim);
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (lab[static_cast<std::size_t>(i)] == k) {
          mean += X.row(i);
          ++count;
        }
      }
      if (count > 0) {
        centers.row(k) = mean / count;
      } else {
        // re-seed an emptied cluster at the point farthest from its center
        int far_i = 0;
        double far = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (X.row(i) - centers.row(lab[static_cast<std::size_t>(i)])).norm();
          if (d > far) {
            far = d;
            far_i = i;
          }
        }
        centers.row(k) = X.row(far_i);
      }
    }
  }
  return relabel_first_occurrence(lab, K);
}

SelectKResult select_k(const TrajectoryDistance& dist, int k_max,
                       double threshold) {
  check_square(dist);
  const int n = static_cast<int>(dist.D.rows());
  if (k_max < 2 || k_max > n - 1)
    throw ConfigError("select_k: k_max must lie in [2, n-1]");

  SelectKResult out;
  if (dist.D.maxCoeff() <= 0.0) {
    out.degenerate = true;
    out.suggested = 1;
    return out;
  }

  for (int K = 2; K <= k_max; ++K) {
    const std::vector<int> lab = cluster(dist, K);
    double inter = 0.0, intra = 0.0;
    long ninter = 0, nintra = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (lab[static_cast<std::size_t>(i)] == lab[static_cast<std::size_t>(j)]) {
          intra += dist.D(i, j);
          ++nintra;
        } else {
          inter += dist.D(i, j);
          ++ninter;
        }
      }
    }
    double ratio;
    if (nintra == 0 || intra == 0.0) {
      ratio = ninter > 0 && inter > 0.0 ? kInf
                                        : std::numeric_limits<double>::quiet_NaN();
    } else {
      ratio = (inter / ninter) / (intra / nintra);
    }
    out.ks.push_back(K);
    out.ratios.push_back(ratio);
  }

  out.suggested = k_max;
  for (std::size_t k = 1; k < out.ratios.size(); ++k) {
    const double prev = out.ratios[k - 1];
    const double cur = out.ratios[k];
    if (std::isnan(prev) || std::isnan(cur)) continue;
    double improvement;
    if (std::isinf(prev)) {
      improvement = std::isinf(cur) ? 0.0 : -1.0;
    } else if (std::isinf(cur)) {
      improvement = kInf;
    } else {
      improvement = (cur - prev) / std::abs(prev);
    }
    if (improvement < threshold) {
      out.suggested = out.ks[k - 1];
      break;
    }
  }
  return out;
}

}  // namespace tvbeta
