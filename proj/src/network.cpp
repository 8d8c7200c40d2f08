#include "tvbeta/network.hpp"

#include <algorithm>
#include <numeric>

namespace tvbeta {

double edge_prob(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw ConfigError("edge_prob: effects must be finite");
  return logistic(a + b);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> degrees(const Adjacency& snapshot) {
  if (snapshot.rows() != snapshot.cols())
    throw ConfigError("degrees: snapshot must be square");
  const Eigen::MatrixXd m = snapshot.cast<double>();
  return {m.rowwise().sum(), m.colwise().sum().transpose()};
}

DynamicNetwork::DynamicNetwork(std::vector<double> times,
                               std::vector<Adjacency> snapshots,
                               double window_a, double window_b)
    : a_(window_a), b_(window_b) {
  if (times.size() != snapshots.size())
    throw ConfigError("DynamicNetwork: times and snapshots must align");
  if (times.empty()) throw ConfigError("DynamicNetwork: at least one snapshot");
  if (!(a_ < b_) || !std::isfinite(a_) || !std::isfinite(b_))
    throw ConfigError("DynamicNetwork: window must satisfy a < b, finite");
  n_ = static_cast<int>(snapshots.front().rows());
  if (n_ < 2) throw ConfigError("DynamicNetwork: needs at least two nodes");
  for (const auto& s : snapshots)
    if (s.rows() != n_ || s.cols() != n_)
      throw ConfigError("DynamicNetwork: all snapshots must be n x n");
  for (double t : times)
    if (!std::isfinite(t)) throw ConfigError("DynamicNetwork: non-finite time");

  // Sort jointly by time, stable so ties keep their input order.
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return times[i] < times[j]; });
  times_.reserve(times.size());
  snapshots_.reserve(times.size());
  for (std::size_t idx : order) {
    times_.push_back(times[idx]);
    snapshots_.push_back(std::move(snapshots[idx]));
  }

  const int N = size();
  out_deg_.resize(N, n_);
  in_deg_.resize(N, n_);
  for (int l = 0; l < N; ++l) {
    const Eigen::MatrixXd m = snapshots_[static_cast<std::size_t>(l)].cast<double>();
    out_deg_.row(l) = m.rowwise().sum().transpose();
    in_deg_.row(l) = m.colwise().sum();
  }
}

DynamicNetwork DynamicNetwork::from_edge_lists(
    int n, std::vector<double> times,
    const std::vector<std::vector<std::pair<int, int>>>& edges,
    double window_a, double window_b) {
  std::vector<Adjacency> snaps;
  snaps.reserve(edges.size());
  for (const auto& list : edges) {
    Adjacency a = Adjacency::Zero(n, n);
    for (const auto& [src, dst] : list) {
      if (src < 0 || src >= n || dst < 0 || dst >= n)
        throw DataError("from_edge_lists: node id out of range");
      a(src, dst) = 1;
    }
    snaps.push_back(std::move(a));
  }
  return DynamicNetwork(std::move(times), std::move(snaps), window_a, window_b);
}

std::vector<std::string> validate(const DynamicNetwork& net) {
  std::vector<std::string> violations;
  const int n = net.n();
  for (int l = 0; l < net.size(); ++l) {
    const Adjacency& s = net.snapshot(l);
    for (int i = 0; i < n; ++i) {
      if (s(i, i) != 0) {
        violations.push_back("snapshot " + std::to_string(l + 1) +
                             ": nonzero diagonal at node " + std::to_string(i + 1));
      }
      for (int j = 0; j < n; ++j) {
        if (s(i, j) > 1) {
          violations.push_back("snapshot " + std::to_string(l + 1) +
                               ": entry not in {0,1} at (" + std::to_string(i + 1) +
                               "," + std::to_string(j + 1) + ")");
        }
      }
    }
    const double t = net.time(l);
    if (t < net.window_a() || t > net.window_b()) {
      violations.push_back("snapshot " + std::to_string(l + 1) +
                           ": time outside the observation window");
    }
    if (l > 0 && net.time(l - 1) > t) {
      violations.push_back("snapshot " + std::to_string(l + 1) +
                           ": times not sorted");
    }
  }
  return violations;
}

ParamVector::ParamVector(int n) {
  if (n < 2) throw ConfigError("ParamVector: needs at least two nodes");
  alpha_ = Eigen::VectorXd::Zero(n);
  beta_ = Eigen::VectorXd::Zero(n);
}

ParamVector::ParamVector(Eigen::VectorXd alpha, Eigen::VectorXd beta)
    : alpha_(std::move(alpha)) {
  const Eigen::Index n = alpha_.size();
  if (n < 2) throw ConfigError("ParamVector: needs at least two nodes");
  if (beta.size() == n - 1) {
    beta_.resize(n);
    beta_.head(n - 1) = beta;
    beta_[n - 1] = 0.0;
  } else if (beta.size() == n) {
    if (beta[n - 1] != 0.0)
      throw ConfigError("ParamVector: the last receiver effect is pinned to zero");
    beta_ = std::move(beta);
  } else {
    throw ConfigError("ParamVector: beta must have length n or n-1");
  }
  if (!alpha_.allFinite() || !beta_.allFinite())
    throw ConfigError("ParamVector: effects must be finite");
}

ParamVector ParamVector::from_free(const Eigen::VectorXd& theta) {
  const Eigen::Index p = theta.size();
  if (p < 3 || p % 2 == 0)
    throw ConfigError("ParamVector: free vector must have odd length 2n-1 >= 3");
  const Eigen::Index n = (p + 1) / 2;
  return ParamVector(theta.head(n), theta.segment(n, n - 1));
}

Eigen::VectorXd ParamVector::free() const {
  const Eigen::Index n = alpha_.size();
  Eigen::VectorXd theta(2 * n - 1);
  theta.head(n) = alpha_;
  theta.segment(n, n - 1) = beta_.head(n - 1);
  return theta;
}

void ParamTrajectory::check() const {
  if (grid.size() != params.size())
    throw ConfigError("ParamTrajectory: grid and params must align");
  if (grid.empty()) throw ConfigError("ParamTrajectory: empty trajectory");
  const int nn = params.front().n();
  for (const auto& p : params)
    if (p.n() != nn) throw ConfigError("ParamTrajectory: mixed node counts");
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (!(grid[g - 1] < grid[g]))
      throw ConfigError("ParamTrajectory: grid must be strictly increasing");
}

}  // namespace tvbeta
