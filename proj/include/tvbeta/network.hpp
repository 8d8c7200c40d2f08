#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tvbeta/errors.hpp"

namespace tvbeta {

// One directed 0/1 snapshot; entry (i, j) is the edge i -> j, diagonal zero.
using Adjacency = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Stable logistic: exact on both tails, no overflow anywhere on the real line.
template <typename Scalar>
inline Scalar logistic(Scalar x) {
  if (x >= Scalar(0)) {
    const Scalar e = std::exp(-x);
    return Scalar(1) / (Scalar(1) + e);
  }
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// Probability of the edge i -> j given sender effect a and receiver effect b.
double edge_prob(double a, double b);

// Out-degrees (row sums) and in-degrees (column sums) of one snapshot.
std::pair<Eigen::VectorXd, Eigen::VectorXd> degrees(const Adjacency& snapshot);

// A fixed node set observed as directed snapshots at sampled times inside an
// observation window [a, b]. Snapshots are sorted by time on construction and
// immutable afterwards; per-snapshot degree rows are cached because the
// estimating equations touch degrees far more often than raw edges.
class DynamicNetwork {
 public:
  DynamicNetwork(std::vector<double> times, std::vector<Adjacency> snapshots,
                 double window_a, double window_b);

  // Sparse constructor: one edge list (src, dst) per snapshot, 0-based ids.
  static DynamicNetwork from_edge_lists(
      int n, std::vector<double> times,
      const std::vector<std::vector<std::pair<int, int>>>& edges,
      double window_a, double window_b);

  int n() const { return n_; }
  int size() const { return static_cast<int>(times_.size()); }
  const std::vector<double>& times() const { return times_; }
  double time(int l) const { return times_[static_cast<std::size_t>(l)]; }
  const Adjacency& snapshot(int l) const {
    return snapshots_[static_cast<std::size_t>(l)];
  }
  double window_a() const { return a_; }
  double window_b() const { return b_; }

  // Row l holds the out-degrees (resp. in-degrees) of snapshot l.
  const Eigen::MatrixXd& out_degree_rows() const { return out_deg_; }
  const Eigen::MatrixXd& in_degree_rows() const { return in_deg_; }

 private:
  int n_ = 0;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> times_;
  std::vector<Adjacency> snapshots_;
  Eigen::MatrixXd out_deg_;
  Eigen::MatrixXd in_deg_;
};

// Checks the data rules (binary entries, zero diagonal, times inside the
// window, sorted times) and returns one message per violation, naming the
// snapshot and the rule. Empty result means the network is clean.
std::vector<std::string> validate(const DynamicNetwork& net);

// Sender effects alpha_1..alpha_n and receiver effects beta_1..beta_n at one
// time point; beta_n is pinned to zero for identifiability, so the free
// coordinate vector is (alpha_1..alpha_n, beta_1..beta_{n-1}) of length 2n-1.
class ParamVector {
 public:
  explicit ParamVector(int n);

  // beta may have length n (last entry must be zero) or n-1 (pin appended).
  ParamVector(Eigen::VectorXd alpha, Eigen::VectorXd beta);

  static ParamVector from_free(const Eigen::VectorXd& theta);

  int n() const { return static_cast<int>(alpha_.size()); }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  double alpha(int i) const { return alpha_[i]; }
  double beta(int j) const { return beta_[j]; }

  // Free coordinates (alpha_1..alpha_n, beta_1..beta_{n-1}).
  Eigen::VectorXd free() const;

 private:
  Eigen::VectorXd alpha_;  // length n
  Eigen::VectorXd beta_;   // length n, beta_[n-1] == 0
};

enum class Provenance { Smoothed, PointWise, SmoothedPointWise, Truth };

enum class CurveKind { Alpha, Beta };

// Parameter path on a strictly increasing time grid.
struct ParamTrajectory {
  std::vector<double> grid;
  std::vector<ParamVector> params;
  Provenance provenance = Provenance::Smoothed;

  int n() const { return params.empty() ? 0 : params.front().n(); }

  // Throws ConfigError unless the grid is strictly increasing and sizes agree.
  void check() const;
};

}  // namespace tvbeta
