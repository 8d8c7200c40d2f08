#pragma once

#include <Eigen/Dense>

#include <vector>

#include "tvbeta/network.hpp"

namespace tvbeta {

// Pairwise L2 distances between fitted effect curves: D_ij^2 is the
// trapezoidal quadrature of |x_i(t) - x_j(t)|^2 over the fit grid. Shifting
// every curve by a common function leaves D unchanged, which makes it the
// identifiability-safe object to cluster.
struct TrajectoryDistance {
  CurveKind kind = CurveKind::Alpha;
  Eigen::MatrixXd D;         // n x n, symmetric, zero diagonal
  std::vector<double> grid;  // quadrature grid
};

TrajectoryDistance trajectory_distance(const ParamTrajectory& traj,
                                       CurveKind kind);

// Classical MDS: double-center -D^2/2, keep the top `dim` eigenpairs,
// coordinates are eigenvectors scaled by sqrt(max(eigenvalue, 0)). Each
// eigenvector is oriented so its first nonzero entry is positive.
Eigen::MatrixXd mds_embed(const TrajectoryDistance& dist, int dim);

// K-medoids directly on the distance matrix: the first medoid minimizes the
// total distance, the rest are max-min seeded, then best-improving swaps run
// to a local optimum. Labels are 1..K in order of first appearance.
std::vector<int> cluster(const TrajectoryDistance& dist, int K);

// Alternative backend: Lloyd k-means on `dim`-dimensional MDS coordinates
// with the same deterministic seeding. Labels are 1..K in order of first
// appearance.
std::vector<int> cluster_kmeans_mds(const TrajectoryDistance& dist, int K,
                                    int dim = 2);

struct SelectKResult {
  std::vector<int> ks;         // candidate cluster counts, 2..k_max
  std::vector<double> ratios;  // mean inter-cluster / mean intra-cluster
  int suggested = 1;
  bool degenerate = false;  // all curves identical; ratios undefined
};

// Ratio curve over K = 2..k_max and the smallest K after which the relative
// ratio improvement stays below the threshold (the plateau rule); k_max when
// the curve never flattens.
SelectKResult select_k(const TrajectoryDistance& dist, int k_max,
                       double threshold = 0.05);

}  // namespace tvbeta
