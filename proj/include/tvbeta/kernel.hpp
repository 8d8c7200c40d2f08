#pragma once

#include <Eigen/Dense>

#include "tvbeta/network.hpp"

namespace tvbeta {

// Symmetric densities on [-1, 1] used to weight snapshots near the
// evaluation time. Epanechnikov is the default everywhere.
enum class KernelFamily { Epanechnikov, Uniform, Triangular };

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
};

// K(u); zero outside [-1, 1].
double kernel_eval(const KernelSpec& spec, double u);

// Scaled kernel K_h(t - T) = K((t - T) / h) / h. Throws ConfigError on h <= 0.
double kh(const KernelSpec& spec, double t, double T, double h);

// Moment constants of the family: k21 = int v^2 K(v) dv,
// k02 = int K(v)^2 dv, k12 = int v K(v)^2 dv (zero by symmetry).
struct KernelMoments {
  double k21;
  double k02;
  double k12;
};

KernelMoments moments(const KernelSpec& spec);

// K_h(t - T_l) for every snapshot of the network.
Eigen::VectorXd kernel_weights(const DynamicNetwork& net, double t, double h,
                               const KernelSpec& spec = {});

// Kernel density estimate of the sampling law of the observation times:
// (1/N) sum_l K_h(t - T_l).
double density_estimate(const DynamicNetwork& net, double t, double h,
                        const KernelSpec& spec = {});

}  // namespace tvbeta
