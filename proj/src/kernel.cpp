#include "tvbeta/kernel.hpp"

#include <cmath>

namespace tvbeta {

double kernel_eval(const KernelSpec& spec, double u) {
  if (!std::isfinite(u)) throw ConfigError("kernel_eval: non-finite argument");
  if (u <= -1.0 || u >= 1.0) return 0.0;
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return 0.75 * (1.0 - u * u);
    case KernelFamily::Uniform:
      return 0.5;
    case KernelFamily::Triangular:
      return 1.0 - std::abs(u);
  }
  return 0.0;
}

double kh(const KernelSpec& spec, double t, double T, double h) {
  if (!(h > 0.0)) throw ConfigError("kh: bandwidth must be positive");
  return kernel_eval(spec, (t - T) / h) / h;
}

// All three families have closed-form moments.
KernelMoments moments(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return {0.2, 0.6, 0.0};
    case KernelFamily::Uniform:
      return {1.0 / 3.0, 0.5, 0.0};
    case KernelFamily::Triangular:
      return {1.0 / 6.0, 2.0 / 3.0, 0.0};
  }
  return {0.0, 0.0, 0.0};
}

Eigen::VectorXd kernel_weights(const DynamicNetwork& net, double t, double h,
                               const KernelSpec& spec) {
  if (!(h > 0.0)) throw ConfigError("kernel_weights: bandwidth must be positive");
  const int N = net.size();
  Eigen::VectorXd w(N);
  for (int l = 0; l < N; ++l) w[l] = kernel_eval(spec, (t - net.time(l)) / h) / h;
  return w;
}

double density_estimate(const DynamicNetwork& net, double t, double h,
                        const KernelSpec& spec) {
  return kernel_weights(net, t, h, spec).sum() / net.size();
}

}  // namespace tvbeta
