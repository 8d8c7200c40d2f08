#pragma once

#include <vector>

namespace tvbeta {

// Standard normal distribution function.
double normal_cdf(double x);

// Standard normal quantile for p in (0, 1); accurate to ~1e-15.
double normal_quantile(double p);

// One-sample Kolmogorov-Smirnov distance between a sample and the standard
// normal (the sample is copied and sorted internally).
double ks_normal(std::vector<double> sample);

}  // namespace tvbeta
