#include "tvbeta/rng.hpp"
#include "tvbeta/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

#include "tvbeta/errors.hpp"

namespace {

using namespace tvbeta;

}  // namespace

TEST_CASE("normal quantile hits the classical reference points") {
  CHECK(std::abs(normal_quantile(0.5)) < 1e-15);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK(normal_quantile(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(normal_quantile(0.0013498980316300933) == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("normal quantile and cdf are mutual inverses") {
  for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-8}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  for (double x = -6.0; x <= 5.0; x += 0.5) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
  }
  // far in the upper tail the round trip is limited by the resolution of
  // doubles near p = 1 (dx ~ ulp(1) / density), not by the quantile itself
  CHECK(normal_quantile(normal_cdf(6.0)) == doctest::Approx(6.0).epsilon(1e-7));
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(normal_quantile(1.0), ConfigError);
  CHECK_THROWS_AS(normal_quantile(-0.2), ConfigError);
}

TEST_CASE("ks distance is zero-ish for the exact quantiles and large for a shifted sample") {
  // Plug the i/(m+1) quantiles back in: the empirical cdf stays within 1/m.
  const int m = 200;
  std::vector<double> sample(m);
  for (int i = 0; i < m; ++i)
    sample[static_cast<std::size_t>(i)] = normal_quantile((i + 1.0) / (m + 1.0));
  CHECK(ks_normal(sample) < 1.0 / m + 1e-6);

  for (double& v : sample) v += 3.0;
  CHECK(ks_normal(sample) > 0.5);
  CHECK_THROWS_AS(ks_normal({}), ConfigError);
}

TEST_CASE("generator streams are reproducible and seed-sensitive") {
  SplitMix64 a(42), b(42), c(43);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t xa = a.next();
    all_equal = all_equal && xa == b.next();
    any_diff = any_diff || xa != c.next();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("substreams replay in isolation and do not collide") {
  SplitMix64 s0 = substream(7, 0);
  SplitMix64 s0_again = substream(7, 0);
  SplitMix64 s1 = substream(7, 1);
  const std::uint64_t x = s0.next();
  CHECK(x == s0_again.next());
  CHECK(x != s1.next());
}

TEST_CASE("uniform draws live in [0,1) and bernoulli tracks its rate") {
  SplitMix64 rng(2024);
  const int m = 20000;
  double mean = 0.0;
  int hits = 0;
  for (int i = 0; i < m; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
    if (rng.bernoulli(0.3)) ++hits;
  }
  mean /= m;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(static_cast<double>(hits) / m == doctest::Approx(0.3).epsilon(0.05));

  SplitMix64 rng2(5);
  const double v = rng2.uniform(2.0, 6.0);
  CHECK(v >= 2.0);
  CHECK(v < 6.0);
}
