#include "tvbeta/network.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace {

using namespace tvbeta;

Adjacency from_rows(std::initializer_list<std::initializer_list<int>> rows) {
  const int n = static_cast<int>(rows.size());
  Adjacency a(n, n);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (int v : row) a(i, j++) = static_cast<std::uint8_t>(v);
    ++i;
  }
  return a;
}

}  // namespace

TEST_CASE("logistic is exact at zero and stable on both tails") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
  CHECK(std::isfinite(logistic(40.0)));
  CHECK(logistic(3.0) == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-15));
  CHECK(logistic(-3.0) + logistic(3.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("edge probability adds the two effects and rejects non-finite input") {
  CHECK(edge_prob(1.0, 2.0) == doctest::Approx(logistic(3.0)).epsilon(1e-15));
  CHECK_THROWS_AS(edge_prob(std::numeric_limits<double>::infinity(), 0.0), ConfigError);
  CHECK_THROWS_AS(edge_prob(0.0, std::numeric_limits<double>::quiet_NaN()), ConfigError);
}

TEST_CASE("degrees are row and column sums") {
  const Adjacency a = from_rows({{0, 1, 1}, {0, 0, 1}, {1, 0, 0}});
  const auto [out, in] = degrees(a);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 1.0);
  CHECK(out[2] == 1.0);
  CHECK(in[0] == 1.0);
  CHECK(in[1] == 1.0);
  CHECK(in[2] == 2.0);
  Adjacency bad(2, 3);
  CHECK_THROWS_AS(degrees(bad), ConfigError);
}

TEST_CASE("snapshots are sorted by time on construction, ties kept stable") {
  const Adjacency a = from_rows({{0, 1}, {0, 0}});
  const Adjacency b = from_rows({{0, 0}, {1, 0}});
  DynamicNetwork net({0.7, 0.2}, {a, b}, 0.0, 1.0);
  CHECK(net.size() == 2);
  CHECK(net.time(0) == 0.2);
  CHECK(net.time(1) == 0.7);
  CHECK(net.snapshot(0)(1, 0) == 1);  // b came with the earlier time
  CHECK(net.snapshot(1)(0, 1) == 1);
}

TEST_CASE("cached degree rows agree with per-snapshot degrees") {
  const Adjacency a = from_rows({{0, 1, 0}, {1, 0, 1}, {0, 0, 0}});
  const Adjacency b = from_rows({{0, 0, 1}, {0, 0, 0}, {1, 1, 0}});
  DynamicNetwork net({0.3, 0.6}, {a, b}, 0.0, 1.0);
  for (int l = 0; l < net.size(); ++l) {
    const auto [out, in] = degrees(net.snapshot(l));
    CHECK((net.out_degree_rows().row(l).transpose() - out).cwiseAbs().maxCoeff() == 0.0);
    CHECK((net.in_degree_rows().row(l).transpose() - in).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("network construction rejects malformed input") {
  const Adjacency a = from_rows({{0, 1}, {0, 0}});
  CHECK_THROWS_AS(DynamicNetwork({0.1, 0.2}, {a}, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(DynamicNetwork({}, {}, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(DynamicNetwork({0.1}, {a}, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(DynamicNetwork({std::numeric_limits<double>::quiet_NaN()}, {a}, 0.0, 1.0),
                  ConfigError);
  Adjacency one(1, 1);
  one.setZero();
  CHECK_THROWS_AS(DynamicNetwork({0.1}, {one}, 0.0, 1.0), ConfigError);
  Adjacency three = Adjacency::Zero(3, 3);
  CHECK_THROWS_AS(DynamicNetwork({0.1, 0.2}, {a, three}, 0.0, 1.0), ConfigError);
}

TEST_CASE("validation reports each data rule violation by snapshot") {
  Adjacency bad = Adjacency::Zero(2, 2);
  bad(0, 0) = 1;  // nonzero diagonal
  bad(0, 1) = 2;  // entry outside {0,1}
  const Adjacency good = from_rows({{0, 1}, {0, 0}});
  DynamicNetwork net({0.4, 1.5}, {bad, good}, 0.0, 1.0);  // 1.5 outside window
  const std::vector<std::string> v = validate(net);
  REQUIRE(v.size() == 3);
  bool diag = false, entry = false, window = false;
  for (const std::string& msg : v) {
    if (msg.find("diagonal") != std::string::npos) diag = true;
    if (msg.find("{0,1}") != std::string::npos) entry = true;
    if (msg.find("window") != std::string::npos) window = true;
  }
  CHECK(diag);
  CHECK(entry);
  CHECK(window);
  CHECK(validate(DynamicNetwork({0.4}, {good}, 0.0, 1.0)).empty());
}

TEST_CASE("edge-list construction round-trips and rejects out-of-range ids") {
  std::vector<std::vector<std::pair<int, int>>> edges = {{{0, 1}, {2, 0}}, {{1, 2}}};
  DynamicNetwork net = DynamicNetwork::from_edge_lists(3, {0.2, 0.8}, edges, 0.0, 1.0);
  CHECK(net.n() == 3);
  CHECK(net.snapshot(0)(0, 1) == 1);
  CHECK(net.snapshot(0)(2, 0) == 1);
  CHECK(net.snapshot(0)(1, 2) == 0);
  CHECK(net.snapshot(1)(1, 2) == 1);
  CHECK_THROWS_AS(DynamicNetwork::from_edge_lists(3, {0.2}, {{{0, 3}}}, 0.0, 1.0),
                  DataError);
  CHECK_THROWS_AS(DynamicNetwork::from_edge_lists(3, {0.2}, {{{-1, 0}}}, 0.0, 1.0),
                  DataError);
}

TEST_CASE("parameter vector pins the last receiver effect") {
  Eigen::VectorXd alpha(3), beta2(2), beta3(3);
  alpha << 0.1, -0.2, 0.3;
  beta2 << 0.5, -0.5;
  beta3 << 0.5, -0.5, 0.0;

  ParamVector from_short(alpha, beta2);
  ParamVector from_full(alpha, beta3);
  CHECK(from_short.beta(2) == 0.0);
  CHECK((from_short.free() - from_full.free()).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::VectorXd free = from_short.free();
  REQUIRE(free.size() == 5);
  CHECK(free[0] == 0.1);
  CHECK(free[3] == 0.5);
  const ParamVector back = ParamVector::from_free(free);
  CHECK((back.free() - free).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.n() == 3);

  Eigen::VectorXd bad_beta(3);
  bad_beta << 0.5, -0.5, 0.1;  // pinned coordinate must stay zero
  CHECK_THROWS_AS(ParamVector(alpha, bad_beta), ConfigError);
  Eigen::VectorXd wrong_len(1);
  wrong_len << 0.0;
  CHECK_THROWS_AS(ParamVector(alpha, wrong_len), ConfigError);
  Eigen::VectorXd tiny(1);
  tiny << 0.0;
  CHECK_THROWS_AS(ParamVector(tiny, wrong_len), ConfigError);

  ParamVector zero(4);
  CHECK(zero.free().cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(ParamVector(1), ConfigError);
}

TEST_CASE("trajectory check enforces a strictly increasing grid and aligned sizes") {
  ParamTrajectory traj;
  traj.grid = {0.1, 0.5};
  traj.params = {ParamVector(3), ParamVector(3)};
  CHECK_NOTHROW(traj.check());
  CHECK(traj.n() == 3);

  traj.grid = {0.5, 0.5};
  CHECK_THROWS_AS(traj.check(), ConfigError);
  traj.grid = {0.1};
  CHECK_THROWS_AS(traj.check(), ConfigError);
}
