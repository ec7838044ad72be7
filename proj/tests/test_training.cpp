#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tcmn/training.hpp"

using namespace tcmn;

namespace {

Tensor<double> random_scores(int n, Rng& rng, double bound = 1.0) {
  Tensor<double> s(n, n);
  s.fill_uniform(rng, -bound, bound);
  return s;
}

testing::Mat to_mat(const Tensor<double>& t) {
  testing::Mat out(static_cast<size_t>(t.rows));
  for (int r = 0; r < t.rows; ++r) {
    out[static_cast<size_t>(r)].assign(
        t.data.begin() + static_cast<size_t>(r) * t.cols,
        t.data.begin() + static_cast<size_t>(r + 1) * t.cols);
  }
  return out;
}

// Score matrix satisfying both margin conditions with the given slack.
Tensor<double> satisfying_scores(int n, int p, int q, double margin,
                                 double slack, Rng& rng) {
  Tensor<double> s(n, n);
  s.fill_uniform(rng, -0.5, 0.5);
  // Row p dominates every other row's max by margin + slack; within row p,
  // column q dominates by the same amount.
  double other_max = -1e9;
  for (int i = 0; i < n; ++i) {
    if (i == p) continue;
    for (int j = 0; j < n; ++j) other_max = std::max(other_max, s.at(i, j));
  }
  for (int j = 0; j < n; ++j) s.at(p, j) = rng.uniform(-0.5, 0.5);
  double row_p_max = -1e9;
  for (int j = 0; j < n; ++j) {
    if (j != q) row_p_max = std::max(row_p_max, s.at(p, j));
  }
  const double target = std::max(other_max, row_p_max) + margin + slack;
  s.at(p, q) = target;
  return s;
}

}  // namespace

TEST_CASE("resolve_context: annotated index passes through") {
  SegmentSet segments(6);
  TrainingExample e;
  e.category = Category::kBefore;
  e.context_segment = segments.segment(7);
  CHECK(resolve_context(e, segments) == 7);
}

TEST_CASE("resolve_context: didemo falls back to the whole video") {
  SegmentSet segments(6);
  TrainingExample e;
  e.category = Category::kDidemo;
  CHECK(resolve_context(e, segments) == segments.index_of({0, 5}));
  // Brute-force position of (0, 5) in (a, b) lexicographic order.
  int expected = -1, pos = 0;
  for (int a = 0; a < 6; ++a) {
    for (int b = a; b < 6; ++b, ++pos) {
      if (a == 0 && b == 5) expected = pos;
    }
  }
  CHECK(expected == 5);
  CHECK(resolve_context(e, segments) == expected);
}

TEST_CASE("ranking loss: zero exactly when both margins are satisfied") {
  Rng rng(61);
  LossConfig config;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5;
    const int p = static_cast<int>(rng.uniform_index(n));
    const int q = static_cast<int>(rng.uniform_index(n));
    Tensor<double> s = satisfying_scores(n, p, q, 0.1, 0.01, rng);
    const LossTriple loss = ranking_loss(s, p, q, config);
    CHECK(loss.main == 0.0);
    CHECK(loss.context == 0.0);
    CHECK(loss.total == 0.0);
  }
}

TEST_CASE("ranking loss: lambda = 0 drops the context term") {
  Rng rng(67);
  Tensor<double> s = random_scores(4, rng);
  LossConfig config;
  config.lambda = 0.0;
  const LossTriple loss = ranking_loss(s, 1, 2, config);
  CHECK(loss.total == doctest::Approx(loss.main).epsilon(1e-12));
}

TEST_CASE("ranking loss: matches the brute-force double-loop oracle") {
  Rng rng(71);
  LossConfig config;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(4));
    const int p = static_cast<int>(rng.uniform_index(n));
    const int q = static_cast<int>(rng.uniform_index(n));
    Tensor<double> s = random_scores(n, rng);
    const LossTriple loss = ranking_loss(s, p, q, config);
    const testing::LossOracle oracle = testing::ranking_loss_oracle(
        to_mat(s), static_cast<size_t>(p), static_cast<size_t>(q),
        config.margin_main, config.margin_context, config.lambda);
    CHECK(loss.main == doctest::Approx(oracle.main).epsilon(1e-9));
    CHECK(loss.context == doctest::Approx(oracle.context).epsilon(1e-9));
    CHECK(loss.total == doctest::Approx(oracle.total).epsilon(1e-9));
  }
}

TEST_CASE("ranking loss: nonnegative, and zero implies satisfied margins") {
  Rng rng(73);
  LossConfig config;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5;
    const int p = static_cast<int>(rng.uniform_index(n));
    const int q = static_cast<int>(rng.uniform_index(n));
    Tensor<double> s = random_scores(n, rng);
    const LossTriple loss = ranking_loss(s, p, q, config);
    CHECK(loss.main >= 0.0);
    CHECK(loss.context >= 0.0);
    const testing::LossOracle oracle = testing::ranking_loss_oracle(
        to_mat(s), static_cast<size_t>(p), static_cast<size_t>(q),
        config.margin_main, config.margin_context, config.lambda);
    CHECK((loss.total == 0.0) == (oracle.total == 0.0));
  }
}

TEST_CASE("ranking loss: raising s_pq never increases the context loss") {
  Rng rng(79);
  LossConfig config;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5, p = 2, q = 3;
    Tensor<double> s = random_scores(n, rng);
    const double base = ranking_loss(s, p, q, config).context;
    s.at(p, q) += rng.uniform(0.0, 2.0);
    CHECK(ranking_loss(s, p, q, config).context <= base + 1e-12);
  }
}

TEST_CASE("ranking loss: invariant to adding a constant to all scores") {
  Rng rng(83);
  LossConfig config;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4, p = 0, q = 1;
    Tensor<double> s = random_scores(n, rng);
    const LossTriple base = ranking_loss(s, p, q, config);
    const double shift = rng.uniform(-3.0, 3.0);
    for (double& v : s.data) v += shift;
    const LossTriple shifted = ranking_loss(s, p, q, config);
    CHECK(shifted.main == doctest::Approx(base.main).epsilon(1e-9));
    CHECK(shifted.context == doctest::Approx(base.context).epsilon(1e-9));
  }
}

TEST_CASE("ranking loss: gradient matches finite differences") {
  Rng rng(89);
  ParameterStore<double> store;
  store.create("s", 4, 4) = random_scores(4, rng);
  LossConfig config;
  auto build = [&](Graph<double>& g, ParameterStore<double>& params) {
    Value s = g.parameter("s", params.get("s"));
    return ranking_loss_graph(g, s, 1, 2, config).total;
  };
  CHECK(finite_difference_check(build, store) < 1e-4);
}

TEST_CASE("ranking loss: bad indices and margins are rejected") {
  Graph<double> g;
  Value s = g.zeros(3, 3);
  CHECK_THROWS_AS(ranking_loss_graph(g, s, 3, 0, LossConfig{}), Error);
  CHECK_THROWS_AS(ranking_loss_graph(g, s, 0, -1, LossConfig{}), Error);
  LossConfig negative;
  negative.margin_main = -0.5;
  CHECK_THROWS_AS(ranking_loss_graph(g, s, 0, 1, negative), Error);
}
