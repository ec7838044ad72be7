#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "tcmn/ensemble.hpp"
#include "tcmn/eval.hpp"

using namespace tcmn;

namespace {

std::array<Tensor<float>, 4> random_streams(int n, Rng& rng) {
  std::array<Tensor<float>, 4> out;
  for (Tensor<float>& m : out) {
    m = Tensor<float>(n, n);
    m.fill_uniform(rng, -2.0, 2.0);
  }
  return out;
}

std::array<const Tensor<float>*, 4> ptrs(
    const std::array<Tensor<float>, 4>& ms) {
  return {&ms[0], &ms[1], &ms[2], &ms[3]};
}

}  // namespace

TEST_CASE("late fusion: one-hot weights reproduce the stream bit-for-bit") {
  Rng rng(3);
  auto streams = random_streams(4, rng);
  // Include negative zero and denormals in the payload.
  streams[3].at(0, 0) = -0.0f;
  streams[3].at(1, 1) = 1e-40f;
  for (int hot = 0; hot < 4; ++hot) {
    EnsembleWeights w;
    w.gamma = {0, 0, 0, 0};
    w.gamma[static_cast<size_t>(hot)] = 1.0;
    const Tensor<float> fused = late_fusion(ptrs(streams), w);
    CHECK(std::memcmp(fused.data.data(),
                      streams[static_cast<size_t>(hot)].data.data(),
                      fused.data.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("late fusion: equal weights give the elementwise mean") {
  Rng rng(5);
  auto streams = random_streams(3, rng);
  EnsembleWeights w;
  w.gamma = {0.25, 0.25, 0.25, 0.25};
  const Tensor<float> fused = late_fusion(ptrs(streams), w);
  for (int i = 0; i < fused.size(); ++i) {
    const double mean = (streams[0].data[i] + streams[1].data[i] +
                         streams[2].data[i] + streams[3].data[i]) /
                        4.0;
    CHECK(fused.data[i] == doctest::Approx(mean).epsilon(1e-6));
  }
}

TEST_CASE("late fusion: matches the direct weighted sum") {
  Rng rng(7);
  auto streams = random_streams(2, rng);
  EnsembleWeights w;
  w.gamma = {0.1, 0.2, 0.3, 0.4};
  const Tensor<float> fused = late_fusion(ptrs(streams), w);
  for (int i = 0; i < fused.size(); ++i) {
    double sum = 0.0;
    for (int n = 0; n < 4; ++n) {
      sum += w.gamma[static_cast<size_t>(n)] *
             static_cast<double>(streams[static_cast<size_t>(n)].data[i]);
    }
    CHECK(fused.data[i] == doctest::Approx(sum).epsilon(1e-6));
  }
}

TEST_CASE("late fusion: weight and shape violations are rejected") {
  Rng rng(9);
  auto streams = random_streams(2, rng);
  EnsembleWeights bad_sum;
  bad_sum.gamma = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(late_fusion(ptrs(streams), bad_sum), Error);
  EnsembleWeights negative;
  negative.gamma = {1.5, -0.5, 0, 0};
  CHECK_THROWS_AS(late_fusion(ptrs(streams), negative), Error);

  EnsembleWeights ok;
  ok.gamma = {0.25, 0.25, 0.25, 0.25};
  Tensor<float> mismatched(3, 3);
  std::array<const Tensor<float>*, 4> mixed = {&streams[0], &streams[1],
                                               &streams[2], &mismatched};
  CHECK_THROWS_AS(late_fusion(mixed, ok), Error);
}

TEST_CASE("late fusion is linear over matrices") {
  Rng rng(11);
  auto a = random_streams(3, rng);
  auto b = random_streams(3, rng);
  EnsembleWeights w;
  w.gamma = {0.4, 0.3, 0.2, 0.1};
  std::array<Tensor<float>, 4> sum;
  for (int n = 0; n < 4; ++n) {
    sum[static_cast<size_t>(n)] = Tensor<float>(3, 3);
    for (int i = 0; i < 9; ++i) {
      sum[static_cast<size_t>(n)].data[i] =
          a[static_cast<size_t>(n)].data[i] + b[static_cast<size_t>(n)].data[i];
    }
  }
  const Tensor<float> fa = late_fusion(ptrs(a), w);
  const Tensor<float> fb = late_fusion(ptrs(b), w);
  const Tensor<float> fs = late_fusion(ptrs(sum), w);
  for (int i = 0; i < 9; ++i) {
    CHECK(fs.data[i] == doctest::Approx(fa.data[i] + fb.data[i]).epsilon(1e-5));
  }
}

TEST_CASE("weight grid: counts follow stars and bars") {
  // Compositions of 1/step into four nonnegative parts: C(m+3, 3).
  auto binomial = [](int n, int k) {
    long long out = 1;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
  };
  CHECK(fusion_weight_grid(0.5).size() == static_cast<size_t>(binomial(5, 3)));
  CHECK(fusion_weight_grid(0.5).size() == 10);
  CHECK(fusion_weight_grid(0.1).size() ==
        static_cast<size_t>(binomial(13, 3)));
  CHECK(fusion_weight_grid(0.1).size() == 286);
  CHECK(fusion_weight_grid(1.0).size() == 4);
  CHECK_THROWS_AS(fusion_weight_grid(0.3), Error);
  for (const EnsembleWeights& w : fusion_weight_grid(0.25)) w.validate();
}

TEST_CASE("weight grid: ascending lexicographic order") {
  const auto grid = fusion_weight_grid(0.5);
  for (size_t k = 1; k < grid.size(); ++k) {
    CHECK(std::lexicographical_compare(grid[k - 1].gamma.begin(),
                                       grid[k - 1].gamma.end(),
                                       grid[k].gamma.begin(),
                                       grid[k].gamma.end()));
  }
  CHECK(grid.front().gamma == std::array<double, 4>{0, 0, 0, 1});
  CHECK(grid.back().gamma == std::array<double, 4>{1, 0, 0, 0});
}

namespace {

// Validation set where stream `hot` ranks the truth first and any
// contamination from the other streams reverses the ranking entirely.
std::vector<FusionQuery> dominant_stream_queries(int hot, int n_queries,
                                                 const SegmentSet& segments) {
  std::vector<FusionQuery> out;
  const int p = segments.count();
  for (int k = 0; k < n_queries; ++k) {
    FusionQuery q;
    q.id = k;
    q.category = Category::kBefore;
    q.gt_main = k % p;
    for (int n = 0; n < 4; ++n) {
      Tensor<float> m(p, p);
      for (int i = 0; i < p; ++i) {
        // Row height descends away from the truth.
        const float base =
            i == q.gt_main ? 1.0f : -1.0f - static_cast<float>(i);
        for (int j = 0; j < p; ++j) {
          m.at(i, j) = n == hot ? base : -100.0f * base;
        }
      }
      q.matrices[static_cast<size_t>(n)] = std::move(m);
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace

TEST_CASE("grid search: a strictly dominant stream wins its one-hot corner") {
  const SegmentSet segments(3);
  for (int hot = 0; hot < 4; ++hot) {
    const auto queries = dominant_stream_queries(hot, 6, segments);
    const EnsembleWeights w = grid_search_weights(queries, segments, 0.5);
    for (int n = 0; n < 4; ++n) {
      CHECK(w.gamma[static_cast<size_t>(n)] == (n == hot ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("grid search: identical streams tie toward the first weight vector") {
  const SegmentSet segments(3);
  Rng rng(13);
  std::vector<FusionQuery> queries;
  for (int k = 0; k < 5; ++k) {
    FusionQuery q;
    q.id = k;
    q.category = Category::kThen;
    q.gt_main = 1;
    Tensor<float> good(segments.count(), segments.count());
    good.fill_uniform(rng, -1.0, 1.0);
    for (int j = 0; j < segments.count(); ++j) good.at(1, j) = 5.0f;
    // All four streams identical: every grid point scores the same.
    for (int n = 0; n < 4; ++n) q.matrices[static_cast<size_t>(n)] = good;
    queries.push_back(std::move(q));
  }
  const EnsembleWeights w = grid_search_weights(queries, segments, 0.5);
  CHECK(w.gamma == std::array<double, 4>{0, 0, 0, 1});
}

TEST_CASE("grid search: empty validation set is rejected") {
  CHECK_THROWS_AS(grid_search_weights({}, SegmentSet(3), 0.5), Error);
}

TEST_CASE("grid search: never below the best one-hot corner") {
  Rng rng(17);
  const SegmentSet segments(4);
  const int p = segments.count();
  std::vector<FusionQuery> queries;
  for (int k = 0; k < 12; ++k) {
    FusionQuery q;
    q.id = k;
    q.category = k % 2 ? Category::kBefore : Category::kAfter;
    q.gt_main = static_cast<int>(rng.uniform_index(p));
    for (int n = 0; n < 4; ++n) {
      Tensor<float> m(p, p);
      m.fill_uniform(rng, -1.0, 1.0);
      q.matrices[static_cast<size_t>(n)] = std::move(m);
    }
    queries.push_back(std::move(q));
  }
  auto score_with = [&](const EnsembleWeights& w) {
    std::vector<QueryPrediction> preds;
    for (const FusionQuery& q : queries) {
      const Tensor<float> fused = late_fusion(
          {&q.matrices[0], &q.matrices[1], &q.matrices[2], &q.matrices[3]}, w);
      preds.push_back(QueryPrediction{q.id, q.category,
                                      rank_main_segments(fused), q.gt_main});
    }
    return evaluate(preds, segments).average.r_at_1;
  };
  const EnsembleWeights best = grid_search_weights(queries, segments, 0.25);
  const double best_score = score_with(best);
  for (int hot = 0; hot < 4; ++hot) {
    EnsembleWeights corner;
    corner.gamma = {0, 0, 0, 0};
    corner.gamma[static_cast<size_t>(hot)] = 1.0;
    CHECK(best_score >= score_with(corner) - 1e-12);
  }
}

TEST_CASE("weights file round trip and stream labels") {
  CHECK(stream_label(0) == "(RGB,RGB)");
  CHECK(stream_label(1) == "(RGB,Flow)");
  CHECK(stream_label(2) == "(Flow,RGB)");
  CHECK(stream_label(3) == "(Flow,Flow)");
  CHECK(stream_index(Modality::kFlow, Modality::kRgb) == 2);

  EnsembleWeights w;
  w.gamma = {0.1, 0.2, 0.3, 0.4};
  const std::string path = "weights_test.json";
  w.save(path);
  const EnsembleWeights back = EnsembleWeights::load(path);
  for (int n = 0; n < 4; ++n) {
    CHECK(back.gamma[static_cast<size_t>(n)] ==
          doctest::Approx(w.gamma[static_cast<size_t>(n)]));
  }
  std::remove(path.c_str());
}
