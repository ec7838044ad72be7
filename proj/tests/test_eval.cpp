#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcmn/eval.hpp"
#include "tcmn/rng.hpp"

using namespace tcmn;

TEST_CASE("iou: identical, disjoint, and the half-overlap example") {
  CHECK(iou({1, 3}, {1, 3}) == 1.0);
  CHECK(iou({0, 1}, {3, 4}) == 0.0);
  // Clips {0,1,2} vs {1,2,3}: 2 shared / 4 total.
  CHECK(iou({0, 2}, {1, 3}) == 0.5);
}

TEST_CASE("iou: symmetric, 1 only for identical segments") {
  Rng rng(7);
  SegmentSet s(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Segment a = s.segment(static_cast<int>(rng.uniform_index(s.count())));
    const Segment b = s.segment(static_cast<int>(rng.uniform_index(s.count())));
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK((ab == 1.0) == (a == b));
  }
}

TEST_CASE("rank_main_segments: singleton and dominant row") {
  Tensor<float> one(1, 1, 0.5f);
  CHECK(rank_main_segments(one) == std::vector<int>{0});

  Tensor<float> s(5, 5, 0.0f);
  for (int j = 0; j < 5; ++j) s.at(3, j) = 2.0f;
  CHECK(rank_main_segments(s)[0] == 3);
}

TEST_CASE("rank_main_segments: matches a brute-force sort oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<float> s(5, 5);
    s.fill_uniform(rng, -2.0, 2.0);
    const std::vector<int> got = rank_main_segments(s);
    // Oracle: selection sort on (max score desc, index asc).
    std::vector<double> best(5, -1e30);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        best[static_cast<size_t>(i)] =
            std::max(best[static_cast<size_t>(i)],
                     static_cast<double>(s.at(i, j)));
      }
    }
    std::vector<int> expected;
    std::vector<bool> used(5, false);
    for (int round = 0; round < 5; ++round) {
      int pick = -1;
      for (int i = 0; i < 5; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        if (pick < 0 || best[static_cast<size_t>(i)] >
                            best[static_cast<size_t>(pick)]) {
          pick = i;
        }
      }
      used[static_cast<size_t>(pick)] = true;
      expected.push_back(pick);
    }
    CHECK(got == expected);
  }
}

namespace {

QueryPrediction make_prediction(int64_t id, Category cat, int gt,
                                std::vector<int> ranking) {
  QueryPrediction p;
  p.id = id;
  p.category = cat;
  p.gt_main = gt;
  p.ranking = std::move(ranking);
  return p;
}

}  // namespace

TEST_CASE("evaluate: a perfect predictor scores 100 everywhere") {
  SegmentSet segments(6);
  std::vector<QueryPrediction> preds;
  std::vector<int> base(static_cast<size_t>(segments.count()));
  std::iota(base.begin(), base.end(), 0);
  int64_t id = 0;
  for (Category c : {Category::kDidemo, Category::kBefore, Category::kThen}) {
    for (int k = 0; k < 4; ++k) {
      std::vector<int> ranking = base;
      const int gt = (k * 5 + 2) % segments.count();
      std::swap(ranking[0], ranking[static_cast<size_t>(gt)]);
      preds.push_back(make_prediction(id++, c, gt, ranking));
    }
  }
  const EvaluationReport report = evaluate(preds, segments);
  REQUIRE(report.per_category.size() == 3);
  for (const MetricRow& row : report.per_category) {
    CHECK(row.r_at_1 == 100.0);
    CHECK(row.r_at_5 == 100.0);
    CHECK(row.miou == 100.0);
  }
  CHECK(report.average.r_at_1 == 100.0);
  CHECK(report.average.miou == 100.0);
}

TEST_CASE("evaluate: rank 3 of 21 counts for R@5 but not R@1") {
  SegmentSet segments(6);
  std::vector<int> ranking(21);
  std::iota(ranking.begin(), ranking.end(), 0);
  // Ground truth sits at rank 3 (index 2 of the ranking).
  const int gt = ranking[2];
  std::vector<QueryPrediction> preds{
      make_prediction(0, Category::kDidemo, gt, ranking)};
  const EvaluationReport report = evaluate(preds, segments);
  CHECK(report.per_category[0].r_at_1 == 0.0);
  CHECK(report.per_category[0].r_at_5 == 100.0);
}

TEST_CASE("evaluate: matches an independent metric oracle on random data") {
  Rng rng(1313);
  SegmentSet segments(6);
  const int p = segments.count();
  std::vector<QueryPrediction> preds;
  const std::vector<Category> cats = {Category::kDidemo, Category::kBefore,
                                      Category::kAfter, Category::kThen,
                                      Category::kWhile};
  for (int k = 0; k < 10; ++k) {
    std::vector<int> ranking(static_cast<size_t>(p));
    std::iota(ranking.begin(), ranking.end(), 0);
    rng.shuffle(ranking.begin(), ranking.end());
    preds.push_back(make_prediction(
        k, cats[rng.uniform_index(cats.size())],
        static_cast<int>(rng.uniform_index(p)), ranking));
  }
  const EvaluationReport report = evaluate(preds, segments);

  // Oracle: recompute every number with independent loops.
  for (const MetricRow& row : report.per_category) {
    int queries = 0, h1 = 0, h5 = 0;
    double iou_sum = 0.0;
    for (const QueryPrediction& q : preds) {
      if (category_display_name(q.category) != row.name) continue;
      ++queries;
      const auto pos = std::find(q.ranking.begin(), q.ranking.end(), q.gt_main);
      const auto rank = pos - q.ranking.begin();
      if (rank == 0) ++h1;
      if (rank < 5) ++h5;
      iou_sum +=
          iou(segments.segment(q.ranking[0]), segments.segment(q.gt_main));
    }
    REQUIRE(queries == row.queries);
    CHECK(row.r_at_1 == doctest::Approx(100.0 * h1 / queries).epsilon(1e-12));
    CHECK(row.r_at_5 == doctest::Approx(100.0 * h5 / queries).epsilon(1e-12));
    CHECK(row.miou ==
          doctest::Approx(100.0 * iou_sum / queries).epsilon(1e-12));
  }
  double avg1 = 0.0;
  for (const MetricRow& row : report.per_category) avg1 += row.r_at_1;
  avg1 /= static_cast<double>(report.per_category.size());
  CHECK(report.average.r_at_1 == doctest::Approx(avg1).epsilon(1e-12));
}

TEST_CASE("evaluate: R@1 <= R@5 and monotone-transform invariance") {
  Rng rng(17);
  SegmentSet segments(5);
  const int p = segments.count();
  for (int trial = 0; trial < 25; ++trial) {
    Tensor<float> scores(p, p);
    scores.fill_uniform(rng, -1.0, 1.0);
    const std::vector<int> base_rank = rank_main_segments(scores);
    // Strictly monotone transform of all scores.
    Tensor<float> warped = scores;
    for (float& v : warped.data) v = 3.0f * v + 0.5f;
    CHECK(rank_main_segments(warped) == base_rank);

    std::vector<QueryPrediction> preds{make_prediction(
        trial, Category::kWhile, static_cast<int>(rng.uniform_index(p)),
        base_rank)};
    const EvaluationReport report = evaluate(preds, segments);
    CHECK(report.average.r_at_1 <= report.average.r_at_5);
  }
}

TEST_CASE("evaluate: mIoU of 100 forces R@1 of 100") {
  // Under exhaustive contiguous enumeration, IoU 1 means identity.
  SegmentSet segments(6);
  std::vector<int> ranking(21);
  std::iota(ranking.begin(), ranking.end(), 0);
  std::vector<QueryPrediction> preds{
      make_prediction(0, Category::kAfter, 0, ranking)};
  const EvaluationReport report = evaluate(preds, segments);
  if (report.average.miou == 100.0) CHECK(report.average.r_at_1 == 100.0);
}

TEST_CASE("frequency prior: constant answer ranks first") {
  SegmentSet segments(6);
  const int idx = segments.index_of({0, 0});
  std::vector<int> gts(12, idx);
  CHECK(frequency_prior(gts, segments)[0] == idx);
}

TEST_CASE("frequency prior: uniform counts give the lexicographic ranking") {
  SegmentSet segments(4);
  std::vector<int> gts(static_cast<size_t>(segments.count()));
  std::iota(gts.begin(), gts.end(), 0);  // one hit per segment
  std::vector<int> expected(static_cast<size_t>(segments.count()));
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(frequency_prior(gts, segments) == expected);
}

TEST_CASE("frequency prior: skewed split matches a counting oracle") {
  Rng rng(23);
  SegmentSet segments(5);
  std::vector<int> gts;
  for (int k = 0; k < 300; ++k) {
    // Skew mass toward low indices.
    const int idx = static_cast<int>(
        std::min<uint64_t>(rng.uniform_index(segments.count()),
                           rng.uniform_index(segments.count())));
    gts.push_back(idx);
  }
  const std::vector<int> ranking = frequency_prior(gts, segments);
  std::vector<int> counts(static_cast<size_t>(segments.count()), 0);
  for (int g : gts) counts[static_cast<size_t>(g)] += 1;
  for (size_t k = 1; k < ranking.size(); ++k) {
    const int prev = counts[static_cast<size_t>(ranking[k - 1])];
    const int cur = counts[static_cast<size_t>(ranking[k])];
    CHECK(prev >= cur);
    if (prev == cur) CHECK(ranking[k - 1] < ranking[k]);
  }
  CHECK_THROWS_AS(frequency_prior(std::vector<int>{}, segments), Error);
}

TEST_CASE("report formatting: table and JSON contain every category row") {
  SegmentSet segments(6);
  std::vector<int> ranking(21);
  std::iota(ranking.begin(), ranking.end(), 0);
  std::vector<QueryPrediction> preds;
  const std::vector<Category> cats = {Category::kDidemo, Category::kBefore,
                                      Category::kAfter, Category::kThen,
                                      Category::kWhile};
  for (size_t k = 0; k < cats.size(); ++k) {
    preds.push_back(make_prediction(static_cast<int64_t>(k), cats[k], 2,
                                    ranking));
  }
  const EvaluationReport report = evaluate(preds, segments);
  const std::string table = format_report_table(report, true);
  for (const char* name : {"DiDeMo", "Before", "After", "Then", "While",
                           "Average", "R@1", "R@5", "mIoU"}) {
    CHECK(table.find(name) != std::string::npos);
  }
  const std::string json = report_to_json(report, true);
  CHECK(json.find("\"Average\"") != std::string::npos);
  CHECK(json.find("per_category") != std::string::npos);
}

TEST_CASE("category tags: unknown names are rejected") {
  CHECK_THROWS_AS(category_from_name("sometimes"), Error);
  CHECK(category_from_name("DiDeMo") == Category::kDidemo);
  CHECK(category_from_name("WHILE") == Category::kWhile);
}
