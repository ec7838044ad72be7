#include "tcmn/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tcmn/error.hpp"

namespace tcmn {

double iou(const Segment& a, const Segment& b) {
  const int inter = std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
  if (inter <= 0) return 0.0;
  const int uni = a.clip_count() + b.clip_count() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<int> rank_main_segments(const Tensor<float>& scores) {
  if (scores.rows != scores.cols || scores.rows == 0) {
    throw usage_error("ranking needs a square score matrix");
  }
  const int p = scores.rows;
  std::vector<float> best(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) {
    float row_max = scores.at(i, 0);
    for (int j = 1; j < p; ++j) row_max = std::max(row_max, scores.at(i, j));
    best[static_cast<size_t>(i)] = row_max;
  }
  std::vector<int> order(static_cast<size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return best[static_cast<size_t>(a)] > best[static_cast<size_t>(b)];
  });
  return order;
}

namespace {

const std::vector<Category>& category_order() {
  static const std::vector<Category> order = {
      Category::kDidemo, Category::kBefore, Category::kAfter, Category::kThen,
      Category::kWhile};
  return order;
}

}  // namespace

EvaluationReport evaluate(std::span<const QueryPrediction> predictions,
                          const SegmentSet& segments) {
  if (predictions.empty()) throw data_error("evaluate: no predictions");
  struct Tally {
    int queries = 0;
    int hits1 = 0;
    int hits5 = 0;
    double iou_sum = 0.0;
  };
  std::map<Category, Tally> tallies;
  for (const QueryPrediction& pred : predictions) {
    if (pred.ranking.empty()) {
      throw data_error("query " + std::to_string(pred.id) + ": empty ranking");
    }
    Tally& t = tallies[pred.category];
    t.queries += 1;
    const size_t top_k = std::min<size_t>(5, pred.ranking.size());
    for (size_t k = 0; k < top_k; ++k) {
      if (pred.ranking[k] == pred.gt_main) {
        t.hits5 += 1;
        if (k == 0) t.hits1 += 1;
        break;
      }
    }
    t.iou_sum += iou(segments.segment(pred.ranking[0]),
                     segments.segment(pred.gt_main));
  }
  EvaluationReport report;
  for (Category c : category_order()) {
    auto it = tallies.find(c);
    if (it == tallies.end()) continue;
    const Tally& t = it->second;
    MetricRow row;
    row.name = category_display_name(c);
    row.queries = t.queries;
    row.r_at_1 = 100.0 * t.hits1 / t.queries;
    row.r_at_5 = 100.0 * t.hits5 / t.queries;
    row.miou = 100.0 * t.iou_sum / t.queries;
    report.per_category.push_back(row);
  }
  report.average.name = "Average";
  for (const MetricRow& row : report.per_category) {
    report.average.queries += row.queries;
    report.average.r_at_1 += row.r_at_1;
    report.average.r_at_5 += row.r_at_5;
    report.average.miou += row.miou;
  }
  const double n = static_cast<double>(report.per_category.size());
  report.average.r_at_1 /= n;
  report.average.r_at_5 /= n;
  report.average.miou /= n;
  return report;
}

std::vector<int> frequency_prior(std::span<const int> train_gt_mains,
                                 const SegmentSet& segments) {
  if (train_gt_mains.empty()) {
    throw data_error("frequency prior: empty training set");
  }
  std::vector<int> counts(static_cast<size_t>(segments.count()), 0);
  for (int index : train_gt_mains) {
    if (index < 0 || index >= segments.count()) {
      throw data_error("frequency prior: segment index out of range");
    }
    counts[static_cast<size_t>(index)] += 1;
  }
  std::vector<int> order(static_cast<size_t>(segments.count()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return counts[static_cast<size_t>(a)] > counts[static_cast<size_t>(b)];
  });
  return order;
}

std::string format_report_table(const EvaluationReport& report,
                                bool per_category) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %8s\n", "category",
                "queries", "R@1", "R@5", "mIoU");
  out << line;
  auto emit = [&](const MetricRow& row, bool show_queries) {
    if (show_queries) {
      std::snprintf(line, sizeof line, "%-10s %8d %8.2f %8.2f %8.2f\n",
                    row.name.c_str(), row.queries, row.r_at_1, row.r_at_5,
                    row.miou);
    } else {
      std::snprintf(line, sizeof line, "%-10s %8s %8.2f %8.2f %8.2f\n",
                    row.name.c_str(), "-", row.r_at_1, row.r_at_5, row.miou);
    }
    out << line;
  };
  if (per_category) {
    for (const MetricRow& row : report.per_category) emit(row, true);
  }
  emit(report.average, false);
  return out.str();
}

std::string report_to_json(const EvaluationReport& report, bool per_category) {
  nlohmann::json j;
  auto row_json = [](const MetricRow& row) {
    return nlohmann::json{{"category", row.name},
                          {"queries", row.queries},
                          {"R@1", row.r_at_1},
                          {"R@5", row.r_at_5},
                          {"mIoU", row.miou}};
  };
  if (per_category) {
    j["per_category"] = nlohmann::json::array();
    for (const MetricRow& row : report.per_category) {
      j["per_category"].push_back(row_json(row));
    }
  }
  j["average"] = row_json(report.average);
  return j.dump(2);
}

}  // namespace tcmn
