#ifndef TCMN_EVAL_HPP
#define TCMN_EVAL_HPP

#include <span>
#include <string>
#include <vector>

#include "tcmn/data.hpp"
#include "tcmn/tensor.hpp"
#include "tcmn/video.hpp"

namespace tcmn {

// |clip intersection| / |clip union| over inclusive spans.
double iou(const Segment& a, const Segment& b);

// Main segments i ordered by max_j s_ij descending, ties toward the lower
// index. Returns all P distinct indices.
std::vector<int> rank_main_segments(const Tensor<float>& scores);

struct QueryPrediction {
  int64_t id = 0;
  Category category = Category::kDidemo;
  std::vector<int> ranking;  // distinct main-segment indices, best first
  int gt_main = 0;
};

struct MetricRow {
  std::string name;
  int queries = 0;
  double r_at_1 = 0.0;  // percent
  double r_at_5 = 0.0;  // percent
  double miou = 0.0;    // percent
};

struct EvaluationReport {
  std::vector<MetricRow> per_category;  // canonical category order
  MetricRow average;                    // mean over present categories
};

EvaluationReport evaluate(std::span<const QueryPrediction> predictions,
                          const SegmentSet& segments);

// Segments ranked by how often they are the ground-truth main segment in
// training, descending; ties toward the lower index. The same ranking is
// applied to every query.
std::vector<int> frequency_prior(std::span<const int> train_gt_mains,
                                 const SegmentSet& segments);

std::string format_report_table(const EvaluationReport& report,
                                bool per_category);
std::string report_to_json(const EvaluationReport& report, bool per_category);

}  // namespace tcmn

#endif  // TCMN_EVAL_HPP
