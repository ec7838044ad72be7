#include "tcmn/ensemble.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "tcmn/error.hpp"
#include "tcmn/eval.hpp"

namespace tcmn {

std::array<std::pair<Modality, Modality>, kStreamCount> stream_order() {
  return {{{Modality::kRgb, Modality::kRgb},
           {Modality::kRgb, Modality::kFlow},
           {Modality::kFlow, Modality::kRgb},
           {Modality::kFlow, Modality::kFlow}}};
}

namespace {

std::string pretty(Modality m) { return m == Modality::kRgb ? "RGB" : "Flow"; }

}  // namespace

std::string stream_label(int index) {
  const auto [main, context] = stream_order()[static_cast<size_t>(index)];
  return "(" + pretty(main) + "," + pretty(context) + ")";
}

int stream_index(Modality main, Modality context) {
  const auto order = stream_order();
  for (int i = 0; i < kStreamCount; ++i) {
    if (order[static_cast<size_t>(i)] == std::make_pair(main, context)) {
      return i;
    }
  }
  throw usage_error("bad stream pair");
}

void EnsembleWeights::validate() const {
  double sum = 0.0;
  for (double g : gamma) {
    if (g < 0.0) throw usage_error("fusion weights must be nonnegative");
    sum += g;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw usage_error("fusion weights must sum to 1 (got " +
                      std::to_string(sum) + ")");
  }
}

void EnsembleWeights::save(const std::string& path) const {
  validate();
  nlohmann::json j;
  for (int i = 0; i < kStreamCount; ++i) {
    j[stream_label(i)] = gamma[static_cast<size_t>(i)];
  }
  std::ofstream out(path);
  if (!out) throw data_error("cannot write weights file " + path);
  out << j.dump(2) << '\n';
}

EnsembleWeights EnsembleWeights::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read weights file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
  EnsembleWeights w;
  try {
    for (int i = 0; i < kStreamCount; ++i) {
      w.gamma[static_cast<size_t>(i)] = j.at(stream_label(i)).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
  w.validate();
  return w;
}

Tensor<float> late_fusion(
    const std::array<const Tensor<float>*, kStreamCount>& matrices,
    const EnsembleWeights& weights) {
  weights.validate();
  for (const Tensor<float>* m : matrices) {
    if (m == nullptr) throw usage_error("late fusion: missing matrix");
    if (!m->same_shape(*matrices[0])) {
      throw usage_error("late fusion: matrices differ in shape");
    }
  }
  // Zero-weight streams are skipped entirely so a one-hot gamma reproduces
  // the selected stream bit-for-bit (1.0 * x == x in IEEE arithmetic).
  Tensor<float> out;
  bool first = true;
  for (int n = 0; n < kStreamCount; ++n) {
    const double g = weights.gamma[static_cast<size_t>(n)];
    if (g == 0.0) continue;
    const Tensor<float>& m = *matrices[static_cast<size_t>(n)];
    if (first) {
      out = Tensor<float>(m.rows, m.cols);
      for (int i = 0; i < m.size(); ++i) {
        out.data[i] = static_cast<float>(g) * m.data[i];
      }
      first = false;
    } else {
      for (int i = 0; i < m.size(); ++i) {
        out.data[i] += static_cast<float>(g) * m.data[i];
      }
    }
  }
  return out;
}

std::vector<EnsembleWeights> fusion_weight_grid(double step) {
  if (step <= 0.0 || step > 1.0) throw usage_error("fusion step must be in (0, 1]");
  const double units_f = 1.0 / step;
  const int units = static_cast<int>(std::lround(units_f));
  if (std::abs(units_f - units) > 1e-9) {
    throw usage_error("fusion step must divide 1");
  }
  std::vector<EnsembleWeights> grid;
  // Ascending lexicographic order of the weight vector.
  for (int a = 0; a <= units; ++a) {
    for (int b = 0; a + b <= units; ++b) {
      for (int c = 0; a + b + c <= units; ++c) {
        const int d = units - a - b - c;
        EnsembleWeights w;
        w.gamma = {static_cast<double>(a) / units,
                   static_cast<double>(b) / units,
                   static_cast<double>(c) / units,
                   static_cast<double>(d) / units};
        grid.push_back(w);
      }
    }
  }
  return grid;
}

EnsembleWeights grid_search_weights(const std::vector<FusionQuery>& queries,
                                    const SegmentSet& segments, double step) {
  if (queries.empty()) throw data_error("grid search: empty validation set");
  const std::vector<EnsembleWeights> grid = fusion_weight_grid(step);
  EnsembleWeights best = grid.front();
  double best_score = -1.0;
  std::vector<QueryPrediction> predictions(queries.size());
  for (const EnsembleWeights& w : grid) {
    for (size_t i = 0; i < queries.size(); ++i) {
      const FusionQuery& q = queries[i];
      const Tensor<float> fused = late_fusion(
          {&q.matrices[0], &q.matrices[1], &q.matrices[2], &q.matrices[3]}, w);
      predictions[i] = QueryPrediction{q.id, q.category,
                                       rank_main_segments(fused), q.gt_main};
    }
    const double score = evaluate(predictions, segments).average.r_at_1;
    if (score > best_score) {
      best_score = score;
      best = w;
    }
  }
  return best;
}

}  // namespace tcmn
