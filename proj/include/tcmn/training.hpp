#ifndef TCMN_TRAINING_HPP
#define TCMN_TRAINING_HPP

#include <optional>
#include <string>
#include <vector>

#include "tcmn/data.hpp"
#include "tcmn/model.hpp"

namespace tcmn {

struct LossConfig {
  double margin_main = 0.1;     // M^m
  double margin_context = 0.1;  // M^c
  double lambda = 1.0;
};

// Margin ranking losses over the P x P pair-score matrix:
//   L^m = 1/P * sum_{i != p} max(0, max_j s_ij - max_k s_pk + M^m)
//   L^c = 1/P * sum_{i != q} max(0, s_pi - s_pq + M^c)
//   L   = L^m + lambda * L^c
// The i=p / i=q terms are excluded; they would only add a constant floor.
template <typename T>
struct LossValues {
  Value main;
  Value context;
  Value total;
};

template <typename T>
LossValues<T> ranking_loss_graph(Graph<T>& graph, Value scores, int p, int q,
                                 const LossConfig& config);

struct LossTriple {
  double main = 0.0;
  double context = 0.0;
  double total = 0.0;
};

// Standalone evaluation on a plain matrix.
LossTriple ranking_loss(const Tensor<double>& scores, int p, int q,
                        const LossConfig& config);

// The annotated context index, or the whole-video segment for single-event
// queries.
int resolve_context(const TrainingExample& example, const SegmentSet& segments);

struct StreamConfig {
  Modality main_modality = Modality::kRgb;
  Modality context_modality = Modality::kRgb;
  int hidden = 256;
  int label_dim = 16;
  int epochs = 100;
  uint64_t seed = 0;
  AdamConfig adam;
  LossConfig loss;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double mean_main = 0.0;
  double mean_context = 0.0;
};

struct TrainResult {
  StreamModel model;
  std::vector<EpochStats> log;
};

// Trains one stream with per-example Adam steps; examples are reshuffled
// each epoch from the stream seed. Same seed, same data => identical log.
TrainResult train_stream(const DatasetBundle& data, const StreamConfig& config);

void save_loss_log(const std::string& path, const std::vector<EpochStats>& log);

}  // namespace tcmn

#endif  // TCMN_TRAINING_HPP
