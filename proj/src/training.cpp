#include "tcmn/training.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "tcmn/error.hpp"

namespace tcmn {

template <typename T>
LossValues<T> ranking_loss_graph(Graph<T>& graph, Value scores, int p, int q,
                                 const LossConfig& config) {
  const int n = graph.rows(scores);
  if (graph.cols(scores) != n) throw numeric_error("loss: scores not square");
  if (p < 0 || p >= n || q < 0 || q >= n) {
    throw usage_error("loss: ground-truth index out of range");
  }
  if (config.margin_main < 0 || config.margin_context < 0) {
    throw usage_error("loss: margins must be >= 0");
  }
  auto masked_hinge_mean = [&](Value diffs, T margin, int excluded, bool row) {
    // mean over P of max(0, diffs + margin) with one entry masked out;
    // mean() divides by P, giving the 1/|N| normalization.
    Tensor<T> mask(row ? 1 : n, row ? n : 1, T(1));
    mask.data[static_cast<size_t>(excluded)] = T(0);
    Value h = graph.hinge(graph.add_scalar(diffs, margin));
    return graph.mean(graph.mul(h, graph.constant(std::move(mask))));
  };

  LossValues<T> out;
  {
    // L^m: every row's best pair must trail row p's best by the margin.
    const Value row_max = graph.max_axis(scores, 1);  // P x 1
    const Value best_p =
        graph.matmul(graph.one_hot_row(n, p), row_max);  // 1 x 1
    const Value broadcast =
        graph.matmul(graph.ones(n, 1), graph.scale(best_p, T(-1)));
    const Value diffs = graph.add(row_max, broadcast);  // P x 1
    out.main = masked_hinge_mean(diffs, static_cast<T>(config.margin_main), p,
                                 false);
  }
  {
    // L^c: within row p, the annotated context must win by the margin.
    const Value row_p = graph.matmul(graph.one_hot_row(n, p), scores);  // 1 x P
    const Value s_pq = graph.matmul(row_p, graph.one_hot_col(n, q));    // 1 x 1
    const Value broadcast =
        graph.matmul(graph.scale(s_pq, T(-1)), graph.ones(1, n));
    const Value diffs = graph.add(row_p, broadcast);  // 1 x P
    out.context = masked_hinge_mean(
        diffs, static_cast<T>(config.margin_context), q, true);
  }
  out.total =
      graph.add(out.main, graph.scale(out.context,
                                      static_cast<T>(config.lambda)));
  return out;
}

LossTriple ranking_loss(const Tensor<double>& scores, int p, int q,
                        const LossConfig& config) {
  Graph<double> graph;
  LossValues<double> values =
      ranking_loss_graph(graph, graph.constant(scores), p, q, config);
  return LossTriple{graph.value(values.main).data[0],
                    graph.value(values.context).data[0],
                    graph.value(values.total).data[0]};
}

int resolve_context(const TrainingExample& example,
                    const SegmentSet& segments) {
  if (example.context_segment.has_value()) {
    return segments.index_of(*example.context_segment);
  }
  return segments.whole_video_index();
}

TrainResult train_stream(const DatasetBundle& data,
                         const StreamConfig& config) {
  if (data.examples.empty()) throw data_error("train: no examples");

  std::vector<ParseTree> trees_used;
  for (const TrainingExample& e : data.examples) {
    trees_used.push_back(data.tree_for(e));
  }
  Vocabularies vocabs = build_vocabularies(trees_used);

  const SegmentSet segments(data.clip_count);
  ModelConfig model_config;
  model_config.main_modality = config.main_modality;
  model_config.context_modality = config.context_modality;
  model_config.hidden = config.hidden;
  model_config.label_dim = config.label_dim;
  model_config.word_dim = data.embeddings.dim();
  model_config.seed = config.seed;
  {
    const auto& first = data.features.begin()->second;
    const Tensor<float>& main_feats =
        config.main_modality == Modality::kRgb ? first.rgb : first.flow;
    const Tensor<float>& ctx_feats =
        config.context_modality == Modality::kRgb ? first.rgb : first.flow;
    model_config.main_feat_dim = main_feats.cols;
    model_config.context_feat_dim = ctx_feats.cols;
  }
  TrainResult result{StreamModel(model_config, vocabs.labels), {}};

  // Segment features pooled once per video per modality.
  std::map<std::string, std::pair<Tensor<float>, Tensor<float>>> pooled;
  for (const auto& [video, feats] : data.features) {
    pooled.emplace(
        video,
        std::make_pair(
            pool_segment_features(config.main_modality == Modality::kRgb
                                      ? feats.rgb
                                      : feats.flow,
                                  segments),
            pool_segment_features(config.context_modality == Modality::kRgb
                                      ? feats.rgb
                                      : feats.flow,
                                  segments)));
  }

  Rng shuffle_rng(Rng::mix(config.seed, 0x5ca1ab1e));
  std::vector<size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng epoch_rng = shuffle_rng.fork(static_cast<uint64_t>(epoch));
    epoch_rng.shuffle(order.begin(), order.end());
    double sum_total = 0.0, sum_main = 0.0, sum_context = 0.0;
    for (size_t index : order) {
      const TrainingExample& example = data.examples[index];
      const auto pooled_it = pooled.find(example.video);
      if (pooled_it == pooled.end()) {
        throw data_error("train: query " + std::to_string(example.id) +
                         ": missing features for video " + example.video);
      }
      if (example.tree_line < 0 ||
          example.tree_line >= static_cast<int>(data.trees.size())) {
        throw data_error("train: query " + std::to_string(example.id) +
                         ": missing tree line " +
                         std::to_string(example.tree_line));
      }
      const int p = segments.index_of(example.main_segment);
      const int q = resolve_context(example, segments);

      Graph<float> graph;
      ScoreGraph<float> sg = build_score_graph(
          graph, result.model.params(), data.tree_for(example),
          data.embeddings, result.model.labels(), pooled_it->second.first,
          pooled_it->second.second, segments);
      LossValues<float> loss =
          ranking_loss_graph(graph, sg.combined, p, q, config.loss);
      const double total = graph.value(loss.total).data[0];
      if (!std::isfinite(total)) {
        throw numeric_error("train: non-finite loss on query " +
                            std::to_string(example.id) + " in epoch " +
                            std::to_string(epoch));
      }
      sum_total += total;
      sum_main += graph.value(loss.main).data[0];
      sum_context += graph.value(loss.context).data[0];
      graph.backward(loss.total);
      adam_step(result.model.params(), graph.parameter_gradients(),
                config.adam);
    }
    const double count = static_cast<double>(data.examples.size());
    result.log.push_back(EpochStats{epoch, sum_total / count,
                                    sum_main / count, sum_context / count});
  }
  return result;
}

void save_loss_log(const std::string& path,
                   const std::vector<EpochStats>& log) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write loss log " + path);
  out << "epoch,mean_loss,mean_Lm,mean_Lc\n";
  out.precision(10);
  for (const EpochStats& row : log) {
    out << row.epoch << ',' << row.mean_loss << ',' << row.mean_main << ','
        << row.mean_context << '\n';
  }
}

template LossValues<float> ranking_loss_graph<float>(Graph<float>&, Value, int,
                                                     int, const LossConfig&);
template LossValues<double> ranking_loss_graph<double>(Graph<double>&, Value,
                                                       int, int,
                                                       const LossConfig&);

}  // namespace tcmn
