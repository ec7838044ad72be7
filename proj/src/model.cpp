#include "tcmn/model.hpp"

#include <fstream>

#include <json.hpp>

#include "tcmn/error.hpp"
#include "tcmn/io.hpp"

namespace tcmn {

template <typename T>
void init_model_params(ParameterStore<T>& store, const ModelConfig& config,
                       int label_count, Rng& rng) {
  init_tree_lstm_params(store, config.word_dim, config.hidden, rng);
  init_tree_attention_params(store, label_count, config.label_dim,
                             config.hidden, rng);
  const int h = config.hidden;
  init_fusion_params(store, "fm",
                     FusionDims{h, config.main_feat_dim, h}, rng);
  init_fusion_params(store, "fc",
                     FusionDims{h, config.context_feat_dim, h}, rng);
  init_fusion_params(
      store, "floc",
      FusionDims{h, config.main_feat_dim + config.context_feat_dim + 4, h},
      rng);
  init_fusion_params(store, "frel", FusionDims{h, 4, h}, rng);
}

template <typename T>
ScoreGraph<T> build_score_graph(Graph<T>& graph, ParameterStore<T>& store,
                                const ParseTree& tree,
                                const WordEmbeddings& words,
                                const Vocabulary& labels,
                                const Tensor<T>& feats_main,
                                const Tensor<T>& feats_context,
                                const SegmentSet& segments) {
  if (feats_main.rows != segments.count() ||
      feats_context.rows != segments.count()) {
    throw numeric_error("score graph: feature tables do not match P");
  }
  ParamBinder<T> bind{&graph, &store};
  ScoreGraph<T> out;
  const int hidden = store.get("lstm.Ui").rows;
  NodeStates<T> states = tree_lstm_encode(graph, tree, words, bind, hidden);
  out.phrases = tree_attention(graph, tree, states, labels, bind);

  const Value main_feats = graph.constant(feats_main);
  const Value context_feats = graph.constant(feats_context);
  const Value locations = graph.constant(location_matrix<T>(segments));
  out.localization = localization_scores(
      graph, out.phrases.main, out.phrases.context, out.phrases.root,
      main_feats, context_feats, locations, bind);
  out.relationship =
      relationship_scores(graph, out.phrases.signal, locations, bind);
  out.combined = combined_scores(graph, out.localization.scores,
                                 out.relationship);
  return out;
}

StreamModel::StreamModel(ModelConfig config, Vocabulary labels)
    : config_(config), labels_(std::move(labels)) {
  Rng rng(config.seed);
  init_model_params(params_, config_, labels_.size(), rng);
}

StreamModel::ScoreResult StreamModel::score(const ParseTree& tree,
                                            const WordEmbeddings& words,
                                            const Tensor<float>& feats_main,
                                            const Tensor<float>& feats_context,
                                            const SegmentSet& segments) const {
  Graph<float> graph;
  // Scoring is read-only; the graph copies parameter values on bind.
  auto& mutable_params = const_cast<ParameterStore<float>&>(params_);
  ScoreGraph<float> sg =
      build_score_graph(graph, mutable_params, tree, words, labels_,
                        feats_main, feats_context, segments);
  ScoreResult r;
  r.combined = graph.value(sg.combined);
  r.localization = graph.value(sg.localization.scores);
  r.relationship = graph.value(sg.relationship);
  r.attn_main = graph.value(sg.localization.attn_main);
  r.attn_context = graph.value(sg.localization.attn_context);
  if (!r.combined.finite()) {
    throw numeric_error("score matrix contains NaN/Inf");
  }
  const auto unmap = [&](Value attn) {
    std::vector<double> by_node(sg.phrases.order.size(), 0.0);
    const Tensor<float>& row = graph.value(attn);
    for (size_t k = 0; k < sg.phrases.order.size(); ++k) {
      by_node[static_cast<size_t>(sg.phrases.order[k])] =
          static_cast<double>(row.data[k]);
    }
    return by_node;
  };
  r.node_attn_main = unmap(sg.phrases.attn_main);
  r.node_attn_context = unmap(sg.phrases.attn_context);
  r.node_attn_signal = unmap(sg.phrases.attn_signal);
  return r;
}

void StreamModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_checkpoint((dir / "model.tcmn").string(), params_);
  labels_.save((dir / "labels.tsv").string());
  nlohmann::json j{
      {"main_modality", modality_name(config_.main_modality)},
      {"context_modality", modality_name(config_.context_modality)},
      {"hidden", config_.hidden},
      {"label_dim", config_.label_dim},
      {"word_dim", config_.word_dim},
      {"main_feat_dim", config_.main_feat_dim},
      {"context_feat_dim", config_.context_feat_dim},
      {"seed", config_.seed},
  };
  std::ofstream out(dir / "model.json");
  if (!out) throw data_error("cannot write " + (dir / "model.json").string());
  out << j.dump(2) << '\n';
}

StreamModel StreamModel::load(const std::filesystem::path& dir) {
  const auto json_path = dir / "model.json";
  std::ifstream in(json_path);
  if (!in) throw data_error("cannot read " + json_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(json_path.string() + ": " + e.what());
  }
  ModelConfig config;
  try {
    config.main_modality = modality_from_name(j.at("main_modality"));
    config.context_modality = modality_from_name(j.at("context_modality"));
    config.hidden = j.at("hidden");
    config.label_dim = j.at("label_dim");
    config.word_dim = j.at("word_dim");
    config.main_feat_dim = j.at("main_feat_dim");
    config.context_feat_dim = j.at("context_feat_dim");
    config.seed = j.at("seed");
  } catch (const nlohmann::json::exception& e) {
    throw data_error(json_path.string() + ": " + e.what());
  }
  StreamModel model(config, Vocabulary::load((dir / "labels.tsv").string()));
  model.params_ = load_checkpoint((dir / "model.tcmn").string());
  return model;
}

template void init_model_params<float>(ParameterStore<float>&,
                                       const ModelConfig&, int, Rng&);
template void init_model_params<double>(ParameterStore<double>&,
                                        const ModelConfig&, int, Rng&);
template ScoreGraph<float> build_score_graph<float>(
    Graph<float>&, ParameterStore<float>&, const ParseTree&,
    const WordEmbeddings&, const Vocabulary&, const Tensor<float>&,
    const Tensor<float>&, const SegmentSet&);
template ScoreGraph<double> build_score_graph<double>(
    Graph<double>&, ParameterStore<double>&, const ParseTree&,
    const WordEmbeddings&, const Vocabulary&, const Tensor<double>&,
    const Tensor<double>&, const SegmentSet&);

}  // namespace tcmn
