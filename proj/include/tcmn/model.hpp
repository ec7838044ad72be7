#ifndef TCMN_MODEL_HPP
#define TCMN_MODEL_HPP

#include <filesystem>
#include <string>

#include "tcmn/matching.hpp"
#include "tcmn/video.hpp"

namespace tcmn {

// One stream: a full parameter set bound to a (main, context) modality pair.
struct ModelConfig {
  Modality main_modality = Modality::kRgb;
  Modality context_modality = Modality::kRgb;
  int hidden = 256;
  int label_dim = 16;
  int word_dim = 0;          // from the embedding file
  int main_feat_dim = 0;     // from the feature files
  int context_feat_dim = 0;
  uint64_t seed = 0;

  int feat_dim(Modality m) const {
    return m == main_modality ? main_feat_dim : context_feat_dim;
  }
};

// Creates every trainable tensor: tree-LSTM gates, label attention, and the
// four scoring heads.
template <typename T>
void init_model_params(ParameterStore<T>& store, const ModelConfig& config,
                       int label_count, Rng& rng);

// Everything the forward pass produces for one (query, video) pair.
template <typename T>
struct ScoreGraph {
  PhraseEmbeddings<T> phrases;
  LocalizationScores<T> localization;
  Value relationship;  // s^rel, P x P
  Value combined;      // s = s^loc + s^rel
};

// Builds the full scoring graph. Feature tables are the pooled P x D
// segment features for the stream's main and context modalities.
template <typename T>
ScoreGraph<T> build_score_graph(Graph<T>& graph, ParameterStore<T>& store,
                                const ParseTree& tree,
                                const WordEmbeddings& words,
                                const Vocabulary& labels,
                                const Tensor<T>& feats_main,
                                const Tensor<T>& feats_context,
                                const SegmentSet& segments);

// A trained (or freshly initialized) stream with its vocabulary, usable for
// scoring and persistable as a checkpoint directory:
//   model.tcmn   parameter tensors ("TCMN1" format)
//   model.json   stream configuration
//   labels.tsv   label vocabulary
class StreamModel {
 public:
  StreamModel(ModelConfig config, Vocabulary labels);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& labels() const { return labels_; }
  ParameterStore<float>& params() { return params_; }
  const ParameterStore<float>& params() const { return params_; }

  struct ScoreResult {
    Tensor<float> combined;          // s
    Tensor<float> localization;      // s^loc
    Tensor<float> relationship;      // s^rel
    Tensor<float> attn_main;         // segment attention, P x 1
    Tensor<float> attn_context;      // P x 1
    std::vector<double> node_attn_main;     // by node id
    std::vector<double> node_attn_context;  // by node id
    std::vector<double> node_attn_signal;   // by node id
  };

  // Forward-only scoring of one query against pooled segment features.
  ScoreResult score(const ParseTree& tree, const WordEmbeddings& words,
                    const Tensor<float>& feats_main,
                    const Tensor<float>& feats_context,
                    const SegmentSet& segments) const;

  void save(const std::filesystem::path& dir) const;
  static StreamModel load(const std::filesystem::path& dir);

 private:
  ModelConfig config_;
  Vocabulary labels_;
  ParameterStore<float> params_;
};

}  // namespace tcmn

#endif  // TCMN_MODEL_HPP
