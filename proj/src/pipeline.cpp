#include "tcmn/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "tcmn/error.hpp"

namespace tcmn {

using nlohmann::json;

namespace {

struct PooledFeatures {
  Tensor<float> main;
  Tensor<float> context;
};

PooledFeatures pool_for_stream(const DatasetBundle& data,
                               const std::string& video,
                               const ModelConfig& config,
                               const SegmentSet& segments) {
  return PooledFeatures{
      pool_segment_features(data.clip_features(video, config.main_modality),
                            segments),
      pool_segment_features(
          data.clip_features(video, config.context_modality), segments)};
}

// Ground-truth main-segment index per query id.
std::map<int64_t, std::pair<int, Category>> ground_truth_index(
    const DatasetBundle& data, const SegmentSet& segments) {
  std::map<int64_t, std::pair<int, Category>> out;
  for (const TrainingExample& e : data.examples) {
    out[e.id] = {segments.index_of(e.main_segment), e.category};
  }
  return out;
}

}  // namespace

void run_train(const std::filesystem::path& manifest_path,
               const StreamConfig& config,
               const std::filesystem::path& out_dir) {
  const Manifest manifest = Manifest::load(manifest_path);
  const DatasetBundle data = load_dataset(manifest, "train");
  const TrainResult result = train_stream(data, config);
  result.model.save(out_dir);
  save_loss_log((out_dir / "loss_log.csv").string(), result.log);
}

ScoreFile score_split(const StreamModel& model, const DatasetBundle& data) {
  const SegmentSet segments(data.clip_count);
  std::vector<const TrainingExample*> ordered;
  for (const TrainingExample& e : data.examples) ordered.push_back(&e);
  std::sort(ordered.begin(), ordered.end(),
            [](const TrainingExample* a, const TrainingExample* b) {
              return a->id < b->id;
            });
  ScoreFile out;
  out.segment_count = segments.count();
  for (const TrainingExample* e : ordered) {
    const PooledFeatures pooled =
        pool_for_stream(data, e->video, model.config(), segments);
    auto scored = model.score(data.tree_for(*e), data.embeddings, pooled.main,
                              pooled.context, segments);
    out.query_ids.push_back(static_cast<uint32_t>(e->id));
    out.matrices.push_back(std::move(scored.combined));
  }
  return out;
}

void run_score(const std::filesystem::path& checkpoint_dir,
               const std::filesystem::path& manifest_path,
               const std::string& split,
               const std::filesystem::path& out_path) {
  const StreamModel model = StreamModel::load(checkpoint_dir);
  const Manifest manifest = Manifest::load(manifest_path);
  const DatasetBundle data = load_dataset(manifest, split);
  save_scores(out_path.string(), score_split(model, data));
}

namespace {

std::array<ScoreFile, kStreamCount> load_aligned_scores(
    const std::vector<std::filesystem::path>& score_paths) {
  if (score_paths.size() != kStreamCount) {
    throw usage_error("expected " + std::to_string(kStreamCount) +
                      " score files in stream order, got " +
                      std::to_string(score_paths.size()));
  }
  std::array<ScoreFile, kStreamCount> files;
  for (size_t n = 0; n < kStreamCount; ++n) {
    files[n] = load_scores(score_paths[n].string());
    if (files[n].segment_count != files[0].segment_count ||
        files[n].query_ids != files[0].query_ids) {
      throw data_error("score files disagree on queries or P: " +
                       score_paths[n].string());
    }
  }
  return files;
}

}  // namespace

EnsembleWeights run_fuse(const std::vector<std::filesystem::path>& score_paths,
                         const std::filesystem::path& val_manifest_path,
                         const std::string& split, double step,
                         const std::filesystem::path& out_path) {
  const auto files = load_aligned_scores(score_paths);
  const Manifest manifest = Manifest::load(val_manifest_path);
  const DatasetBundle data = load_dataset(manifest, split);
  const SegmentSet segments(data.clip_count);
  if (segments.count() != files[0].segment_count) {
    throw data_error("score files and manifest disagree on P");
  }
  const auto gt = ground_truth_index(data, segments);
  std::vector<FusionQuery> queries;
  for (size_t k = 0; k < files[0].query_ids.size(); ++k) {
    const int64_t id = files[0].query_ids[k];
    auto it = gt.find(id);
    if (it == gt.end()) {
      throw data_error("query " + std::to_string(id) +
                       " from the score files is not in split '" + split +
                       "'");
    }
    FusionQuery q;
    q.id = id;
    q.gt_main = it->second.first;
    q.category = it->second.second;
    for (size_t n = 0; n < kStreamCount; ++n) {
      q.matrices[n] = files[n].matrices[k];
    }
    queries.push_back(std::move(q));
  }
  const EnsembleWeights weights = grid_search_weights(queries, segments, step);
  weights.save(out_path.string());
  return weights;
}

void run_apply_fusion(const std::vector<std::filesystem::path>& score_paths,
                      const EnsembleWeights& weights,
                      const std::filesystem::path& out_path) {
  const auto files = load_aligned_scores(score_paths);
  ScoreFile fused;
  fused.segment_count = files[0].segment_count;
  fused.query_ids = files[0].query_ids;
  for (size_t k = 0; k < files[0].query_ids.size(); ++k) {
    fused.matrices.push_back(late_fusion({&files[0].matrices[k],
                                          &files[1].matrices[k],
                                          &files[2].matrices[k],
                                          &files[3].matrices[k]},
                                         weights));
  }
  save_scores(out_path.string(), fused);
}

EvalOutput run_eval(const std::filesystem::path& scores_path,
                    const std::filesystem::path& manifest_path,
                    const EvalOptions& options) {
  const ScoreFile scores = load_scores(scores_path.string());
  const Manifest manifest = Manifest::load(manifest_path);
  const DatasetBundle data = load_dataset(manifest, options.split);
  const SegmentSet segments(data.clip_count);
  if (segments.count() != scores.segment_count) {
    throw data_error("score file P=" + std::to_string(scores.segment_count) +
                     " does not match the dataset's " +
                     std::to_string(segments.count()) + " segments");
  }
  const auto gt = ground_truth_index(data, segments);
  std::vector<QueryPrediction> predictions;
  for (size_t k = 0; k < scores.query_ids.size(); ++k) {
    const int64_t id = scores.query_ids[k];
    auto it = gt.find(id);
    if (it == gt.end()) {
      throw data_error("query " + std::to_string(id) +
                       " from the score file is not in split '" +
                       options.split + "'");
    }
    if (!scores.matrices[k].finite()) {
      throw numeric_error("query " + std::to_string(id) +
                          ": score matrix contains NaN/Inf");
    }
    predictions.push_back(QueryPrediction{
        id, it->second.second, rank_main_segments(scores.matrices[k]),
        it->second.first});
  }
  EvalOutput out;
  out.report = evaluate(predictions, segments);
  out.table = format_report_table(out.report, options.per_category);
  json j = json::parse(report_to_json(out.report, options.per_category));
  if (options.with_frequency_prior) {
    const DatasetBundle train = load_dataset(manifest, "train");
    const SegmentSet train_segments(train.clip_count);
    std::vector<int> gts;
    for (const TrainingExample& e : train.examples) {
      gts.push_back(train_segments.index_of(e.main_segment));
    }
    const std::vector<int> prior = frequency_prior(gts, segments);
    std::vector<QueryPrediction> baseline = predictions;
    for (QueryPrediction& q : baseline) q.ranking = prior;
    const EvaluationReport prior_report = evaluate(baseline, segments);
    out.table += "\nfrequency prior baseline:\n" +
                 format_report_table(prior_report, options.per_category);
    j["frequency_prior"] =
        json::parse(report_to_json(prior_report, options.per_category));
  }
  out.json = j.dump(2);
  return out;
}

namespace {

json top_pairs_json(const StreamModel::ScoreResult& scored,
                    const SegmentSet& segments, int top_k) {
  struct Entry {
    float score;
    int i, j;
  };
  std::vector<Entry> entries;
  const int p = segments.count();
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      entries.push_back({scored.combined.at(i, j), i, j});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) {
                     return a.score > b.score;
                   });
  json pairs = json::array();
  const int limit = std::min<int>(top_k, static_cast<int>(entries.size()));
  for (int k = 0; k < limit; ++k) {
    const Entry& e = entries[static_cast<size_t>(k)];
    const Segment& main = segments.segment(e.i);
    const Segment& context = segments.segment(e.j);
    pairs.push_back(json{
        {"rank", k + 1},
        {"main_segment", {main.start, main.end}},
        {"context_segment", {context.start, context.end}},
        {"main_index", e.i},
        {"context_index", e.j},
        {"s", scored.combined.at(e.i, e.j)},
        {"s_loc", scored.localization.at(e.i, e.j)},
        {"s_rel", scored.relationship.at(e.i, e.j)},
    });
  }
  return pairs;
}

}  // namespace

std::string run_predict(const std::filesystem::path& checkpoint_dir,
                        const std::filesystem::path& manifest_path,
                        const std::string& tree_text, const std::string& video,
                        int top_k) {
  return run_predict(StreamModel::load(checkpoint_dir), manifest_path,
                     tree_text, video, top_k);
}

std::string run_predict(const StreamModel& model,
                        const std::filesystem::path& manifest_path,
                        const std::string& tree_text, const std::string& video,
                        int top_k) {
  const Manifest manifest = Manifest::load(manifest_path);
  auto it = manifest.features.find(video);
  if (it == manifest.features.end()) {
    throw data_error("video '" + video + "' is not in the manifest");
  }
  const ParseTree tree = parse_bracketed(tree_text);
  const FeatureFile rgb = load_features(it->second.first.string());
  const FeatureFile flow = load_features(it->second.second.string());
  if (rgb.clip_features.rows != flow.clip_features.rows) {
    throw data_error("video '" + video +
                     "': rgb and flow disagree on clip count");
  }
  const WordEmbeddings words = WordEmbeddings::load(manifest.embeddings.string());
  const SegmentSet segments(rgb.clip_features.rows);
  const Tensor<float>& main_clips =
      model.config().main_modality == Modality::kRgb ? rgb.clip_features
                                                     : flow.clip_features;
  const Tensor<float>& ctx_clips =
      model.config().context_modality == Modality::kRgb ? rgb.clip_features
                                                        : flow.clip_features;
  const auto scored = model.score(
      tree, words, pool_segment_features(main_clips, segments),
      pool_segment_features(ctx_clips, segments), segments);
  json j{
      {"video", video},
      {"tree", serialize(tree)},
      {"P", segments.count()},
      {"top_pairs", top_pairs_json(scored, segments, top_k)},
  };
  return j.dump(2);
}

std::string run_inspect_attention(const std::filesystem::path& checkpoint_dir,
                                  const std::filesystem::path& manifest_path,
                                  const std::string& split, int64_t query_id) {
  return run_inspect_attention(StreamModel::load(checkpoint_dir),
                               manifest_path, split, query_id);
}

std::string run_inspect_attention(const StreamModel& model,
                                  const std::filesystem::path& manifest_path,
                                  const std::string& split, int64_t query_id) {
  const Manifest manifest = Manifest::load(manifest_path);
  const DatasetBundle data = load_dataset(manifest, split);
  const TrainingExample* example = nullptr;
  for (const TrainingExample& e : data.examples) {
    if (e.id == query_id) {
      example = &e;
      break;
    }
  }
  if (example == nullptr) {
    throw data_error("query id " + std::to_string(query_id) +
                     " is not in split '" + split + "'");
  }
  const SegmentSet segments(data.clip_count);
  const PooledFeatures pooled =
      pool_for_stream(data, example->video, model.config(), segments);
  const ParseTree& tree = data.tree_for(*example);
  const auto scored = model.score(tree, data.embeddings, pooled.main,
                                  pooled.context, segments);

  json nodes = json::array();
  for (int id = 0; id < tree.node_count(); ++id) {
    const TreeNode& n = tree.node(id);
    json node{
        {"id", id},
        {"label", n.label},
        {"alpha_m", scored.node_attn_main[static_cast<size_t>(id)]},
        {"alpha_c", scored.node_attn_context[static_cast<size_t>(id)]},
        {"alpha_s", scored.node_attn_signal[static_cast<size_t>(id)]},
    };
    if (n.is_leaf()) node["token"] = n.token;
    nodes.push_back(std::move(node));
  }
  json segment_attention{
      {"main", json::array()},
      {"context", json::array()},
  };
  for (int i = 0; i < segments.count(); ++i) {
    segment_attention["main"].push_back(
        scored.attn_main.data[static_cast<size_t>(i)]);
    segment_attention["context"].push_back(
        scored.attn_context.data[static_cast<size_t>(i)]);
  }
  json j{
      {"query_id", query_id},
      {"video", example->video},
      {"category", category_name(example->category)},
      {"tree", serialize(tree)},
      {"nodes", nodes},
      {"node_attention_note",
       "alpha_m / alpha_c / alpha_s are the main-event, context-event and "
       "temporal-signal node attentions"},
      {"segment_attention", segment_attention},
      {"top_pairs", top_pairs_json(scored, segments, 5)},
  };
  return j.dump(2);
}

}  // namespace tcmn
