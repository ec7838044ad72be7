#ifndef TCMN_PIPELINE_HPP
#define TCMN_PIPELINE_HPP

#include <filesystem>
#include <string>

#include "tcmn/ensemble.hpp"
#include "tcmn/eval.hpp"
#include "tcmn/io.hpp"
#include "tcmn/training.hpp"

namespace tcmn {

// End-to-end commands behind the CLI and the shared-library API. Each
// function validates its inputs and either completes or throws an Error.

// Trains one stream on the manifest's train split and writes the
// checkpoint directory plus loss_log.csv into out_dir.
void run_train(const std::filesystem::path& manifest_path,
               const StreamConfig& config,
               const std::filesystem::path& out_dir);

// Scores every query of a split and writes a score dump ("TCMNSCORE1").
void run_score(const std::filesystem::path& checkpoint_dir,
               const std::filesystem::path& manifest_path,
               const std::string& split, const std::filesystem::path& out_path);

// Scores a split in memory; query ids ascending.
ScoreFile score_split(const StreamModel& model, const DatasetBundle& data);

// Grid-searches fusion weights on the validation split and writes the
// weights JSON. score_paths follow the canonical stream order
// (RGB,RGB), (RGB,Flow), (Flow,RGB), (Flow,Flow).
EnsembleWeights run_fuse(const std::vector<std::filesystem::path>& score_paths,
                         const std::filesystem::path& val_manifest_path,
                         const std::string& split, double step,
                         const std::filesystem::path& out_path);

// Applies fusion weights to four aligned score dumps and writes the fused
// dump.
void run_apply_fusion(const std::vector<std::filesystem::path>& score_paths,
                      const EnsembleWeights& weights,
                      const std::filesystem::path& out_path);

struct EvalOptions {
  std::string split = "test";
  bool per_category = false;
  bool with_frequency_prior = false;
};

struct EvalOutput {
  EvaluationReport report;
  std::string table;
  std::string json;
};

// Evaluates a score dump against a split's ground truth. The frequency
// prior baseline, when requested, ranks by train-split frequencies.
EvalOutput run_eval(const std::filesystem::path& scores_path,
                    const std::filesystem::path& manifest_path,
                    const EvalOptions& options);

// Scores one ad-hoc query against one video; returns JSON with the top-k
// (main, context) pairs.
std::string run_predict(const StreamModel& model,
                        const std::filesystem::path& manifest_path,
                        const std::string& tree_text, const std::string& video,
                        int top_k);
std::string run_predict(const std::filesystem::path& checkpoint_dir,
                        const std::filesystem::path& manifest_path,
                        const std::string& tree_text, const std::string& video,
                        int top_k);

// Node and segment attentions plus top pairs for one annotated query.
std::string run_inspect_attention(const StreamModel& model,
                                  const std::filesystem::path& manifest_path,
                                  const std::string& split, int64_t query_id);
std::string run_inspect_attention(const std::filesystem::path& checkpoint_dir,
                                  const std::filesystem::path& manifest_path,
                                  const std::string& split, int64_t query_id);

}  // namespace tcmn

#endif  // TCMN_PIPELINE_HPP
