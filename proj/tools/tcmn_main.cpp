// Command-line front end. Everything goes through the shared C API in
// tcmn.h; exit codes mirror tcmn_status (0 ok, 1 usage, 2 data error,
// 3 numeric failure).

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcmn.h"

namespace {

int finish(tcmn_status status) {
  if (status != TCMN_OK) {
    std::fprintf(stderr, "error: %s\n", tcmn_last_error());
  }
  return static_cast<int>(status);
}

bool write_file(const std::string& path, const char* contents) {
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    return false;
  }
  out << contents;
  return true;
}

struct TrainOptions {
  std::string manifest, stream, out;
  int hidden = 256;
  int label_dim = 16;
  int epochs = 100;
  uint64_t seed = 0;
  double lr = 0.001;
  double weight_decay = 1e-8;
  double margin_main = 0.1;
  double margin_context = 0.1;
  double lambda = 1.0;

  std::string options_json() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"hidden\":%d,\"label_dim\":%d,\"epochs\":%d,"
                  "\"seed\":%" PRIu64
                  ",\"lr\":%.17g,\"weight_decay\":%.17g,"
                  "\"margin_main\":%.17g,\"margin_context\":%.17g,"
                  "\"lambda\":%.17g}",
                  hidden, label_dim, epochs, seed, lr, weight_decay,
                  margin_main, margin_context, lambda);
    return buf;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TCMN: temporal moment localization with tree attention"};
  app.require_subcommand(1);

  // generate-synth
  std::string synth_spec, synth_out;
  CLI::App* generate = app.add_subcommand(
      "generate-synth", "Generate a synthetic dataset from a spec JSON");
  generate->add_option("--spec", synth_spec, "Synthetic spec JSON")->required();
  generate->add_option("--out", synth_out, "Output directory")->required();

  // train
  TrainOptions train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train one stream on the train split");
  train_cmd->add_option("--manifest", train.manifest, "Dataset manifest")
      ->required();
  train_cmd
      ->add_option("--stream", train.stream,
                   "Modality pair '<main>,<context>', e.g. rgb,flow")
      ->required();
  train_cmd->add_option("--out", train.out, "Checkpoint output directory")
      ->required();
  train_cmd->add_option("--hidden", train.hidden, "Hidden size");
  train_cmd->add_option("--label-dim", train.label_dim,
                        "Label embedding size");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs");
  train_cmd->add_option("--seed", train.seed, "RNG seed");
  train_cmd->add_option("--lr", train.lr, "Adam learning rate");
  train_cmd->add_option("--weight-decay", train.weight_decay, "Weight decay");
  train_cmd->add_option("--margin-main", train.margin_main,
                        "Main-event ranking margin");
  train_cmd->add_option("--margin-context", train.margin_context,
                        "Context-event ranking margin");
  train_cmd->add_option("--lambda", train.lambda, "Context loss weight");

  // score
  std::string score_manifest, score_checkpoint, score_split = "test",
              score_out;
  CLI::App* score_cmd =
      app.add_subcommand("score", "Score every query of a split");
  score_cmd->add_option("--manifest", score_manifest, "Dataset manifest")
      ->required();
  score_cmd->add_option("--checkpoint", score_checkpoint,
                        "Checkpoint directory")
      ->required();
  score_cmd->add_option("--split", score_split, "Split name (default test)");
  score_cmd->add_option("--out", score_out, "Output score dump")->required();

  // fuse
  std::vector<std::string> fuse_scores, fuse_apply;
  std::string fuse_manifest, fuse_split = "val", fuse_out, fuse_fused_out;
  double fuse_step = 0.1;
  CLI::App* fuse_cmd = app.add_subcommand(
      "fuse", "Grid-search fusion weights on validation scores");
  fuse_cmd
      ->add_option("--scores", fuse_scores,
                   "Four validation score dumps in stream order "
                   "(RGB,RGB) (RGB,Flow) (Flow,RGB) (Flow,Flow)")
      ->expected(4)
      ->required();
  fuse_cmd
      ->add_option("--val-manifest", fuse_manifest,
                   "Manifest holding the validation split")
      ->required();
  fuse_cmd->add_option("--split", fuse_split,
                       "Validation split name (default val)");
  fuse_cmd->add_option("--step", fuse_step, "Simplex grid step (default 0.1)");
  fuse_cmd->add_option("--out", fuse_out, "Output weights JSON")->required();
  fuse_cmd->add_option(
      "--apply", fuse_apply,
      "Apply the searched weights to these four score dumps (same order)")
      ->expected(4);
  fuse_cmd->add_option("--fused-out", fuse_fused_out,
                       "Output path for the fused score dump");

  // eval
  std::string eval_scores, eval_manifest, eval_split = "test", eval_json_out;
  bool eval_per_category = false, eval_frequency_prior = false;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate a score dump against a split");
  eval_cmd->add_option("--scores", eval_scores, "Score dump")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "Dataset manifest")
      ->required();
  eval_cmd->add_option("--split", eval_split, "Split name (default test)");
  eval_cmd->add_flag("--per-category", eval_per_category,
                     "Break metrics down per category");
  eval_cmd->add_flag("--with-frequency-prior", eval_frequency_prior,
                     "Append the train-frequency baseline");
  eval_cmd->add_option("--json-out", eval_json_out,
                       "Also write the report as JSON to this path");

  // predict
  std::string predict_tree, predict_video, predict_checkpoint,
      predict_manifest;
  int predict_top_k = 5;
  CLI::App* predict_cmd = app.add_subcommand(
      "predict", "Score one bracketed query against one video");
  predict_cmd->add_option("--query-tree", predict_tree, "Bracketed parse tree")
      ->required();
  predict_cmd->add_option("--video", predict_video, "Video id")->required();
  predict_cmd
      ->add_option("--checkpoint", predict_checkpoint, "Checkpoint directory")
      ->required();
  predict_cmd->add_option("--manifest", predict_manifest, "Dataset manifest")
      ->required();
  predict_cmd->add_option("--top-k", predict_top_k,
                          "Number of pairs to report (default 5)");

  // inspect-attention
  std::string inspect_checkpoint, inspect_manifest, inspect_split = "test",
              inspect_out;
  int64_t inspect_query = 0;
  CLI::App* inspect_cmd = app.add_subcommand(
      "inspect-attention", "Dump node/segment attentions for one query");
  inspect_cmd->add_option("--query-id", inspect_query, "Query id")->required();
  inspect_cmd
      ->add_option("--checkpoint", inspect_checkpoint, "Checkpoint directory")
      ->required();
  inspect_cmd->add_option("--manifest", inspect_manifest, "Dataset manifest")
      ->required();
  inspect_cmd->add_option("--split", inspect_split, "Split name (default test)");
  inspect_cmd->add_option("--out", inspect_out, "Output JSON path")
      ->required();

  // grad-check
  uint64_t grad_seed = 7;
  CLI::App* grad_cmd = app.add_subcommand(
      "grad-check", "Finite-difference check of the gradient stack");
  grad_cmd->add_option("--seed", grad_seed, "RNG seed (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  if (generate->parsed()) {
    return finish(tcmn_generate_synth(synth_spec.c_str(), synth_out.c_str()));
  }

  if (train_cmd->parsed()) {
    return finish(tcmn_train(train.manifest.c_str(), train.stream.c_str(),
                             train.options_json().c_str(), train.out.c_str()));
  }

  if (score_cmd->parsed()) {
    tcmn_model* model = nullptr;
    tcmn_status status = tcmn_model_open(score_checkpoint.c_str(), &model);
    if (status != TCMN_OK) return finish(status);
    tcmn_dataset* dataset = nullptr;
    status = tcmn_dataset_open(score_manifest.c_str(), score_split.c_str(),
                               &dataset);
    if (status == TCMN_OK) {
      status = tcmn_score(model, dataset, score_out.c_str());
    }
    tcmn_dataset_close(dataset);
    tcmn_model_close(model);
    return finish(status);
  }

  if (fuse_cmd->parsed()) {
    std::vector<const char*> paths;
    for (const std::string& s : fuse_scores) paths.push_back(s.c_str());
    tcmn_status status =
        tcmn_fuse(paths.data(), static_cast<int>(paths.size()),
                  fuse_manifest.c_str(), fuse_split.c_str(), fuse_step,
                  fuse_out.c_str());
    if (status != TCMN_OK) return finish(status);
    std::printf("wrote %s\n", fuse_out.c_str());
    if (!fuse_fused_out.empty()) {
      const std::vector<std::string>& apply =
          fuse_apply.empty() ? fuse_scores : fuse_apply;
      std::vector<const char*> apply_paths;
      for (const std::string& s : apply) apply_paths.push_back(s.c_str());
      status = tcmn_apply_fusion(apply_paths.data(),
                                 static_cast<int>(apply_paths.size()),
                                 fuse_out.c_str(), fuse_fused_out.c_str());
      if (status == TCMN_OK) std::printf("wrote %s\n", fuse_fused_out.c_str());
    }
    return finish(status);
  }

  if (eval_cmd->parsed()) {
    char* table = nullptr;
    char* json = nullptr;
    const tcmn_status status = tcmn_evaluate(
        eval_scores.c_str(), eval_manifest.c_str(), eval_split.c_str(),
        eval_per_category ? 1 : 0, eval_frequency_prior ? 1 : 0, &table,
        eval_json_out.empty() ? nullptr : &json);
    if (status == TCMN_OK) {
      std::fputs(table, stdout);
      if (json != nullptr && !write_file(eval_json_out, json)) {
        tcmn_string_free(table);
        tcmn_string_free(json);
        return 2;
      }
    }
    tcmn_string_free(table);
    tcmn_string_free(json);
    return finish(status);
  }

  if (predict_cmd->parsed()) {
    tcmn_model* model = nullptr;
    tcmn_status status = tcmn_model_open(predict_checkpoint.c_str(), &model);
    if (status != TCMN_OK) return finish(status);
    char* json = nullptr;
    status = tcmn_predict(model, predict_manifest.c_str(),
                          predict_tree.c_str(), predict_video.c_str(),
                          predict_top_k, &json);
    if (status == TCMN_OK) std::printf("%s\n", json);
    tcmn_string_free(json);
    tcmn_model_close(model);
    return finish(status);
  }

  if (inspect_cmd->parsed()) {
    tcmn_model* model = nullptr;
    tcmn_status status = tcmn_model_open(inspect_checkpoint.c_str(), &model);
    if (status != TCMN_OK) return finish(status);
    char* json = nullptr;
    status = tcmn_inspect_attention(model, inspect_manifest.c_str(),
                                    inspect_split.c_str(), inspect_query,
                                    &json);
    if (status == TCMN_OK && !write_file(inspect_out, json)) {
      status = TCMN_E_DATA;
    }
    tcmn_string_free(json);
    tcmn_model_close(model);
    return finish(status);
  }

  if (grad_cmd->parsed()) {
    double max_rel = 0.0;
    char* report = nullptr;
    const tcmn_status status = tcmn_grad_check(grad_seed, &max_rel, &report);
    if (report != nullptr) std::fputs(report, stdout);
    tcmn_string_free(report);
    if (status == TCMN_OK) {
      std::printf("grad-check passed: max relative error %.3e < 1e-4\n",
                  max_rel);
    }
    return finish(status);
  }

  return 1;
}
