#include "tcmn.h"

#include <cstdlib>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "tcmn/data.hpp"
#include "tcmn/gradcheck.hpp"
#include "tcmn/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

tcmn_status to_status(const tcmn::Error& e) {
  g_last_error = e.what();
  switch (e.kind()) {
    case tcmn::ErrorKind::kUsage: return TCMN_E_USAGE;
    case tcmn::ErrorKind::kData: return TCMN_E_DATA;
    case tcmn::ErrorKind::kNumeric: return TCMN_E_NUMERIC;
  }
  return TCMN_E_USAGE;
}

template <typename Fn>
tcmn_status guarded(Fn&& fn) {
  try {
    fn();
    return TCMN_OK;
  } catch (const tcmn::Error& e) {
    return to_status(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TCMN_E_USAGE;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const char* require(const char* arg, const char* name) {
  if (arg == nullptr) {
    throw tcmn::usage_error(std::string(name) + " must not be NULL");
  }
  return arg;
}

tcmn::StreamConfig parse_stream_config(const char* stream,
                                       const char* options_json) {
  tcmn::StreamConfig config;
  const std::string pair = require(stream, "stream");
  const size_t comma = pair.find(',');
  if (comma == std::string::npos) {
    throw tcmn::usage_error(
        "stream must be '<main>,<context>' with rgb or flow parts");
  }
  config.main_modality = tcmn::modality_from_name(pair.substr(0, comma));
  config.context_modality = tcmn::modality_from_name(pair.substr(comma + 1));
  if (options_json != nullptr && options_json[0] != '\0') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(options_json);
    } catch (const nlohmann::json::exception& e) {
      throw tcmn::usage_error(std::string("options_json: ") + e.what());
    }
    config.hidden = j.value("hidden", config.hidden);
    config.label_dim = j.value("label_dim", config.label_dim);
    config.epochs = j.value("epochs", config.epochs);
    config.seed = j.value("seed", config.seed);
    config.adam.lr = j.value("lr", config.adam.lr);
    config.adam.weight_decay =
        j.value("weight_decay", config.adam.weight_decay);
    config.loss.margin_main = j.value("margin_main", config.loss.margin_main);
    config.loss.margin_context =
        j.value("margin_context", config.loss.margin_context);
    config.loss.lambda = j.value("lambda", config.loss.lambda);
  }
  return config;
}

std::vector<std::filesystem::path> collect_paths(const char* const* paths,
                                                 int count) {
  if (paths == nullptr) throw tcmn::usage_error("score_paths must not be NULL");
  std::vector<std::filesystem::path> out;
  for (int i = 0; i < count; ++i) {
    out.emplace_back(require(paths[i], "score path"));
  }
  return out;
}

}  // namespace

struct tcmn_model {
  tcmn::StreamModel model;
};

struct tcmn_dataset {
  tcmn::DatasetBundle data;
};

extern "C" {

const char* tcmn_version(void) { return "tcmn 1.0.0"; }

const char* tcmn_last_error(void) { return g_last_error.c_str(); }

void tcmn_string_free(char* s) { std::free(s); }

tcmn_status tcmn_generate_synth(const char* spec_json_path,
                                const char* out_dir) {
  return guarded([&] {
    const tcmn::SyntheticSpec spec = tcmn::SyntheticSpec::from_json_file(
        require(spec_json_path, "spec_json_path"));
    tcmn::generate_synthetic(spec, require(out_dir, "out_dir"));
  });
}

tcmn_status tcmn_train(const char* manifest_path, const char* stream,
                       const char* options_json, const char* out_dir) {
  return guarded([&] {
    tcmn::run_train(require(manifest_path, "manifest_path"),
                    parse_stream_config(stream, options_json),
                    require(out_dir, "out_dir"));
  });
}

tcmn_status tcmn_model_open(const char* checkpoint_dir, tcmn_model** out) {
  return guarded([&] {
    require(checkpoint_dir, "checkpoint_dir");
    if (out == nullptr) throw tcmn::usage_error("out must not be NULL");
    *out = new tcmn_model{tcmn::StreamModel::load(checkpoint_dir)};
  });
}

void tcmn_model_close(tcmn_model* model) { delete model; }

tcmn_status tcmn_dataset_open(const char* manifest_path, const char* split,
                              tcmn_dataset** out) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(split, "split");
    if (out == nullptr) throw tcmn::usage_error("out must not be NULL");
    const tcmn::Manifest manifest =
        tcmn::Manifest::load(std::filesystem::path(manifest_path));
    *out = new tcmn_dataset{tcmn::load_dataset(manifest, split)};
  });
}

void tcmn_dataset_close(tcmn_dataset* dataset) { delete dataset; }

tcmn_status tcmn_score(const tcmn_model* model, const tcmn_dataset* dataset,
                       const char* out_path) {
  return guarded([&] {
    if (model == nullptr || dataset == nullptr) {
      throw tcmn::usage_error("model and dataset must not be NULL");
    }
    tcmn::save_scores(require(out_path, "out_path"),
                      tcmn::score_split(model->model, dataset->data));
  });
}

tcmn_status tcmn_fuse(const char* const* score_paths, int n_scores,
                      const char* val_manifest_path, const char* split,
                      double step, const char* out_path) {
  return guarded([&] {
    tcmn::run_fuse(collect_paths(score_paths, n_scores),
                   require(val_manifest_path, "val_manifest_path"),
                   split == nullptr ? "val" : split, step,
                   require(out_path, "out_path"));
  });
}

tcmn_status tcmn_apply_fusion(const char* const* score_paths, int n_scores,
                              const char* weights_path, const char* out_path) {
  return guarded([&] {
    tcmn::run_apply_fusion(
        collect_paths(score_paths, n_scores),
        tcmn::EnsembleWeights::load(require(weights_path, "weights_path")),
        require(out_path, "out_path"));
  });
}

tcmn_status tcmn_evaluate(const char* scores_path, const char* manifest_path,
                          const char* split, int per_category,
                          int with_frequency_prior, char** table_out,
                          char** json_out) {
  return guarded([&] {
    tcmn::EvalOptions options;
    options.split = split == nullptr ? "test" : split;
    options.per_category = per_category != 0;
    options.with_frequency_prior = with_frequency_prior != 0;
    const tcmn::EvalOutput out =
        tcmn::run_eval(require(scores_path, "scores_path"),
                       require(manifest_path, "manifest_path"), options);
    if (table_out != nullptr) *table_out = dup_string(out.table);
    if (json_out != nullptr) *json_out = dup_string(out.json);
  });
}

tcmn_status tcmn_predict(const tcmn_model* model, const char* manifest_path,
                         const char* query_tree, const char* video, int top_k,
                         char** json_out) {
  return guarded([&] {
    if (model == nullptr) throw tcmn::usage_error("model must not be NULL");
    if (json_out == nullptr) {
      throw tcmn::usage_error("json_out must not be NULL");
    }
    *json_out = dup_string(tcmn::run_predict(
        model->model,
        std::filesystem::path(require(manifest_path, "manifest_path")),
        require(query_tree, "query_tree"), require(video, "video"), top_k));
  });
}

tcmn_status tcmn_inspect_attention(const tcmn_model* model,
                                   const char* manifest_path,
                                   const char* split, int64_t query_id,
                                   char** json_out) {
  return guarded([&] {
    if (model == nullptr) throw tcmn::usage_error("model must not be NULL");
    if (json_out == nullptr) {
      throw tcmn::usage_error("json_out must not be NULL");
    }
    *json_out = dup_string(tcmn::run_inspect_attention(
        model->model,
        std::filesystem::path(require(manifest_path, "manifest_path")),
        split == nullptr ? "test" : split, query_id));
  });
}

tcmn_status tcmn_grad_check(uint64_t seed, double* max_rel_error_out,
                            char** report_out) {
  return guarded([&] {
    const tcmn::GradCheckReport report = tcmn::run_grad_check_suite(seed);
    if (max_rel_error_out != nullptr) {
      *max_rel_error_out = report.max_rel_error;
    }
    if (report_out != nullptr) {
      std::ostringstream text;
      for (const tcmn::GradCheckSection& s : report.sections) {
        char line[96];
        std::snprintf(line, sizeof line, "%-36s max rel error %.3e\n",
                      s.name.c_str(), s.max_rel_error);
        text << line;
      }
      char overall[96];
      std::snprintf(overall, sizeof overall, "%-36s max rel error %.3e\n",
                    "overall", report.max_rel_error);
      text << overall;
      *report_out = dup_string(text.str());
    }
    if (!report.passed()) {
      throw tcmn::numeric_error("gradient check failed: max relative error " +
                                std::to_string(report.max_rel_error));
    }
  });
}

}  // extern "C"
