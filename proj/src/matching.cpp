#include "tcmn/matching.hpp"

#include "tcmn/error.hpp"

namespace tcmn {

template <typename T>
void init_fusion_params(ParameterStore<T>& store, const std::string& prefix,
                        const FusionDims& dims, Rng& rng) {
  store.create_uniform(prefix + ".Wt", dims.text_dim, dims.fusion_dim,
                       dims.text_dim, rng);
  store.create_uniform(prefix + ".bt", 1, dims.fusion_dim, dims.text_dim, rng);
  store.create_uniform(prefix + ".Wv", dims.input_dim, dims.fusion_dim,
                       dims.input_dim, rng);
  store.create_uniform(prefix + ".bv", 1, dims.fusion_dim, dims.input_dim,
                       rng);
  store.create_uniform(prefix + ".W1", dims.fusion_dim, dims.fusion_dim,
                       dims.fusion_dim, rng);
  store.create_uniform(prefix + ".b1", 1, dims.fusion_dim, dims.fusion_dim,
                       rng);
  store.create_uniform(prefix + ".W2", dims.fusion_dim, 1, dims.fusion_dim,
                       rng);
  store.create_uniform(prefix + ".b2", 1, 1, dims.fusion_dim, rng);
}

template <typename T>
Value fusion_block(Graph<T>& graph, Value text, Value inputs,
                   ParamBinder<T>& bind, const std::string& prefix) {
  const Value wt = bind(prefix + ".Wt"), bt = bind(prefix + ".bt");
  const Value wv = bind(prefix + ".Wv"), bv = bind(prefix + ".bv");
  const Value w1 = bind(prefix + ".W1"), b1 = bind(prefix + ".b1");
  const Value w2 = bind(prefix + ".W2"), b2 = bind(prefix + ".b2");
  if (graph.cols(text) != graph.rows(wt)) {
    throw numeric_error(prefix + ": text dimension mismatch");
  }
  if (graph.cols(inputs) != graph.rows(wv)) {
    throw numeric_error(prefix + ": input dimension mismatch");
  }
  const int rows = graph.rows(inputs);
  const Value broadcast = graph.ones(rows, 1);  // row-replicates 1 x D terms
  const Value text_proj =
      graph.matmul(broadcast, graph.add(graph.matmul(text, wt), bt));
  const Value input_proj = graph.add(graph.matmul(inputs, wv),
                                     graph.matmul(broadcast, bv));
  const Value joined = graph.l2_normalize(graph.add(text_proj, input_proj));
  const Value h = graph.tanh(
      graph.add(graph.matmul(joined, w1), graph.matmul(broadcast, b1)));
  return graph.add(graph.matmul(h, w2), graph.matmul(broadcast, b2));
}

namespace {

// 0/1 selector mapping pair row k = i*P + j to its i (main) or j (context)
// segment row.
template <typename T>
Value pair_selector(Graph<T>& graph, int p, bool main_index) {
  Tensor<T> sel(p * p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      sel.at(i * p + j, main_index ? i : j) = T(1);
    }
  }
  return graph.constant(std::move(sel));
}

}  // namespace

template <typename T>
LocalizationScores<T> localization_scores(Graph<T>& graph, Value d_main,
                                          Value d_context, Value root,
                                          Value feats_main, Value feats_context,
                                          Value locations,
                                          ParamBinder<T>& bind) {
  const int p = graph.rows(locations);
  if (graph.rows(feats_main) != p || graph.rows(feats_context) != p) {
    throw numeric_error(
        "localization: feature tables disagree on segment count");
  }
  LocalizationScores<T> out;
  // Per-segment scores and attention for each event component.
  const Value s_main = fusion_block(graph, d_main, feats_main, bind, "fm");
  const Value s_context =
      fusion_block(graph, d_context, feats_context, bind, "fc");
  out.attn_main = graph.softmax(s_main, 0);        // P x 1
  out.attn_context = graph.softmax(s_context, 0);  // P x 1

  // v_i^n = alpha_i^n * v_i.
  const Value main_weighted = graph.mul(
      graph.matmul(out.attn_main, graph.ones(1, graph.cols(feats_main))),
      feats_main);
  const Value context_weighted = graph.mul(
      graph.matmul(out.attn_context, graph.ones(1, graph.cols(feats_context))),
      feats_context);

  // Pair rows [v_i^m, t_i, v_j^c, t_j], i-major.
  const Value rows_i = pair_selector(graph, p, true);
  const Value rows_j = pair_selector(graph, p, false);
  const Value pairs = graph.concat(
      1, {graph.matmul(rows_i, main_weighted), graph.matmul(rows_i, locations),
          graph.matmul(rows_j, context_weighted),
          graph.matmul(rows_j, locations)});
  const Value flat = fusion_block(graph, root, pairs, bind, "floc");
  out.scores = graph.reshape(flat, p, p);
  return out;
}

template <typename T>
Value relationship_scores(Graph<T>& graph, Value d_signal, Value locations,
                          ParamBinder<T>& bind) {
  const int p = graph.rows(locations);
  const Value rows_i = pair_selector(graph, p, true);
  const Value rows_j = pair_selector(graph, p, false);
  const Value pairs = graph.concat(
      1, {graph.matmul(rows_i, locations), graph.matmul(rows_j, locations)});
  const Value flat = fusion_block(graph, d_signal, pairs, bind, "frel");
  return graph.reshape(flat, p, p);
}

template <typename T>
Value combined_scores(Graph<T>& graph, Value loc, Value rel) {
  if (graph.rows(loc) != graph.rows(rel) || graph.cols(loc) != graph.cols(rel)) {
    throw numeric_error("combined scores: shape mismatch");
  }
  return graph.add(loc, rel);
}

template void init_fusion_params<float>(ParameterStore<float>&,
                                        const std::string&, const FusionDims&,
                                        Rng&);
template void init_fusion_params<double>(ParameterStore<double>&,
                                         const std::string&, const FusionDims&,
                                         Rng&);
template Value fusion_block<float>(Graph<float>&, Value, Value,
                                   ParamBinder<float>&, const std::string&);
template Value fusion_block<double>(Graph<double>&, Value, Value,
                                    ParamBinder<double>&, const std::string&);
template LocalizationScores<float> localization_scores<float>(
    Graph<float>&, Value, Value, Value, Value, Value, Value,
    ParamBinder<float>&);
template LocalizationScores<double> localization_scores<double>(
    Graph<double>&, Value, Value, Value, Value, Value, Value,
    ParamBinder<double>&);
template Value relationship_scores<float>(Graph<float>&, Value, Value,
                                          ParamBinder<float>&);
template Value relationship_scores<double>(Graph<double>&, Value, Value,
                                           ParamBinder<double>&);
template Value combined_scores<float>(Graph<float>&, Value, Value);
template Value combined_scores<double>(Graph<double>&, Value, Value);

}  // namespace tcmn
