#ifndef TCMN_LANGUAGE_HPP
#define TCMN_LANGUAGE_HPP

#include <string>
#include <vector>

#include "tcmn/embeddings.hpp"
#include "tcmn/graph.hpp"
#include "tcmn/optimizer.hpp"
#include "tcmn/treebank.hpp"

namespace tcmn {

// Lazily binds store parameters into a graph by name.
template <typename T>
struct ParamBinder {
  Graph<T>* graph;
  ParameterStore<T>* store;

  Value operator()(const std::string& name) {
    return graph->parameter(name, store->get(name));
  }
};

// Child-sum tree-LSTM gate parameters, stored under "lstm.*":
//   Wi Ui bi / Wf Uf bf / Wo Uo bo / Wu Uu bu
// Leaves feed their word embedding as x; internal nodes feed zeros. The
// forget-gate bias starts at 1.
template <typename T>
void init_tree_lstm_params(ParameterStore<T>& store, int word_dim, int hidden,
                           Rng& rng);

// Tree attention parameters under "attn.*": a label embedding table
// (L x label_dim) and per-component scoring vectors for m, c, s.
template <typename T>
void init_tree_attention_params(ParameterStore<T>& store, int label_count,
                                int label_dim, int hidden, Rng& rng);

// Per-node hidden states. `order` is the canonical node sequence used for
// every order-sensitive reduction, so sibling permutations reproduce
// bit-identical downstream values.
template <typename T>
struct NodeStates {
  std::vector<Value> hidden;  // indexed by node id
  Value root;
  Value stacked;              // N x hidden, rows in canonical order
  std::vector<int> order;     // canonical node sequence (node ids)
};

template <typename T>
NodeStates<T> tree_lstm_encode(Graph<T>& graph, const ParseTree& tree,
                               const WordEmbeddings& words,
                               ParamBinder<T>& bind, int hidden);

// The three soft phrase decompositions plus the untouched root encoding.
// Attention vectors are 1 x N in canonical node order; use `order` to map
// entries back to node ids.
template <typename T>
struct PhraseEmbeddings {
  Value main;     // d^m, 1 x hidden
  Value context;  // d^c
  Value signal;   // d^s
  Value root;     // h_root, passed through unchanged
  Value attn_main, attn_context, attn_signal;  // 1 x N each
  std::vector<int> order;
};

template <typename T>
PhraseEmbeddings<T> tree_attention(Graph<T>& graph, const ParseTree& tree,
                                   const NodeStates<T>& states,
                                   const Vocabulary& labels,
                                   ParamBinder<T>& bind);

}  // namespace tcmn

#endif  // TCMN_LANGUAGE_HPP
