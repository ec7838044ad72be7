#include "tcmn/language.hpp"

#include "tcmn/error.hpp"

namespace tcmn {

template <typename T>
void init_tree_lstm_params(ParameterStore<T>& store, int word_dim, int hidden,
                           Rng& rng) {
  for (const char* gate : {"i", "f", "o", "u"}) {
    const std::string g(gate);
    store.create_uniform("lstm.W" + g, word_dim, hidden, word_dim, rng);
    store.create_uniform("lstm.U" + g, hidden, hidden, hidden, rng);
    store.create_uniform("lstm.b" + g, 1, hidden, hidden, rng);
  }
  store.get("lstm.bf").fill(T(1));  // forget-gate bias starts open
}

template <typename T>
void init_tree_attention_params(ParameterStore<T>& store, int label_count,
                                int label_dim, int hidden, Rng& rng) {
  store.create_uniform("attn.labels", label_count, label_dim, label_dim, rng);
  for (const char* comp : {"m", "c", "s"}) {
    const std::string c(comp);
    const int in = hidden + label_dim;
    store.create_uniform("attn." + c + ".w", in, 1, in, rng);
    store.create_uniform("attn." + c + ".b", 1, 1, in, rng);
  }
}

template <typename T>
NodeStates<T> tree_lstm_encode(Graph<T>& graph, const ParseTree& tree,
                               const WordEmbeddings& words,
                               ParamBinder<T>& bind, int hidden) {
  if (tree.node_count() == 0) throw data_error("tree-lstm: empty tree");
  const auto layout = tree.canonical_layout();

  const Value wi = bind("lstm.Wi"), ui = bind("lstm.Ui"), bi = bind("lstm.bi");
  const Value wf = bind("lstm.Wf"), uf = bind("lstm.Uf"), bf = bind("lstm.bf");
  const Value wo = bind("lstm.Wo"), uo = bind("lstm.Uo"), bo = bind("lstm.bo");
  const Value wu = bind("lstm.Wu"), uu = bind("lstm.Uu"), bu = bind("lstm.bu");

  NodeStates<T> out;
  out.hidden.resize(static_cast<size_t>(tree.node_count()));
  out.order = layout.order;
  std::vector<Value> cell(static_cast<size_t>(tree.node_count()));
  const Value zero_x = graph.zeros(1, words.dim());
  const Value zero_h = graph.zeros(1, hidden);

  // Node ids are children-first, so a plain id sweep is bottom-up.
  for (int id = 0; id < tree.node_count(); ++id) {
    const TreeNode& node = tree.node(id);
    const std::vector<int>& children = layout.children[static_cast<size_t>(id)];
    Value x = node.is_leaf() ? graph.constant(words.lookup<T>(node.token))
                             : zero_x;
    Value h_sum = zero_h;
    for (int child : children) {
      h_sum = graph.add(h_sum, out.hidden[static_cast<size_t>(child)]);
    }
    const Value in_gate = graph.sigmoid(graph.add(
        graph.add(graph.matmul(x, wi), graph.matmul(h_sum, ui)), bi));
    const Value out_gate = graph.sigmoid(graph.add(
        graph.add(graph.matmul(x, wo), graph.matmul(h_sum, uo)), bo));
    const Value update = graph.tanh(graph.add(
        graph.add(graph.matmul(x, wu), graph.matmul(h_sum, uu)), bu));
    Value c = graph.mul(in_gate, update);
    const Value fx = graph.matmul(x, wf);
    for (int child : children) {
      const Value forget = graph.sigmoid(graph.add(
          graph.add(fx,
                    graph.matmul(out.hidden[static_cast<size_t>(child)], uf)),
          bf));
      c = graph.add(c, graph.mul(forget, cell[static_cast<size_t>(child)]));
    }
    cell[static_cast<size_t>(id)] = c;
    out.hidden[static_cast<size_t>(id)] =
        graph.mul(out_gate, graph.tanh(c));
  }
  out.root = out.hidden[static_cast<size_t>(tree.root())];

  std::vector<Value> rows;
  rows.reserve(out.order.size());
  for (int id : out.order) rows.push_back(out.hidden[static_cast<size_t>(id)]);
  out.stacked = rows.size() == 1
                    ? rows[0]
                    : graph.concat(0, std::span<const Value>(rows));
  return out;
}

template <typename T>
PhraseEmbeddings<T> tree_attention(Graph<T>& graph, const ParseTree& tree,
                                   const NodeStates<T>& states,
                                   const Vocabulary& labels,
                                   ParamBinder<T>& bind) {
  const int n = tree.node_count();
  if (static_cast<int>(states.hidden.size()) != n) {
    throw numeric_error("tree attention: state count does not match tree");
  }
  const Value label_table = bind("attn.labels");
  const int label_count = graph.rows(label_table);

  // [h_j, e_j] rows in canonical node order.
  std::vector<Value> combined;
  combined.reserve(static_cast<size_t>(n));
  for (int id : states.order) {
    const int label_id = labels.id(tree.node(id).label);
    if (label_id >= label_count) {
      throw numeric_error("label id outside embedding table");
    }
    const Value e =
        graph.matmul(graph.one_hot_row(label_count, label_id), label_table);
    combined.push_back(
        graph.concat(1, {states.hidden[static_cast<size_t>(id)], e}));
  }

  PhraseEmbeddings<T> out;
  out.order = states.order;
  out.root = states.root;
  auto attend = [&](const std::string& comp, Value& attn, Value& phrase) {
    const Value w = bind("attn." + comp + ".w");
    const Value b = bind("attn." + comp + ".b");
    std::vector<Value> logits;
    logits.reserve(combined.size());
    for (const Value& he : combined) {
      logits.push_back(graph.add(graph.matmul(he, w), b));
    }
    const Value row = logits.size() == 1
                          ? logits[0]
                          : graph.concat(1, std::span<const Value>(logits));
    attn = graph.softmax(row, 1);              // 1 x N
    phrase = graph.matmul(attn, states.stacked);  // 1 x hidden
  };
  attend("m", out.attn_main, out.main);
  attend("c", out.attn_context, out.context);
  attend("s", out.attn_signal, out.signal);
  return out;
}

template void init_tree_lstm_params<float>(ParameterStore<float>&, int, int,
                                           Rng&);
template void init_tree_lstm_params<double>(ParameterStore<double>&, int, int,
                                            Rng&);
template void init_tree_attention_params<float>(ParameterStore<float>&, int,
                                                int, int, Rng&);
template void init_tree_attention_params<double>(ParameterStore<double>&, int,
                                                 int, int, Rng&);
template NodeStates<float> tree_lstm_encode<float>(Graph<float>&,
                                                   const ParseTree&,
                                                   const WordEmbeddings&,
                                                   ParamBinder<float>&, int);
template NodeStates<double> tree_lstm_encode<double>(Graph<double>&,
                                                     const ParseTree&,
                                                     const WordEmbeddings&,
                                                     ParamBinder<double>&, int);
template PhraseEmbeddings<float> tree_attention<float>(Graph<float>&,
                                                       const ParseTree&,
                                                       const NodeStates<float>&,
                                                       const Vocabulary&,
                                                       ParamBinder<float>&);
template PhraseEmbeddings<double> tree_attention<double>(
    Graph<double>&, const ParseTree&, const NodeStates<double>&,
    const Vocabulary&, ParamBinder<double>&);

}  // namespace tcmn
