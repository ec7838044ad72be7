#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "oracles.hpp"
#include "tcmn/language.hpp"

using namespace tcmn;

namespace {

constexpr int kHidden = 4;
constexpr int kLabelDim = 3;
constexpr int kWordDim = 5;

WordEmbeddings test_embeddings(uint64_t seed = 404) {
  Rng rng(seed);
  WordEmbeddings table(kWordDim);
  for (const char* word : {"the", "cat", "dog", "runs", "naps", "before",
                           "after", "then", "w"}) {
    std::vector<float> vec(kWordDim);
    for (float& v : vec) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    table.add(word, std::move(vec));
  }
  return table;
}

struct Setup {
  ParameterStore<double> store;
  WordEmbeddings words = test_embeddings();
  Vocabulary labels;

  explicit Setup(const std::vector<ParseTree>& trees, uint64_t seed = 9) {
    Rng rng(seed);
    init_tree_lstm_params(store, kWordDim, kHidden, rng);
    Vocabularies v = build_vocabularies(trees);
    labels = v.labels;
    init_tree_attention_params(store, labels.size(), kLabelDim, kHidden, rng);
  }
};

}  // namespace

TEST_CASE("tree-lstm: single leaf equals one cell step with no child state") {
  ParseTree tree;
  tree.add_leaf("cat");
  Setup setup({tree});
  Graph<double> graph;
  ParamBinder<double> bind{&graph, &setup.store};
  NodeStates<double> states =
      tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
  const Tensor<double>& h = graph.value(states.root);
  const testing::Vec expected = testing::lstm_leaf_cell_oracle(
      setup.store, testing::to_vec(setup.words.lookup<double>("cat")));
  REQUIRE(h.cols == kHidden);
  for (int i = 0; i < kHidden; ++i) {
    CHECK(h.data[static_cast<size_t>(i)] ==
          doctest::Approx(expected[static_cast<size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("tree-lstm: empty tree rejected") {
  ParseTree tree;
  Setup setup({parse_bracketed("(A x)")});
  Graph<double> graph;
  ParamBinder<double> bind{&graph, &setup.store};
  CHECK_THROWS_AS(tree_lstm_encode(graph, tree, setup.words, bind, kHidden),
                  Error);
}

TEST_CASE("tree-lstm: sibling permutation leaves downstream bit-identical") {
  // Same multiset of children, different order.
  ParseTree a = parse_bracketed(
      "(S (NP (DT the) (NN cat)) (VP (VBZ naps)) (PP (IN before)))");
  ParseTree b = parse_bracketed(
      "(S (PP (IN before)) (VP (VBZ naps)) (NP (DT the) (NN cat)))");
  Setup setup({a, b});

  auto run = [&](const ParseTree& tree) {
    Graph<double> graph;
    ParamBinder<double> bind{&graph, &setup.store};
    NodeStates<double> states =
        tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
    PhraseEmbeddings<double> phrases =
        tree_attention(graph, tree, states, setup.labels, bind);
    struct Out {
      Tensor<double> root, main, context, signal;
    };
    return Out{graph.value(states.root), graph.value(phrases.main),
               graph.value(phrases.context), graph.value(phrases.signal)};
  };
  auto ra = run(a);
  auto rb = run(b);
  CHECK(ra.root.data == rb.root.data);  // bit-identical
  CHECK(ra.main.data == rb.main.data);
  CHECK(ra.context.data == rb.context.data);
  CHECK(ra.signal.data == rb.signal.data);
}

TEST_CASE("tree-lstm: gradients match finite differences on a 5-node tree") {
  ParseTree tree = parse_bracketed("(S (A cat) (B dog))");
  REQUIRE(tree.node_count() == 5);
  Setup setup({tree});
  WordEmbeddings words = setup.words;
  auto build = [&](Graph<double>& g, ParameterStore<double>& s) {
    ParamBinder<double> bind{&g, &s};
    NodeStates<double> states = tree_lstm_encode(g, tree, words, bind, kHidden);
    return g.mean(states.root);
  };
  CHECK(finite_difference_check(build, setup.store) < 1e-4);
}

TEST_CASE("tree attention: singleton tree gives alpha=[1] and d^n=h_root") {
  ParseTree tree;
  tree.add_leaf("cat");
  Setup setup({tree});
  Graph<double> graph;
  ParamBinder<double> bind{&graph, &setup.store};
  NodeStates<double> states =
      tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
  PhraseEmbeddings<double> phrases =
      tree_attention(graph, tree, states, setup.labels, bind);
  for (Value attn : {phrases.attn_main, phrases.attn_context,
                     phrases.attn_signal}) {
    REQUIRE(graph.value(attn).size() == 1);
    CHECK(graph.value(attn).data[0] == doctest::Approx(1.0));
  }
  for (Value d : {phrases.main, phrases.context, phrases.signal}) {
    CHECK(graph.value(d).data == graph.value(states.root).data);
  }
}

TEST_CASE("tree attention: zero weights give the mean of node states") {
  ParseTree tree = parse_bracketed("(S (NP (DT the) (NN cat)) (VP runs))");
  Setup setup({tree});
  for (const char* comp : {"m", "c", "s"}) {
    setup.store.get(std::string("attn.") + comp + ".w").fill(0.0);
    setup.store.get(std::string("attn.") + comp + ".b").fill(0.0);
  }
  Graph<double> graph;
  ParamBinder<double> bind{&graph, &setup.store};
  NodeStates<double> states =
      tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
  PhraseEmbeddings<double> phrases =
      tree_attention(graph, tree, states, setup.labels, bind);
  const int n = tree.node_count();
  Tensor<double> mean(1, kHidden);
  for (int id = 0; id < n; ++id) {
    const Tensor<double>& h = graph.value(states.hidden[static_cast<size_t>(id)]);
    for (int d = 0; d < kHidden; ++d) mean.data[static_cast<size_t>(d)] += h.data[static_cast<size_t>(d)];
  }
  for (double& v : mean.data) v /= n;
  for (int d = 0; d < kHidden; ++d) {
    CHECK(graph.value(phrases.main).data[static_cast<size_t>(d)] ==
          doctest::Approx(mean.data[static_cast<size_t>(d)]).epsilon(1e-9));
  }
}

TEST_CASE("tree attention: constant logit shift leaves alpha unchanged") {
  ParseTree tree = parse_bracketed(
      "(S (NP (DT the) (NN cat)) (VP (VBZ naps) (SBAR (IN after) (S (NP (DT "
      "the) (NN dog)) (VP (VBZ runs))))))");
  Setup setup({tree});
  auto attn_main = [&](double bias_shift) {
    ParameterStore<double> store = setup.store.cast<double>();
    store.get("attn.m.b").data[0] += bias_shift;
    Graph<double> graph;
    ParamBinder<double> bind{&graph, &store};
    NodeStates<double> states =
        tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
    PhraseEmbeddings<double> phrases =
        tree_attention(graph, tree, states, setup.labels, bind);
    return graph.value(phrases.attn_main);
  };
  // The bias adds the same constant to every node's logit.
  const Tensor<double> base = attn_main(0.0);
  const Tensor<double> shifted = attn_main(7.3);
  REQUIRE(base.size() == tree.node_count());
  for (int i = 0; i < base.size(); ++i) {
    CHECK(std::abs(base.data[static_cast<size_t>(i)] -
                   shifted.data[static_cast<size_t>(i)]) < 1e-9);
  }
}

TEST_CASE("tree attention: distributions over exactly N nodes") {
  Rng rng(1001);
  for (int trial = 0; trial < 25; ++trial) {
    ParseTree tree = testing::random_tree(rng, 5);
    Setup setup({tree}, rng.next_u64());
    Graph<double> graph;
    ParamBinder<double> bind{&graph, &setup.store};
    NodeStates<double> states =
        tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
    PhraseEmbeddings<double> phrases =
        tree_attention(graph, tree, states, setup.labels, bind);
    for (Value attn : {phrases.attn_main, phrases.attn_context,
                       phrases.attn_signal}) {
      const Tensor<double>& a = graph.value(attn);
      REQUIRE(a.size() == tree.node_count());
      double sum = 0.0;
      for (double v : a.data) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("tree attention: d is linear in the node states for fixed alpha") {
  ParseTree tree = parse_bracketed("(S (A x) (B y))");
  Setup setup({tree});
  // Zero scoring weights pin alpha to uniform regardless of the states.
  for (const char* comp : {"m", "c", "s"}) {
    setup.store.get(std::string("attn.") + comp + ".w").fill(0.0);
  }
  auto embed = [&](double scale) {
    Graph<double> graph;
    ParamBinder<double> bind{&graph, &setup.store};
    NodeStates<double> states =
        tree_lstm_encode(graph, tree, setup.words, bind, kHidden);
    // Doubling every h_j by hand: rebuild stacked states scaled.
    NodeStates<double> scaled = states;
    for (Value& h : scaled.hidden) h = graph.scale(h, scale);
    scaled.stacked = graph.scale(states.stacked, scale);
    scaled.root = graph.scale(states.root, scale);
    PhraseEmbeddings<double> phrases =
        tree_attention(graph, tree, scaled, setup.labels, bind);
    return graph.value(phrases.main);
  };
  const Tensor<double> base = embed(1.0);
  const Tensor<double> doubled = embed(2.0);
  for (int i = 0; i < base.size(); ++i) {
    CHECK(doubled.data[static_cast<size_t>(i)] ==
          doctest::Approx(2.0 * base.data[static_cast<size_t>(i)]));
  }
}
