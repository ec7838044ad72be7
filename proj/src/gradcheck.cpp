#include "tcmn/gradcheck.hpp"

#include <cmath>
#include <functional>

#include "tcmn/matching.hpp"
#include "tcmn/training.hpp"

namespace tcmn {

namespace {

using Builder =
    std::function<Value(Graph<double>&, ParameterStore<double>&, Rng&)>;

Value bind_random(Graph<double>& g, ParameterStore<double>& s,
                  const std::string& name, int rows, int cols, Rng& rng,
                  double bound = 2.0) {
  Tensor<double> t(rows, cols);
  t.fill_uniform(rng, -bound, bound);
  if (!s.contains(name)) s.create(name, rows, cols) = t;
  return g.parameter(name, s.get(name));
}

// mean(x * R) with a fixed random readout so every entry reaches the root.
Value readout(Graph<double>& g, Value v, Rng& rng) {
  Tensor<double> w(g.rows(v), g.cols(v));
  w.fill_uniform(rng, -1.0, 1.0);
  return g.mean(g.mul(v, g.constant(std::move(w))));
}

double check_builder(const Builder& builder, Rng seed_rng, int trials) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng setup = seed_rng.fork(static_cast<uint64_t>(trial));
    ParameterStore<double> store;
    {
      Graph<double> g;
      Rng r = setup.fork(0);
      builder(g, store, r);
    }
    auto build = [&](Graph<double>& g, ParameterStore<double>& s) {
      Rng r = setup.fork(0);
      return builder(g, s, r);
    };
    worst = std::max(worst, finite_difference_check(build, store));
  }
  return worst;
}

double check_primitives(Rng rng) {
  std::vector<Builder> builders;
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.matmul(bind_random(g, s, "a", 3, 4, r),
                               bind_random(g, s, "b", 4, 2, r)),
                   r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.add(bind_random(g, s, "a", 3, 3, r),
                            bind_random(g, s, "b", 3, 3, r)),
                   r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.mul(bind_random(g, s, "a", 2, 5, r),
                            bind_random(g, s, "b", 2, 5, r)),
                   r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    Value wide = g.concat(1, {bind_random(g, s, "a", 2, 3, r),
                              bind_random(g, s, "b", 2, 2, r)});
    return readout(g, g.concat(0, {wide, bind_random(g, s, "c", 1, 5, r)}), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    (void)r;
    return g.mean(bind_random(g, s, "a", 4, 3, r));
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.sigmoid(bind_random(g, s, "a", 3, 4, r)), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.tanh(bind_random(g, s, "a", 3, 4, r)), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.softmax(bind_random(g, s, "a", 3, 5, r), 1), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.softmax(bind_random(g, s, "a", 5, 2, r), 0), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    Value shifted = g.add_scalar(bind_random(g, s, "a", 3, 4, r), 3.0);
    return readout(g, g.l2_normalize(shifted), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    // Inputs kept away from the hinge kink.
    if (!s.contains("a")) {
      Tensor<double> t(3, 4);
      for (double& v : t.data) {
        do {
          v = r.uniform(-2.0, 2.0);
        } while (std::abs(v) < 1e-3);
      }
      s.create("a", 3, 4) = t;
    }
    return readout(g, g.hinge(g.parameter("a", s.get("a"))), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.max_axis(bind_random(g, s, "a", 4, 5, r), 1), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.max_axis(bind_random(g, s, "a", 4, 5, r), 0), r);
  });
  builders.push_back([](Graph<double>& g, ParameterStore<double>& s, Rng& r) {
    return readout(g, g.reshape(bind_random(g, s, "a", 3, 4, r), 2, 6), r);
  });
  double worst = 0.0;
  for (size_t k = 0; k < builders.size(); ++k) {
    worst = std::max(worst, check_builder(builders[k], rng.fork(k), 20));
  }
  return worst;
}

double check_tree_lstm(Rng rng) {
  // Five nodes: S, A, B and the two token leaves.
  ParseTree tree = parse_bracketed("(S (A cat) (B dog))");
  const int hidden = 4, label_dim = 3, word_dim = 5;
  WordEmbeddings words(word_dim);
  {
    Rng wr = rng.fork(1);
    for (const char* w : {"cat", "dog"}) {
      std::vector<float> vec(word_dim);
      for (float& v : vec) v = static_cast<float>(wr.uniform(-1.0, 1.0));
      words.add(w, std::move(vec));
    }
  }
  std::vector<ParseTree> trees;
  trees.push_back(parse_bracketed("(S (A cat) (B dog))"));
  const Vocabularies vocabs = build_vocabularies(trees);

  ParameterStore<double> store;
  Rng init = rng.fork(2);
  init_tree_lstm_params(store, word_dim, hidden, init);
  init_tree_attention_params(store, vocabs.labels.size(), label_dim, hidden,
                             init);
  Tensor<double> read(1, 4 * hidden);
  {
    Rng rr = rng.fork(3);
    read.fill_uniform(rr, -1.0, 1.0);
  }
  auto build = [&](Graph<double>& g, ParameterStore<double>& s) {
    ParamBinder<double> bind{&g, &s};
    NodeStates<double> states = tree_lstm_encode(g, tree, words, bind, hidden);
    PhraseEmbeddings<double> phrases =
        tree_attention(g, tree, states, vocabs.labels, bind);
    Value all = g.concat(
        1, {phrases.main, phrases.context, phrases.signal, phrases.root});
    return g.mean(g.mul(all, g.constant(read)));
  };
  return finite_difference_check(build, store);
}

double check_pairwise_loss(Rng rng) {
  // P = 4 segments, D = 6 features: the combined localization and
  // relationship scores feeding the margin ranking loss.
  const int p_count = 4, dim = 6, hidden = 5;
  Tensor<double> locations(p_count, 2);
  const double locs[4][2] = {{0.0, 2.0 / 6}, {2.0 / 6, 4.0 / 6},
                             {3.0 / 6, 1.0}, {0.0, 1.0}};
  for (int i = 0; i < p_count; ++i) {
    locations.at(i, 0) = locs[i][0];
    locations.at(i, 1) = locs[i][1];
  }
  Tensor<double> feats_main(p_count, dim), feats_context(p_count, dim);
  {
    Rng fr = rng.fork(1);
    feats_main.fill_uniform(fr, -1.0, 1.0);
    feats_context.fill_uniform(fr, -1.0, 1.0);
  }
  ParameterStore<double> store;
  Rng init = rng.fork(2);
  init_fusion_params(store, "fm", FusionDims{hidden, dim, hidden}, init);
  init_fusion_params(store, "fc", FusionDims{hidden, dim, hidden}, init);
  init_fusion_params(store, "floc", FusionDims{hidden, 2 * dim + 4, hidden},
                     init);
  init_fusion_params(store, "frel", FusionDims{hidden, 4, hidden}, init);
  // Text-side embeddings are leaf parameters so the check covers them too.
  for (const char* name : {"text.main", "text.context", "text.signal",
                           "text.root"}) {
    Tensor<double> t(1, hidden);
    t.fill_uniform(init, -1.0, 1.0);
    store.create(name, 1, hidden) = t;
  }
  LossConfig loss_config;
  auto build = [&](Graph<double>& g, ParameterStore<double>& s) {
    ParamBinder<double> bind{&g, &s};
    const Value loc_mat = g.constant(locations);
    auto loc = localization_scores(
        g, bind("text.main"), bind("text.context"), bind("text.root"),
        g.constant(feats_main), g.constant(feats_context), loc_mat, bind);
    Value rel = relationship_scores(g, bind("text.signal"), loc_mat, bind);
    Value combined = combined_scores(g, loc.scores, rel);
    return ranking_loss_graph(g, combined, 0, 2, loss_config).total;
  };
  return finite_difference_check(build, store);
}

}  // namespace

GradCheckReport run_grad_check_suite(uint64_t seed) {
  Rng rng(Rng::mix(seed, 0xfd));
  GradCheckReport report;
  report.sections.push_back(
      {"primitive ops", check_primitives(rng.fork(1))});
  report.sections.push_back({"tree-lstm (5 nodes)",
                             check_tree_lstm(rng.fork(2))});
  report.sections.push_back({"pairwise scoring loss (P=4, D=6)",
                             check_pairwise_loss(rng.fork(3))});
  for (const GradCheckSection& s : report.sections) {
    report.max_rel_error = std::max(report.max_rel_error, s.max_rel_error);
  }
  return report;
}

}  // namespace tcmn
