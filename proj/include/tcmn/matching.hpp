#ifndef TCMN_MATCHING_HPP
#define TCMN_MATCHING_HPP

#include <string>

#include "tcmn/language.hpp"

namespace tcmn {

// All four scoring heads (main event f^m, context event f^c, pairwise
// localization f^loc, relationship f^rel) share one architecture with
// untied weights: project text and the other input into a common space,
// add, L2-normalize, then a two-layer scoring stack with tanh between.
// Parameters per head `<prefix>.{Wt,bt,Wv,bv,W1,b1,W2,b2}`.
struct FusionDims {
  int text_dim = 0;
  int input_dim = 0;
  int fusion_dim = 0;
};

template <typename T>
void init_fusion_params(ParameterStore<T>& store, const std::string& prefix,
                        const FusionDims& dims, Rng& rng);

// Scores each row of `inputs` (R x input_dim) against one text vector
// (1 x text_dim); returns R x 1.
template <typename T>
Value fusion_block(Graph<T>& graph, Value text, Value inputs,
                   ParamBinder<T>& bind, const std::string& prefix);

// Localization head: segment attention over visual features conditioned on
// d^m / d^c, attention-weighted features, then pairwise scoring of
// [v_i^m, t_i, v_j^c, t_j] against h_root. Feature inputs are P x D
// constants; locations is the P x 2 encoding matrix.
template <typename T>
struct LocalizationScores {
  Value scores;           // s^loc, P x P
  Value attn_main;        // alpha^m over segments, P x 1
  Value attn_context;     // alpha^c over segments, P x 1
};

template <typename T>
LocalizationScores<T> localization_scores(Graph<T>& graph, Value d_main,
                                          Value d_context, Value root,
                                          Value feats_main, Value feats_context,
                                          Value locations, ParamBinder<T>& bind);

// Relationship head: s^rel_ij = f^rel(d^s, [t_i, t_j]); locations only.
template <typename T>
Value relationship_scores(Graph<T>& graph, Value d_signal, Value locations,
                          ParamBinder<T>& bind);

// s = s^loc + s^rel, elementwise.
template <typename T>
Value combined_scores(Graph<T>& graph, Value loc, Value rel);

}  // namespace tcmn

#endif  // TCMN_MATCHING_HPP
