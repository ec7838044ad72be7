#ifndef TCMN_ENSEMBLE_HPP
#define TCMN_ENSEMBLE_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tcmn/data.hpp"
#include "tcmn/tensor.hpp"
#include "tcmn/video.hpp"

namespace tcmn {

// The four (main, context) modality pairs, in canonical order.
inline constexpr int kStreamCount = 4;
std::array<std::pair<Modality, Modality>, kStreamCount> stream_order();
std::string stream_label(int index);                 // "(RGB,Flow)" etc.
int stream_index(Modality main, Modality context);

// Convex fusion weights over the four streams.
struct EnsembleWeights {
  std::array<double, kStreamCount> gamma{};

  void validate() const;  // gamma >= 0, sums to 1 within 1e-9
  void save(const std::string& path) const;
  static EnsembleWeights load(const std::string& path);
};

// s_ij = sum_n gamma_n s^n_ij. A one-hot gamma returns that stream's matrix
// bit-for-bit.
Tensor<float> late_fusion(
    const std::array<const Tensor<float>*, kStreamCount>& matrices,
    const EnsembleWeights& weights);

// One validation query with its per-stream score matrices.
struct FusionQuery {
  int64_t id = 0;
  Category category = Category::kDidemo;
  int gt_main = 0;  // ground-truth main segment index
  std::array<Tensor<float>, kStreamCount> matrices;
};

// Exhaustive simplex grid search (multiples of `step` summing to 1)
// maximizing validation average R@1; ties break toward the
// lexicographically first weight vector.
EnsembleWeights grid_search_weights(const std::vector<FusionQuery>& queries,
                                    const SegmentSet& segments, double step);

// All grid points for a given step, in search order.
std::vector<EnsembleWeights> fusion_weight_grid(double step);

}  // namespace tcmn

#endif  // TCMN_ENSEMBLE_HPP
