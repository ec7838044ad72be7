#ifndef TCMN_DATA_HPP
#define TCMN_DATA_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcmn/embeddings.hpp"
#include "tcmn/treebank.hpp"
#include "tcmn/video.hpp"

namespace tcmn {

enum class Category { kDidemo, kBefore, kAfter, kThen, kWhile };

std::string category_name(Category c);          // canonical lower-case tag
std::string category_display_name(Category c);  // report heading
Category category_from_name(const std::string& name);

struct TrainingExample {
  int64_t id = 0;
  std::string video;
  int tree_line = 0;
  Category category = Category::kDidemo;
  Segment main_segment;                    // ground truth p
  std::optional<Segment> context_segment;  // ground truth q; absent for DiDeMo
};

struct VideoFeatures {
  Tensor<float> rgb;   // C x D_rgb
  Tensor<float> flow;  // C x D_flow
};

// The manifest ties a dataset together:
//   {"trees": path, "annotations": path | {split: path},
//    "features": {video: {"rgb": path, "flow": path}}, "embeddings": path}
// Relative paths resolve against the manifest's directory.
struct Manifest {
  std::filesystem::path trees;
  std::map<std::string, std::filesystem::path> annotations;  // by split
  std::map<std::string, std::pair<std::filesystem::path, std::filesystem::path>>
      features;  // video -> (rgb, flow)
  std::filesystem::path embeddings;

  static Manifest load(const std::filesystem::path& path);
  const std::filesystem::path& annotations_for(const std::string& split) const;
};

// Fully cross-referenced dataset for one split. Loading validates every
// reference; there is no partially loaded state.
struct DatasetBundle {
  std::vector<ParseTree> trees;  // indexed by tree line
  std::vector<TrainingExample> examples;
  std::map<std::string, VideoFeatures> features;
  WordEmbeddings embeddings;
  int clip_count = 0;  // uniform across videos

  const ParseTree& tree_for(const TrainingExample& e) const {
    return trees[static_cast<size_t>(e.tree_line)];
  }
  const VideoFeatures& features_for(const TrainingExample& e) const {
    return features.at(e.video);
  }
  const Tensor<float>& clip_features(const std::string& video,
                                     Modality m) const {
    const VideoFeatures& f = features.at(video);
    return m == Modality::kRgb ? f.rgb : f.flow;
  }
};

DatasetBundle load_dataset(const Manifest& manifest, const std::string& split);

// Synthetic corpus: template sentences with hand-written trees, planted
// per-event feature patterns, Gaussian noise elsewhere. "both" plants the
// signal in RGB and Flow alike; "rgb"/"flow" confine it to one modality.
struct SyntheticSpec {
  int clip_count = 6;
  std::map<Category, int> queries;  // total per category, split by fractions
  int rgb_dim = 16;
  int flow_dim = 16;
  int word_dim = 12;
  int event_types = 8;  // size of the event vocabulary, at most 8
  double signal_strength = 1.0;
  double noise_level = 0.1;
  uint64_t seed = 7;
  std::string main_signal_modality = "both";     // rgb | flow | both
  std::string context_signal_modality = "both";  // rgb | flow | both
  // Plants a second copy of the main-event pattern at a decoy segment that
  // violates the query's temporal relation, so main localization is
  // ambiguous without the context event.
  bool ambiguous_main = false;
  double train_fraction = 0.5;
  double val_fraction = 0.25;  // remainder goes to test

  static SyntheticSpec from_json_file(const std::filesystem::path& path);
  void validate() const;
};

// Writes trees.txt, annotations_{train,val,test}.jsonl, per-video feature
// files, embeddings.txt, and manifest.json into out_dir.
void generate_synthetic(const SyntheticSpec& spec,
                        const std::filesystem::path& out_dir);

}  // namespace tcmn

#endif  // TCMN_DATA_HPP
