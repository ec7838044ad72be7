#include "tcmn/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tcmn/error.hpp"
#include "tcmn/io.hpp"

namespace tcmn {

using nlohmann::json;

std::string category_name(Category c) {
  switch (c) {
    case Category::kDidemo: return "didemo";
    case Category::kBefore: return "before";
    case Category::kAfter: return "after";
    case Category::kThen: return "then";
    case Category::kWhile: return "while";
  }
  throw usage_error("bad category value");
}

std::string category_display_name(Category c) {
  switch (c) {
    case Category::kDidemo: return "DiDeMo";
    case Category::kBefore: return "Before";
    case Category::kAfter: return "After";
    case Category::kThen: return "Then";
    case Category::kWhile: return "While";
  }
  throw usage_error("bad category value");
}

Category category_from_name(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(c));
  if (lower == "didemo") return Category::kDidemo;
  if (lower == "before") return Category::kBefore;
  if (lower == "after") return Category::kAfter;
  if (lower == "then") return Category::kThen;
  if (lower == "while") return Category::kWhile;
  throw data_error("unknown category tag '" + name + "'");
}

namespace {

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

}  // namespace

Manifest Manifest::load(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) { return base / p; };
  Manifest m;
  try {
    m.trees = resolve(j.at("trees"));
    m.embeddings = resolve(j.at("embeddings"));
    const json& ann = j.at("annotations");
    if (ann.is_string()) {
      // A single split; serve it under any requested name.
      m.annotations.emplace("*", resolve(ann));
    } else {
      for (const auto& [split, p] : ann.items()) {
        m.annotations.emplace(split, resolve(p));
      }
    }
    for (const auto& [video, files] : j.at("features").items()) {
      m.features.emplace(video, std::make_pair(resolve(files.at("rgb")),
                                               resolve(files.at("flow"))));
    }
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  return m;
}

const std::filesystem::path& Manifest::annotations_for(
    const std::string& split) const {
  auto it = annotations.find(split);
  if (it == annotations.end()) it = annotations.find("*");
  if (it == annotations.end()) {
    throw data_error("manifest has no annotations for split '" + split + "'");
  }
  return it->second;
}

namespace {

Segment segment_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw data_error(where + ": segment must be [start, end]");
  }
  return Segment{j[0].get<int>(), j[1].get<int>()};
}

std::vector<TrainingExample> load_annotations(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read annotations " + path.string());
  std::vector<TrainingExample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw data_error(where + ": " + e.what());
    }
    try {
      TrainingExample e;
      e.id = j.at("id").get<int64_t>();
      e.video = j.at("video").get<std::string>();
      e.tree_line = j.at("tree_line").get<int>();
      e.category = category_from_name(j.at("category").get<std::string>());
      e.main_segment = segment_from_json(j.at("p"), where);
      if (!j.at("q").is_null()) {
        e.context_segment = segment_from_json(j.at("q"), where);
      }
      if (e.category == Category::kDidemo && e.context_segment) {
        throw data_error(where + ": didemo queries must have q = null");
      }
      if (e.category != Category::kDidemo && !e.context_segment) {
        throw data_error(where + ": non-didemo queries need a context segment");
      }
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw data_error(where + ": " + e.what());
    }
  }
  if (out.empty()) throw data_error(path.string() + ": no examples");
  return out;
}

void validate_segment(const Segment& s, int clip_count,
                      const std::string& what, int64_t query_id) {
  if (s.start < 0 || s.end < s.start || s.end >= clip_count) {
    throw data_error("query " + std::to_string(query_id) + ": " + what +
                     " segment (" + std::to_string(s.start) + "," +
                     std::to_string(s.end) + ") is outside " +
                     std::to_string(clip_count) + " clips");
  }
}

}  // namespace

DatasetBundle load_dataset(const Manifest& manifest, const std::string& split) {
  DatasetBundle bundle;
  // Trees, one per line.
  {
    std::ifstream in(manifest.trees);
    if (!in) throw data_error("cannot read trees " + manifest.trees.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      try {
        bundle.trees.push_back(parse_bracketed(line));
      } catch (const Error& e) {
        throw data_error(manifest.trees.string() + ":" +
                         std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  bundle.examples = load_annotations(manifest.annotations_for(split));
  bundle.embeddings = WordEmbeddings::load(manifest.embeddings.string());

  for (const TrainingExample& e : bundle.examples) {
    if (e.tree_line < 0 ||
        e.tree_line >= static_cast<int>(bundle.trees.size())) {
      throw data_error("query " + std::to_string(e.id) +
                       ": tree line " + std::to_string(e.tree_line) +
                       " is outside " + manifest.trees.string());
    }
    if (bundle.features.count(e.video)) continue;
    auto it = manifest.features.find(e.video);
    if (it == manifest.features.end()) {
      throw data_error("query " + std::to_string(e.id) +
                       ": video '" + e.video + "' is not in the manifest");
    }
    FeatureFile rgb = load_features(it->second.first.string());
    FeatureFile flow = load_features(it->second.second.string());
    if (rgb.modality != Modality::kRgb) {
      throw data_error(it->second.first.string() +
                       ": expected an RGB feature file");
    }
    if (flow.modality != Modality::kFlow) {
      throw data_error(it->second.second.string() +
                       ": expected a Flow feature file");
    }
    if (rgb.clip_features.rows != flow.clip_features.rows) {
      throw data_error("video '" + e.video +
                       "': rgb and flow disagree on clip count");
    }
    const int clips = rgb.clip_features.rows;
    if (bundle.clip_count == 0) {
      bundle.clip_count = clips;
    } else if (bundle.clip_count != clips) {
      throw data_error("video '" + e.video + "' has " + std::to_string(clips) +
                       " clips, expected " + std::to_string(bundle.clip_count));
    }
    bundle.features.emplace(e.video,
                            VideoFeatures{std::move(rgb.clip_features),
                                          std::move(flow.clip_features)});
  }
  for (const TrainingExample& e : bundle.examples) {
    validate_segment(e.main_segment, bundle.clip_count, "main", e.id);
    if (e.context_segment) {
      validate_segment(*e.context_segment, bundle.clip_count, "context", e.id);
    }
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Synthetic corpus generation.

namespace {

struct EventPhrase {
  std::string noun;
  std::string verb;

  // "(NP (DT the) (NN cat))"-style clause.
  std::string clause() const {
    return "(S (NP (DT the) (NN " + noun + ")) (VP (VBZ " + verb + ")))";
  }
};

const std::vector<EventPhrase>& event_bank() {
  static const std::vector<EventPhrase> bank = {
      {"cat", "jumps"},  {"dog", "runs"},   {"lady", "waves"},
      {"man", "claps"},  {"car", "stops"},  {"kid", "sings"},
      {"bird", "lands"}, {"ball", "rolls"},
  };
  return bank;
}

// TEMPO-TL-style templates. `fronted` puts the subordinate clause first
// ("Before A, B"), otherwise it hangs off the main clause's VP
// ("A before B"). In both cases the main event is the main clause.
std::string temporal_tree(Category category, const EventPhrase& main_event,
                          const EventPhrase& context_event, bool fronted) {
  const std::string main_clause = main_event.clause();
  const std::string context_clause = context_event.clause();
  switch (category) {
    case Category::kDidemo:
      return main_clause;
    case Category::kBefore:
    case Category::kAfter:
    case Category::kWhile: {
      const std::string signal = category == Category::kBefore ? "before"
                                 : category == Category::kAfter ? "after"
                                                                : "while";
      if (fronted) {
        return "(S (SBAR (IN " + signal + ") " + context_clause + ") " +
               main_clause + ")";
      }
      return "(S (NP (DT the) (NN " + main_event.noun + ")) (VP (VBZ " +
             main_event.verb + ") (SBAR (IN " + signal + ") " +
             context_clause + ")))";
    }
    case Category::kThen:
      return "(S " + main_clause + " (RB then) " + context_clause + ")";
  }
  throw usage_error("bad category value");
}

std::vector<Segment> short_segments(int clip_count, int max_len = 2) {
  std::vector<Segment> out;
  for (int a = 0; a < clip_count; ++a) {
    for (int b = a; b < clip_count && b - a < max_len; ++b) {
      out.push_back({a, b});
    }
  }
  return out;
}

bool disjoint(const Segment& a, const Segment& b) {
  return a.end < b.start || b.end < a.start;
}

bool satisfies_relation(Category c, const Segment& p, const Segment& q) {
  switch (c) {
    case Category::kDidemo: return true;
    case Category::kBefore: return p.end < q.start;
    case Category::kAfter: return q.end < p.start;
    case Category::kThen: return q.start == p.end + 1;
    case Category::kWhile: return !disjoint(p, q) && !(p == q);
  }
  return false;
}

struct GroundTruth {
  Segment main;
  std::optional<Segment> context;
  std::optional<Segment> decoy;
};

GroundTruth sample_ground_truth(Category category, int clip_count,
                                bool ambiguous, Rng& rng) {
  const std::vector<Segment> pool = short_segments(clip_count);
  if (category == Category::kDidemo) {
    return GroundTruth{pool[rng.uniform_index(pool.size())], std::nullopt,
                       std::nullopt};
  }
  struct Option {
    Segment p, q;
    std::optional<Segment> decoy;
  };
  std::vector<Option> options;
  for (const Segment& p : pool) {
    for (const Segment& q : pool) {
      if (!satisfies_relation(category, p, q)) continue;
      if (!ambiguous) {
        options.push_back({p, q, std::nullopt});
        continue;
      }
      for (const Segment& d : pool) {
        // The decoy carries the main-event pattern but breaks the stated
        // relation, so only the context event disambiguates.
        if (!disjoint(d, p) || !disjoint(d, q)) continue;
        if (satisfies_relation(category, d, q)) continue;
        options.push_back({p, q, d});
      }
    }
  }
  if (options.empty()) {
    throw usage_error("no (p, q) layout satisfies category '" +
                      category_name(category) + "' with " +
                      std::to_string(clip_count) + " clips");
  }
  const Option& pick = options[rng.uniform_index(options.size())];
  return GroundTruth{pick.p, pick.q, pick.decoy};
}

std::vector<Modality> signal_modalities(const std::string& name) {
  if (name == "rgb") return {Modality::kRgb};
  if (name == "flow") return {Modality::kFlow};
  if (name == "both") return {Modality::kRgb, Modality::kFlow};
  throw usage_error("signal modality must be rgb, flow, or both (got '" +
                    name + "')");
}

void add_pattern(Tensor<float>& clips, const Segment& where,
                 const std::vector<double>& pattern, double scale) {
  for (int c = where.start; c <= where.end; ++c) {
    for (int d = 0; d < clips.cols; ++d) {
      clips.at(c, d) += static_cast<float>(scale * pattern[static_cast<size_t>(d)]);
    }
  }
}

std::vector<double> unit_pattern(int dim, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(dim));
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

SyntheticSpec SyntheticSpec::from_json_file(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  SyntheticSpec spec;
  try {
    spec.clip_count = j.value("clips", spec.clip_count);
    spec.rgb_dim = j.value("rgb_dim", spec.rgb_dim);
    spec.flow_dim = j.value("flow_dim", spec.flow_dim);
    spec.word_dim = j.value("word_dim", spec.word_dim);
    spec.event_types = j.value("event_types", spec.event_types);
    spec.signal_strength = j.value("signal_strength", spec.signal_strength);
    spec.noise_level = j.value("noise_level", spec.noise_level);
    spec.seed = j.value("seed", spec.seed);
    spec.main_signal_modality =
        j.value("main_signal_modality", spec.main_signal_modality);
    spec.context_signal_modality =
        j.value("context_signal_modality", spec.context_signal_modality);
    spec.ambiguous_main = j.value("ambiguous_main", spec.ambiguous_main);
    spec.train_fraction = j.value("train_fraction", spec.train_fraction);
    spec.val_fraction = j.value("val_fraction", spec.val_fraction);
    if (j.contains("queries")) {
      for (const auto& [name, count] : j.at("queries").items()) {
        spec.queries[category_from_name(name)] = count.get<int>();
      }
    }
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  if (spec.queries.empty()) {
    for (Category c : {Category::kDidemo, Category::kBefore, Category::kAfter,
                       Category::kThen, Category::kWhile}) {
      spec.queries[c] = 8;
    }
  }
  return spec;
}

void SyntheticSpec::validate() const {
  if (clip_count < 2) throw usage_error("synthetic spec: need >= 2 clips");
  if (rgb_dim < 1 || flow_dim < 1 || word_dim < 1) {
    throw usage_error("synthetic spec: dimensions must be positive");
  }
  if (event_types < 2 || event_types > static_cast<int>(event_bank().size())) {
    throw usage_error("synthetic spec: event_types must be in [2, " +
                      std::to_string(event_bank().size()) + "]");
  }
  if (queries.empty()) throw usage_error("synthetic spec: no queries");
  for (const auto& [c, n] : queries) {
    if (n < 1) {
      throw usage_error("synthetic spec: category " + category_name(c) +
                        " has no queries");
    }
  }
  if (signal_strength <= noise_level) {
    throw usage_error(
        "synthetic spec: signal strength must exceed the noise level");
  }
  if (train_fraction < 0 || val_fraction < 0 ||
      train_fraction + val_fraction > 1.0) {
    throw usage_error("synthetic spec: bad split fractions");
  }
  signal_modalities(main_signal_modality);
  signal_modalities(context_signal_modality);
}

void generate_synthetic(const SyntheticSpec& spec,
                        const std::filesystem::path& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "features");

  Rng pattern_rng(Rng::mix(spec.seed, 1));
  Rng layout_rng(Rng::mix(spec.seed, 2));
  Rng noise_rng(Rng::mix(spec.seed, 3));
  Rng word_rng(Rng::mix(spec.seed, 4));
  Rng pick_rng(Rng::mix(spec.seed, 5));

  // Per-event patterns, one per modality, fixed across the corpus.
  std::vector<EventPhrase> bank = event_bank();
  bank.resize(static_cast<size_t>(spec.event_types));
  std::vector<std::array<std::vector<double>, 2>> patterns;
  for (size_t i = 0; i < bank.size(); ++i) {
    patterns.push_back({unit_pattern(spec.rgb_dim, pattern_rng),
                        unit_pattern(spec.flow_dim, pattern_rng)});
  }
  const auto main_mods = signal_modalities(spec.main_signal_modality);
  const auto context_mods = signal_modalities(spec.context_signal_modality);

  std::ofstream trees(out_dir / "trees.txt");
  std::ofstream ann_train(out_dir / "annotations_train.jsonl");
  std::ofstream ann_val(out_dir / "annotations_val.jsonl");
  std::ofstream ann_test(out_dir / "annotations_test.jsonl");
  if (!trees || !ann_train || !ann_val || !ann_test) {
    throw data_error("cannot write into " + out_dir.string());
  }

  json manifest_features = json::object();
  int64_t next_id = 0;
  for (const auto& [category, total] : spec.queries) {
    const int n_train = static_cast<int>(std::lround(total * spec.train_fraction));
    const int n_val = std::min(
        total - n_train, static_cast<int>(std::lround(total * spec.val_fraction)));
    for (int k = 0; k < total; ++k) {
      const int64_t id = next_id++;
      // Events: distinct main/context types.
      const size_t main_type = pick_rng.uniform_index(bank.size());
      size_t context_type = pick_rng.uniform_index(bank.size() - 1);
      if (context_type >= main_type) ++context_type;
      const bool fronted = (category == Category::kBefore ||
                            category == Category::kAfter) &&
                           pick_rng.uniform() < 0.5;
      const GroundTruth gt = sample_ground_truth(
          category, spec.clip_count,
          spec.ambiguous_main && category != Category::kDidemo, layout_rng);

      trees << temporal_tree(category, bank[main_type], bank[context_type],
                             fronted)
            << '\n';

      // Video features: noise everywhere, patterns on the ground truth.
      char video_name[16];
      std::snprintf(video_name, sizeof video_name, "v%04d",
                    static_cast<int>(id));
      Tensor<float> rgb(spec.clip_count, spec.rgb_dim);
      Tensor<float> flow(spec.clip_count, spec.flow_dim);
      for (float& v : rgb.data) {
        v = static_cast<float>(spec.noise_level * noise_rng.normal());
      }
      for (float& v : flow.data) {
        v = static_cast<float>(spec.noise_level * noise_rng.normal());
      }
      auto plant = [&](const Segment& where, size_t type,
                       const std::vector<Modality>& mods) {
        for (Modality m : mods) {
          Tensor<float>& target = m == Modality::kRgb ? rgb : flow;
          const auto& pattern =
              patterns[type][m == Modality::kRgb ? 0 : 1];
          add_pattern(target, where, pattern, spec.signal_strength);
        }
      };
      plant(gt.main, main_type, main_mods);
      if (gt.decoy) plant(*gt.decoy, main_type, main_mods);
      if (gt.context) plant(*gt.context, context_type, context_mods);

      const std::string rgb_path = "features/" + std::string(video_name) + "_rgb.bin";
      const std::string flow_path = "features/" + std::string(video_name) + "_flow.bin";
      save_features((out_dir / rgb_path).string(), Modality::kRgb, rgb);
      save_features((out_dir / flow_path).string(), Modality::kFlow, flow);
      manifest_features[video_name] = {{"rgb", rgb_path}, {"flow", flow_path}};

      json ann{
          {"id", id},
          {"video", video_name},
          {"tree_line", id},
          {"category", category_name(category)},
          {"p", {gt.main.start, gt.main.end}},
      };
      ann["q"] = gt.context
                     ? json{gt.context->start, gt.context->end}
                     : json(nullptr);
      std::ofstream& target =
          k < n_train ? ann_train : (k < n_train + n_val ? ann_val : ann_test);
      target << ann.dump() << '\n';
    }
  }

  // Word embeddings: random but fixed per word, all corpus words covered.
  std::set<std::string> words{"the", "before", "after", "while", "then"};
  for (const EventPhrase& e : bank) {
    words.insert(e.noun);
    words.insert(e.verb);
  }
  WordEmbeddings table(spec.word_dim);
  for (const std::string& word : words) {
    std::vector<float> vec(static_cast<size_t>(spec.word_dim));
    for (float& v : vec) v = static_cast<float>(word_rng.uniform(-1.0, 1.0));
    table.add(word, std::move(vec));
  }
  table.save((out_dir / "embeddings.txt").string());

  json manifest{
      {"trees", "trees.txt"},
      {"annotations",
       {{"train", "annotations_train.jsonl"},
        {"val", "annotations_val.jsonl"},
        {"test", "annotations_test.jsonl"}}},
      {"features", manifest_features},
      {"embeddings", "embeddings.txt"},
  };
  std::ofstream mf(out_dir / "manifest.json");
  if (!mf) throw data_error("cannot write manifest");
  mf << manifest.dump(2) << '\n';
}

}  // namespace tcmn
