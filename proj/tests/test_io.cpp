#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tcmn/io.hpp"
#include "tcmn/rng.hpp"

using namespace tcmn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("tcmn_io_") + tag);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  Rng rng(17);
  ParameterStore<float> store;
  store.create("alpha.w", 3, 4).fill_uniform(rng, -1.0, 1.0);
  store.create("beta", 1, 1).fill_uniform(rng, -1.0, 1.0);
  store.create("zz.last", 7, 2).fill_uniform(rng, -1.0, 1.0);

  const fs::path path = temp_dir("ckpt") / "model.tcmn";
  save_checkpoint(path.string(), store);
  ParameterStore<float> loaded = load_checkpoint(path.string());
  REQUIRE(loaded.names() == store.names());
  for (const std::string& name : store.names()) {
    const Tensor<float>& a = store.get(name);
    const Tensor<float>& b = loaded.get(name);
    REQUIRE(a.same_shape(b));
    CHECK(a.data == b.data);  // bit-exact
  }
  fs::remove_all(path.parent_path());
}

TEST_CASE("checkpoint: magic header enforced") {
  const fs::path path = temp_dir("ckptbad") / "junk.tcmn";
  std::ofstream(path.string(), std::ios::binary) << "NOPE!";
  CHECK_THROWS_AS(load_checkpoint(path.string()), Error);
  fs::remove_all(path.parent_path());
}

TEST_CASE("feature file round trip") {
  Rng rng(23);
  Tensor<float> clips(6, 16);
  clips.fill_uniform(rng, -3.0, 3.0);
  const fs::path path = temp_dir("feat") / "v0_rgb.bin";
  save_features(path.string(), Modality::kRgb, clips);
  FeatureFile f = load_features(path.string());
  CHECK(f.modality == Modality::kRgb);
  REQUIRE(f.clip_features.same_shape(clips));
  CHECK(f.clip_features.data == clips.data);

  save_features(path.string(), Modality::kFlow, clips);
  CHECK(load_features(path.string()).modality == Modality::kFlow);
  fs::remove_all(path.parent_path());
}

TEST_CASE("feature file: truncation detected") {
  const fs::path dir = temp_dir("feattrunc");
  const fs::path path = dir / "bad.bin";
  Tensor<float> clips(4, 8, 1.0f);
  save_features(path.string(), Modality::kRgb, clips);
  // Drop the last 5 bytes.
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 5);
  CHECK_THROWS_AS(load_features(path.string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("score file round trip") {
  Rng rng(29);
  ScoreFile scores;
  scores.segment_count = 6;
  for (uint32_t id : {3u, 11u, 12u}) {
    Tensor<float> m(6, 6);
    m.fill_uniform(rng, -2.0, 2.0);
    scores.query_ids.push_back(id);
    scores.matrices.push_back(std::move(m));
  }
  const fs::path path = temp_dir("score") / "scores.bin";
  save_scores(path.string(), scores);
  ScoreFile back = load_scores(path.string());
  CHECK(back.segment_count == 6);
  REQUIRE(back.query_ids == scores.query_ids);
  for (size_t i = 0; i < back.matrices.size(); ++i) {
    CHECK(back.matrices[i].data == scores.matrices[i].data);
  }
  fs::remove_all(path.parent_path());
}
