#include "tcmn/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tcmn/error.hpp"

namespace tcmn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

constexpr char kCheckpointMagic[] = "TCMN1";
constexpr char kFeatureMagic[] = "TCMNFEAT1";
constexpr char kScoreMagic[] = "TCMNSCORE1";

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in, const std::string& path) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw data_error(path + ": truncated file");
  return v;
}

void write_f32(std::ostream& out, const std::vector<float>& data) {
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
}

void read_f32(std::istream& in, std::vector<float>& data,
              const std::string& path) {
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!in) throw data_error(path + ": truncated float payload");
}

void expect_magic(std::istream& in, const char* magic, size_t len,
                  const std::string& path) {
  std::string got(len, '\0');
  in.read(got.data(), static_cast<std::streamsize>(len));
  if (!in || std::memcmp(got.data(), magic, len) != 0) {
    throw data_error(path + ": bad magic, expected " + std::string(magic, len));
  }
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const ParameterStore<float>& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write checkpoint " + path);
  out.write(kCheckpointMagic, 5);
  for (const std::string& name : store.names()) {
    const Tensor<float>& t = store.get(name);
    write_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, 2);
    write_u32(out, static_cast<uint32_t>(t.rows));
    write_u32(out, static_cast<uint32_t>(t.cols));
    write_f32(out, t.data);
  }
  if (!out) throw data_error("failed writing checkpoint " + path);
}

ParameterStore<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read checkpoint " + path);
  expect_magic(in, kCheckpointMagic, 5, path);
  ParameterStore<float> store;
  while (true) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.eof()) break;
    if (!in) throw data_error(path + ": truncated parameter header");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const uint32_t rank = read_u32(in, path);
    if (rank != 2) {
      throw data_error(path + ": parameter " + name + " has rank " +
                       std::to_string(rank) + ", expected 2");
    }
    const uint32_t rows = read_u32(in, path);
    const uint32_t cols = read_u32(in, path);
    Tensor<float>& t = store.create(name, static_cast<int>(rows),
                                    static_cast<int>(cols));
    read_f32(in, t.data, path);
  }
  return store;
}

void save_features(const std::string& path, Modality modality,
                   const Tensor<float>& clip_features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write feature file " + path);
  out.write(kFeatureMagic, 9);
  const char tag = modality == Modality::kRgb ? 'R' : 'F';
  out.write(&tag, 1);
  write_u32(out, static_cast<uint32_t>(clip_features.rows));
  write_u32(out, static_cast<uint32_t>(clip_features.cols));
  write_f32(out, clip_features.data);
  if (!out) throw data_error("failed writing feature file " + path);
}

FeatureFile load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read feature file " + path);
  expect_magic(in, kFeatureMagic, 9, path);
  char tag = 0;
  in.read(&tag, 1);
  if (!in || (tag != 'R' && tag != 'F')) {
    throw data_error(path + ": bad modality tag");
  }
  const uint32_t clips = read_u32(in, path);
  const uint32_t dim = read_u32(in, path);
  if (clips == 0 || dim == 0) {
    throw data_error(path + ": empty feature matrix");
  }
  FeatureFile f;
  f.modality = tag == 'R' ? Modality::kRgb : Modality::kFlow;
  f.clip_features =
      Tensor<float>(static_cast<int>(clips), static_cast<int>(dim));
  read_f32(in, f.clip_features.data, path);
  return f;
}

void save_scores(const std::string& path, const ScoreFile& scores) {
  if (scores.query_ids.size() != scores.matrices.size()) {
    throw usage_error("score dump: id/matrix count mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write score file " + path);
  out.write(kScoreMagic, 10);
  write_u32(out, static_cast<uint32_t>(scores.query_ids.size()));
  write_u32(out, static_cast<uint32_t>(scores.segment_count));
  for (size_t i = 0; i < scores.query_ids.size(); ++i) {
    const Tensor<float>& m = scores.matrices[i];
    if (m.rows != scores.segment_count || m.cols != scores.segment_count) {
      throw usage_error("score dump: matrix shape mismatch");
    }
    write_u32(out, scores.query_ids[i]);
    write_f32(out, m.data);
  }
  if (!out) throw data_error("failed writing score file " + path);
}

ScoreFile load_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read score file " + path);
  expect_magic(in, kScoreMagic, 10, path);
  const uint32_t count = read_u32(in, path);
  const uint32_t p = read_u32(in, path);
  ScoreFile f;
  f.segment_count = static_cast<int>(p);
  f.query_ids.reserve(count);
  f.matrices.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    f.query_ids.push_back(read_u32(in, path));
    Tensor<float> m(static_cast<int>(p), static_cast<int>(p));
    read_f32(in, m.data, path);
    f.matrices.push_back(std::move(m));
  }
  return f;
}

}  // namespace tcmn
