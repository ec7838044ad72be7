#ifndef TCMN_IO_HPP
#define TCMN_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcmn/optimizer.hpp"
#include "tcmn/tensor.hpp"
#include "tcmn/video.hpp"

namespace tcmn {

// Binary file formats. All integers and floats are little-endian; float
// payloads are 32-bit row-major.
//
//   checkpoint  "TCMN1"      { u32 name_len, name, u32 rank=2, u32 dims[2],
//                              f32 payload }*   (until EOF)
//   features    "TCMNFEAT1"  u8 modality ('R'|'F'), u32 C, u32 D,
//                              f32 payload[C*D]
//   scores      "TCMNSCORE1" u32 query_count, u32 P,
//                              { u32 query_id, f32 payload[P*P] }*

void save_checkpoint(const std::string& path, const ParameterStore<float>& store);
ParameterStore<float> load_checkpoint(const std::string& path);

struct FeatureFile {
  Modality modality;
  Tensor<float> clip_features;  // C x D
};

void save_features(const std::string& path, Modality modality,
                   const Tensor<float>& clip_features);
FeatureFile load_features(const std::string& path);

struct ScoreFile {
  int segment_count = 0;                       // P
  std::vector<uint32_t> query_ids;             // in file order
  std::vector<Tensor<float>> matrices;         // P x P each, same order
};

void save_scores(const std::string& path, const ScoreFile& scores);
ScoreFile load_scores(const std::string& path);

}  // namespace tcmn

#endif  // TCMN_IO_HPP
