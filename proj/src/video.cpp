#include "tcmn/video.hpp"

#include "tcmn/error.hpp"

namespace tcmn {

std::string modality_name(Modality m) {
  return m == Modality::kRgb ? "rgb" : "flow";
}

Modality modality_from_name(const std::string& name) {
  if (name == "rgb" || name == "RGB") return Modality::kRgb;
  if (name == "flow" || name == "Flow" || name == "FLOW") {
    return Modality::kFlow;
  }
  throw usage_error("unknown modality '" + name + "' (expected rgb or flow)");
}

SegmentSet::SegmentSet(int clip_count) : clip_count_(clip_count) {
  if (clip_count < 1) throw usage_error("segment enumeration needs C >= 1");
  segments_.reserve(static_cast<size_t>(clip_count) * (clip_count + 1) / 2);
  for (int a = 0; a < clip_count; ++a) {
    for (int b = a; b < clip_count; ++b) {
      segments_.push_back({a, b});
    }
  }
}

int SegmentSet::index_of(const Segment& s) const {
  if (s.start < 0 || s.end < s.start || s.end >= clip_count_) {
    throw usage_error("segment (" + std::to_string(s.start) + "," +
                      std::to_string(s.end) + ") is not a valid span of " +
                      std::to_string(clip_count_) + " clips");
  }
  // Row-major position within the triangular enumeration.
  const int before = s.start * clip_count_ - s.start * (s.start - 1) / 2;
  return before + (s.end - s.start);
}

std::array<double, 2> location_encoding(const Segment& s, int clip_count) {
  return {static_cast<double>(s.start) / clip_count,
          static_cast<double>(s.end + 1) / clip_count};
}

template <typename T>
Tensor<T> location_matrix(const SegmentSet& segments) {
  Tensor<T> out(segments.count(), 2);
  for (int i = 0; i < segments.count(); ++i) {
    const auto t = location_encoding(segments.segment(i), segments.clip_count());
    out.at(i, 0) = static_cast<T>(t[0]);
    out.at(i, 1) = static_cast<T>(t[1]);
  }
  return out;
}

Tensor<float> pool_segment_features(const Tensor<float>& clip_features,
                                    const SegmentSet& segments) {
  if (clip_features.rows != segments.clip_count()) {
    throw data_error("pooling: clip feature rows (" +
                     std::to_string(clip_features.rows) +
                     ") do not match clip count (" +
                     std::to_string(segments.clip_count()) + ")");
  }
  const int dim = clip_features.cols;
  Tensor<float> out(segments.count(), dim);
  for (int i = 0; i < segments.count(); ++i) {
    const Segment& s = segments.segment(i);
    for (int c = s.start; c <= s.end; ++c) {
      for (int d = 0; d < dim; ++d) {
        out.at(i, d) += clip_features.at(c, d);
      }
    }
    const float inv = 1.0f / static_cast<float>(s.clip_count());
    for (int d = 0; d < dim; ++d) out.at(i, d) *= inv;
  }
  return out;
}

template Tensor<float> location_matrix<float>(const SegmentSet&);
template Tensor<double> location_matrix<double>(const SegmentSet&);

}  // namespace tcmn
