#ifndef TCMN_VIDEO_HPP
#define TCMN_VIDEO_HPP

#include <array>
#include <string>
#include <vector>

#include "tcmn/tensor.hpp"

namespace tcmn {

enum class Modality { kRgb, kFlow };

std::string modality_name(Modality m);
Modality modality_from_name(const std::string& name);

// Contiguous clip span, inclusive on both ends, 0-based.
struct Segment {
  int start = 0;
  int end = 0;

  bool operator==(const Segment&) const = default;
  int clip_count() const { return end - start + 1; }
};

// All contiguous spans over C clips, sorted lexicographically by
// (start, end). The whole-video segment (0, C-1) is always present.
class SegmentSet {
 public:
  explicit SegmentSet(int clip_count);

  int clip_count() const { return clip_count_; }
  int count() const { return static_cast<int>(segments_.size()); }  // P
  const Segment& segment(int index) const {
    return segments_[static_cast<size_t>(index)];
  }
  const std::vector<Segment>& segments() const { return segments_; }

  // Index of (start, end); throws if the pair is not a valid span.
  int index_of(const Segment& s) const;
  int whole_video_index() const { return index_of({0, clip_count_ - 1}); }

 private:
  int clip_count_;
  std::vector<Segment> segments_;
};

// t = [a/C, (b+1)/C], both in [0, 1], start strictly below end.
std::array<double, 2> location_encoding(const Segment& s, int clip_count);

// P x 2 matrix of location encodings, row i for segment i.
template <typename T>
Tensor<T> location_matrix(const SegmentSet& segments);

// Mean of clip rows a..b per segment: (C x D) -> (P x D).
Tensor<float> pool_segment_features(const Tensor<float>& clip_features,
                                    const SegmentSet& segments);

}  // namespace tcmn

#endif  // TCMN_VIDEO_HPP
