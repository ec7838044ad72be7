#ifndef TCMN_GRADCHECK_HPP
#define TCMN_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace tcmn {

// Finite-difference verification of the whole differentiation stack:
// every primitive op, the tree encoder, and the combined pairwise scoring
// loss on a small instance. All sections run at 64-bit precision.
struct GradCheckSection {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckSection> sections;
  double max_rel_error = 0.0;
  bool passed(double tolerance = 1e-4) const {
    return max_rel_error < tolerance;
  }
};

GradCheckReport run_grad_check_suite(uint64_t seed);

}  // namespace tcmn

#endif  // TCMN_GRADCHECK_HPP
