#ifndef TCMN_OPTIMIZER_HPP
#define TCMN_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tcmn/graph.hpp"
#include "tcmn/tensor.hpp"

namespace tcmn {

// Named parameter tensors plus per-parameter Adam moment buffers.
// The step counter is store-wide and increases by one per adam_step.
template <typename T>
class ParameterStore {
 public:
  struct Slot {
    Tensor<T> value;
    Tensor<T> first_moment;
    Tensor<T> second_moment;
  };

  Tensor<T>& create(const std::string& name, int rows, int cols);
  // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
  Tensor<T>& create_uniform(const std::string& name, int rows, int cols,
                            int fan_in, Rng& rng);

  bool contains(const std::string& name) const {
    return slots_.count(name) > 0;
  }
  Tensor<T>& get(const std::string& name);
  const Tensor<T>& get(const std::string& name) const;
  const Slot& slot(const std::string& name) const;

  std::vector<std::string> names() const;
  size_t size() const { return slots_.size(); }
  int64_t step() const { return step_; }

  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& [name, s] : slots_) {
      out.create(name, s.value.rows, s.value.cols) =
          s.value.template cast<U>();
    }
    return out;
  }

  // Used by adam_step only.
  Slot& mutable_slot(const std::string& name);
  void advance_step() { ++step_; }

 private:
  std::map<std::string, Slot> slots_;
  int64_t step_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-8;
};

// Bias-corrected Adam. Weight decay enters as an additive gradient term
// weight_decay * param before the moment updates. Gradient names must be a
// subset of parameter names; parameters without a gradient entry are left
// untouched (their moments do not advance either).
template <typename T>
void adam_step(ParameterStore<T>& store,
               const std::map<std::string, Tensor<T>>& gradients,
               const AdamConfig& config);

// Max over all parameter coordinates of the relative error between the
// analytic gradient and a central finite difference of `build`. Both
// gradients exactly zero count as zero error.
double finite_difference_check(
    const std::function<Value(Graph<double>&, ParameterStore<double>&)>& build,
    ParameterStore<double>& params, double eps = 1e-5);

}  // namespace tcmn

#endif  // TCMN_OPTIMIZER_HPP
