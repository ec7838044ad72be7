#include "tcmn/optimizer.hpp"

#include <cmath>
#include <limits>

namespace tcmn {

template <typename T>
Tensor<T>& ParameterStore<T>::create(const std::string& name, int rows,
                                     int cols) {
  auto [it, inserted] = slots_.try_emplace(name);
  if (!inserted) throw usage_error("duplicate parameter: " + name);
  it->second.value = Tensor<T>(rows, cols);
  it->second.first_moment = Tensor<T>(rows, cols);
  it->second.second_moment = Tensor<T>(rows, cols);
  return it->second.value;
}

template <typename T>
Tensor<T>& ParameterStore<T>::create_uniform(const std::string& name, int rows,
                                             int cols, int fan_in, Rng& rng) {
  Tensor<T>& t = create(name, rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  t.fill_uniform(rng, -bound, bound);
  return t;
}

template <typename T>
Tensor<T>& ParameterStore<T>::get(const std::string& name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw usage_error("unknown parameter: " + name);
  return it->second.value;
}

template <typename T>
const Tensor<T>& ParameterStore<T>::get(const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw usage_error("unknown parameter: " + name);
  return it->second.value;
}

template <typename T>
const typename ParameterStore<T>::Slot& ParameterStore<T>::slot(
    const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw usage_error("unknown parameter: " + name);
  return it->second;
}

template <typename T>
std::vector<std::string> ParameterStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& [name, _] : slots_) out.push_back(name);
  return out;
}

template <typename T>
typename ParameterStore<T>::Slot& ParameterStore<T>::mutable_slot(
    const std::string& name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw usage_error("unknown parameter: " + name);
  return it->second;
}

template <typename T>
void adam_step(ParameterStore<T>& store,
               const std::map<std::string, Tensor<T>>& gradients,
               const AdamConfig& config) {
  if (config.lr <= 0.0) throw usage_error("adam: learning rate must be > 0");
  for (const auto& [name, grad] : gradients) {
    if (!store.contains(name)) {
      throw usage_error("adam: gradient for unknown parameter " + name);
    }
    if (!grad.same_shape(store.get(name))) {
      throw numeric_error("adam: gradient shape mismatch for " + name);
    }
  }
  store.advance_step();
  const double t = static_cast<double>(store.step());
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (const auto& [name, grad] : gradients) {
    auto& slot = store.mutable_slot(name);
    for (int i = 0; i < grad.size(); ++i) {
      const double g = static_cast<double>(grad.data[i]) +
                       config.weight_decay *
                           static_cast<double>(slot.value.data[i]);
      double m = config.beta1 * static_cast<double>(slot.first_moment.data[i]) +
                 (1.0 - config.beta1) * g;
      double v =
          config.beta2 * static_cast<double>(slot.second_moment.data[i]) +
          (1.0 - config.beta2) * g * g;
      slot.first_moment.data[i] = static_cast<T>(m);
      slot.second_moment.data[i] = static_cast<T>(v);
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      slot.value.data[i] -=
          static_cast<T>(config.lr * m_hat / (std::sqrt(v_hat) + config.eps));
    }
  }
}

double finite_difference_check(
    const std::function<Value(Graph<double>&, ParameterStore<double>&)>& build,
    ParameterStore<double>& params, double eps) {
  std::map<std::string, Tensor<double>> analytic;
  // Analytic pass.
  {
    Graph<double> g;
    Value root = build(g, params);
    g.backward(root);
    analytic = g.parameter_gradients();
  }
  auto eval = [&]() {
    Graph<double> g;
    Value root = build(g, params);
    return g.value(root).data[0];
  };
  // Central differences cancel ~ulp(f)/eps of the function value; gradients
  // at or below that floor are indistinguishable from zero, so the 0/0
  // convention applies to them. This matters for coordinates whose true
  // gradient vanishes structurally (e.g. a bias that shifts every score).
  const double base = std::abs(eval());
  const double zero_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, base) / eps;
  double max_rel = 0.0;
  for (const std::string& name : params.names()) {
    auto it = analytic.find(name);
    Tensor<double>& value = params.get(name);
    for (int i = 0; i < value.size(); ++i) {
      const double original = value.data[i];
      value.data[i] = original + eps;
      const double plus = eval();
      value.data[i] = original - eps;
      const double minus = eval();
      value.data[i] = original;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = it == analytic.end() ? 0.0 : it->second.data[i];
      const double denom = std::max(std::abs(a), std::abs(numeric));
      const double rel = denom <= zero_floor ? 0.0 : std::abs(a - numeric) / denom;
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template void adam_step<float>(ParameterStore<float>&,
                               const std::map<std::string, Tensor<float>>&,
                               const AdamConfig&);
template void adam_step<double>(ParameterStore<double>&,
                                const std::map<std::string, Tensor<double>>&,
                                const AdamConfig&);

}  // namespace tcmn
