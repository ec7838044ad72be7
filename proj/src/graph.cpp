#include "tcmn/graph.hpp"

#include <algorithm>
#include <cmath>

namespace tcmn {

namespace {

template <typename T>
void matmul_accumulate(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& out) {
  // out += a * b, ikj loop order.
  const int m = a.rows, k = a.cols, n = b.cols;
  for (int i = 0; i < m; ++i) {
    const T* arow = a.data.data() + static_cast<size_t>(i) * k;
    T* orow = out.data.data() + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const T aik = arow[kk];
      if (aik == T(0)) continue;
      const T* brow = b.data.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
}

// out += a^T * b  (a is m x k, b is m x n, out is k x n)
template <typename T>
void matmul_at_b(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& out) {
  const int m = a.rows, k = a.cols, n = b.cols;
  for (int i = 0; i < m; ++i) {
    const T* arow = a.data.data() + static_cast<size_t>(i) * k;
    const T* brow = b.data.data() + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const T aik = arow[kk];
      if (aik == T(0)) continue;
      T* orow = out.data.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
}

// out += a * b^T  (a is m x k, b is n x k, out is m x n)
template <typename T>
void matmul_a_bt(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& out) {
  const int m = a.rows, k = a.cols, n = b.rows;
  for (int i = 0; i < m; ++i) {
    const T* arow = a.data.data() + static_cast<size_t>(i) * k;
    T* orow = out.data.data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b.data.data() + static_cast<size_t>(j) * k;
      T acc = T(0);
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      orow[j] += acc;
    }
  }
}

}  // namespace

template <typename T>
Value Graph<T>::push(Node&& n) {
  n.grad = Tensor<T>(n.value.rows, n.value.cols);
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
void Graph<T>::check(Value v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
    throw numeric_error("invalid graph value handle");
  }
}

template <typename T>
Value Graph<T>::constant(Tensor<T> t) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(t);
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::constant(int rows, int cols, T fill) {
  return constant(Tensor<T>(rows, cols, fill));
}

template <typename T>
Value Graph<T>::one_hot_row(int n, int index) {
  Tensor<T> t(1, n);
  t.data[static_cast<size_t>(index)] = T(1);
  return constant(std::move(t));
}

template <typename T>
Value Graph<T>::one_hot_col(int n, int index) {
  Tensor<T> t(n, 1);
  t.data[static_cast<size_t>(index)] = T(1);
  return constant(std::move(t));
}

template <typename T>
Value Graph<T>::parameter(const std::string& name, const Tensor<T>& value) {
  auto it = param_lookup_.find(name);
  if (it != param_lookup_.end()) return Value{it->second};
  Node n;
  n.op = Op::kParameter;
  n.value = value;
  n.param_name = name;
  Value v = push(std::move(n));
  param_lookup_.emplace(name, v.id);
  return v;
}

template <typename T>
Value Graph<T>::matmul(Value a, Value b) {
  check(a);
  check(b);
  const auto& ta = node(a.id).value;
  const auto& tb = node(b.id).value;
  if (ta.cols != tb.rows) throw numeric_error("matmul shape mismatch");
  Node n;
  n.op = Op::kMatMul;
  n.parents = {a.id, b.id};
  n.value = Tensor<T>(ta.rows, tb.cols);
  matmul_accumulate(ta, tb, n.value);
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::add(Value a, Value b) {
  check(a);
  check(b);
  const auto& ta = node(a.id).value;
  const auto& tb = node(b.id).value;
  if (!ta.same_shape(tb)) throw numeric_error("add shape mismatch");
  Node n;
  n.op = Op::kAdd;
  n.parents = {a.id, b.id};
  n.value = ta;
  for (int i = 0; i < n.value.size(); ++i) n.value.data[i] += tb.data[i];
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::mul(Value a, Value b) {
  check(a);
  check(b);
  const auto& ta = node(a.id).value;
  const auto& tb = node(b.id).value;
  if (!ta.same_shape(tb)) throw numeric_error("mul shape mismatch");
  Node n;
  n.op = Op::kMul;
  n.parents = {a.id, b.id};
  n.value = ta;
  for (int i = 0; i < n.value.size(); ++i) n.value.data[i] *= tb.data[i];
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::concat(int axis, std::span<const Value> parts) {
  if (parts.empty()) throw numeric_error("concat of zero tensors");
  if (axis != 0 && axis != 1) throw numeric_error("concat axis must be 0 or 1");
  for (Value v : parts) check(v);
  const auto& first = node(parts[0].id).value;
  int rows = first.rows, cols = first.cols;
  for (size_t i = 1; i < parts.size(); ++i) {
    const auto& t = node(parts[i].id).value;
    if (axis == 0) {
      if (t.cols != cols) throw numeric_error("concat column mismatch");
      rows += t.rows;
    } else {
      if (t.rows != rows) throw numeric_error("concat row mismatch");
      cols += t.cols;
    }
  }
  Node n;
  n.op = Op::kConcat;
  n.axis = axis;
  n.value = Tensor<T>(rows, cols);
  for (Value v : parts) n.parents.push_back(v.id);
  if (axis == 0) {
    int row = 0;
    for (Value v : parts) {
      const auto& t = node(v.id).value;
      std::copy(t.data.begin(), t.data.end(),
                n.value.data.begin() + static_cast<size_t>(row) * cols);
      row += t.rows;
    }
  } else {
    int col = 0;
    for (Value v : parts) {
      const auto& t = node(v.id).value;
      for (int r = 0; r < rows; ++r) {
        std::copy(t.data.begin() + static_cast<size_t>(r) * t.cols,
                  t.data.begin() + static_cast<size_t>(r + 1) * t.cols,
                  n.value.data.begin() + static_cast<size_t>(r) * cols + col);
      }
      col += t.cols;
    }
  }
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::mean(Value a) {
  check(a);
  const auto& t = node(a.id).value;
  if (t.size() == 0) throw numeric_error("mean of empty tensor");
  T acc = T(0);
  for (T v : t.data) acc += v;
  Node n;
  n.op = Op::kMean;
  n.parents = {a.id};
  n.value = Tensor<T>::scalar(acc / static_cast<T>(t.size()));
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::sigmoid(Value a) {
  check(a);
  Node n;
  n.op = Op::kSigmoid;
  n.parents = {a.id};
  n.value = node(a.id).value;
  for (T& v : n.value.data) v = T(1) / (T(1) + std::exp(-v));
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::tanh(Value a) {
  check(a);
  Node n;
  n.op = Op::kTanh;
  n.parents = {a.id};
  n.value = node(a.id).value;
  for (T& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::softmax(Value a, int axis) {
  check(a);
  if (axis != 0 && axis != 1) throw numeric_error("softmax axis must be 0 or 1");
  Node n;
  n.op = Op::kSoftmax;
  n.axis = axis;
  n.parents = {a.id};
  n.value = node(a.id).value;
  Tensor<T>& t = n.value;
  const int lanes = axis == 1 ? t.rows : t.cols;
  const int len = axis == 1 ? t.cols : t.rows;
  for (int lane = 0; lane < lanes; ++lane) {
    auto at = [&](int i) -> T& {
      return axis == 1 ? t.at(lane, i) : t.at(i, lane);
    };
    T max = at(0);
    for (int i = 1; i < len; ++i) max = std::max(max, at(i));
    T sum = T(0);
    for (int i = 0; i < len; ++i) {
      at(i) = std::exp(at(i) - max);
      sum += at(i);
    }
    for (int i = 0; i < len; ++i) at(i) /= sum;
  }
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::l2_normalize(Value a) {
  check(a);
  Node n;
  n.op = Op::kL2Normalize;
  n.parents = {a.id};
  n.value = node(a.id).value;
  Tensor<T>& t = n.value;
  // Rows with norm below this floor are scaled by 1/floor instead, which
  // keeps the zero vector at zero.
  const T floor = static_cast<T>(1e-12);
  n.norms.resize(static_cast<size_t>(t.rows));
  for (int r = 0; r < t.rows; ++r) {
    T sq = T(0);
    for (int c = 0; c < t.cols; ++c) sq += t.at(r, c) * t.at(r, c);
    T norm = std::max(std::sqrt(sq), floor);
    n.norms[static_cast<size_t>(r)] = norm;
    for (int c = 0; c < t.cols; ++c) t.at(r, c) /= norm;
  }
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::hinge(Value a) {
  check(a);
  Node n;
  n.op = Op::kHinge;
  n.parents = {a.id};
  n.value = node(a.id).value;
  for (T& v : n.value.data) v = std::max(v, T(0));
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::max_axis(Value a, int axis) {
  check(a);
  if (axis != 0 && axis != 1) throw numeric_error("max axis must be 0 or 1");
  const Tensor<T>& t = node(a.id).value;
  Node n;
  n.op = Op::kMaxAxis;
  n.axis = axis;
  n.parents = {a.id};
  const int lanes = axis == 1 ? t.rows : t.cols;
  const int len = axis == 1 ? t.cols : t.rows;
  n.value = axis == 1 ? Tensor<T>(t.rows, 1) : Tensor<T>(1, t.cols);
  n.arg_max.resize(static_cast<size_t>(lanes));
  for (int lane = 0; lane < lanes; ++lane) {
    int best = 0;
    T best_value = axis == 1 ? t.at(lane, 0) : t.at(0, lane);
    for (int i = 1; i < len; ++i) {
      const T v = axis == 1 ? t.at(lane, i) : t.at(i, lane);
      // Ties keep the first maximal index.
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    n.value.data[static_cast<size_t>(lane)] = best_value;
    n.arg_max[static_cast<size_t>(lane)] =
        axis == 1 ? lane * t.cols + best : best * t.cols + lane;
  }
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::reshape(Value a, int rows, int cols) {
  check(a);
  const Tensor<T>& t = node(a.id).value;
  if (rows * cols != t.size()) throw numeric_error("reshape size mismatch");
  Node n;
  n.op = Op::kReshape;
  n.parents = {a.id};
  n.value = Tensor<T>(rows, cols);
  n.value.data = t.data;
  return push(std::move(n));
}

template <typename T>
Value Graph<T>::scale(Value a, T factor) {
  return mul(a, constant(rows(a), cols(a), factor));
}

template <typename T>
Value Graph<T>::add_scalar(Value a, T c) {
  return add(a, constant(rows(a), cols(a), c));
}

template <typename T>
void Graph<T>::zero_gradients() {
  for (Node& n : nodes_) n.grad.fill(T(0));
}

template <typename T>
void Graph<T>::backward(Value root) {
  check(root);
  if (node(root.id).value.size() != 1) {
    throw numeric_error("backward requires scalar");
  }
  zero_gradients();
  node(root.id).grad.data[0] = T(1);
  for (int id = root.id; id >= 0; --id) propagate(id);
}

template <typename T>
void Graph<T>::propagate(int id) {
  Node& n = node(id);
  if (n.parents.empty()) return;
  const Tensor<T>& g = n.grad;
  switch (n.op) {
    case Op::kMatMul: {
      Node& a = node(n.parents[0]);
      Node& b = node(n.parents[1]);
      matmul_a_bt(g, b.value, a.grad);
      matmul_at_b(a.value, g, b.grad);
      break;
    }
    case Op::kAdd: {
      for (int pid : n.parents) {
        Tensor<T>& pg = node(pid).grad;
        for (int i = 0; i < g.size(); ++i) pg.data[i] += g.data[i];
      }
      break;
    }
    case Op::kMul: {
      Node& a = node(n.parents[0]);
      Node& b = node(n.parents[1]);
      for (int i = 0; i < g.size(); ++i) {
        a.grad.data[i] += g.data[i] * b.value.data[i];
        b.grad.data[i] += g.data[i] * a.value.data[i];
      }
      break;
    }
    case Op::kConcat: {
      if (n.axis == 0) {
        int row = 0;
        for (int pid : n.parents) {
          Node& p = node(pid);
          const size_t offset = static_cast<size_t>(row) * n.value.cols;
          for (int i = 0; i < p.value.size(); ++i) {
            p.grad.data[i] += g.data[offset + i];
          }
          row += p.value.rows;
        }
      } else {
        int col = 0;
        for (int pid : n.parents) {
          Node& p = node(pid);
          for (int r = 0; r < p.value.rows; ++r) {
            for (int c = 0; c < p.value.cols; ++c) {
              p.grad.at(r, c) += g.at(r, col + c);
            }
          }
          col += p.value.cols;
        }
      }
      break;
    }
    case Op::kMean: {
      Node& a = node(n.parents[0]);
      const T w = g.data[0] / static_cast<T>(a.value.size());
      for (T& v : a.grad.data) v += w;
      break;
    }
    case Op::kSigmoid: {
      Node& a = node(n.parents[0]);
      for (int i = 0; i < g.size(); ++i) {
        const T y = n.value.data[i];
        a.grad.data[i] += g.data[i] * y * (T(1) - y);
      }
      break;
    }
    case Op::kTanh: {
      Node& a = node(n.parents[0]);
      for (int i = 0; i < g.size(); ++i) {
        const T y = n.value.data[i];
        a.grad.data[i] += g.data[i] * (T(1) - y * y);
      }
      break;
    }
    case Op::kSoftmax: {
      Node& a = node(n.parents[0]);
      const Tensor<T>& y = n.value;
      const int lanes = n.axis == 1 ? y.rows : y.cols;
      const int len = n.axis == 1 ? y.cols : y.rows;
      for (int lane = 0; lane < lanes; ++lane) {
        auto yi = [&](int i) {
          return n.axis == 1 ? y.at(lane, i) : y.at(i, lane);
        };
        auto gi = [&](int i) {
          return n.axis == 1 ? g.at(lane, i) : g.at(i, lane);
        };
        T dot = T(0);
        for (int i = 0; i < len; ++i) dot += gi(i) * yi(i);
        for (int i = 0; i < len; ++i) {
          const T d = yi(i) * (gi(i) - dot);
          if (n.axis == 1) {
            a.grad.at(lane, i) += d;
          } else {
            a.grad.at(i, lane) += d;
          }
        }
      }
      break;
    }
    case Op::kL2Normalize: {
      Node& a = node(n.parents[0]);
      const Tensor<T>& y = n.value;
      for (int r = 0; r < y.rows; ++r) {
        const T norm = n.norms[static_cast<size_t>(r)];
        T dot = T(0);
        for (int c = 0; c < y.cols; ++c) dot += g.at(r, c) * y.at(r, c);
        for (int c = 0; c < y.cols; ++c) {
          a.grad.at(r, c) += (g.at(r, c) - dot * y.at(r, c)) / norm;
        }
      }
      break;
    }
    case Op::kHinge: {
      Node& a = node(n.parents[0]);
      for (int i = 0; i < g.size(); ++i) {
        if (a.value.data[i] > T(0)) a.grad.data[i] += g.data[i];
      }
      break;
    }
    case Op::kMaxAxis: {
      Node& a = node(n.parents[0]);
      for (size_t lane = 0; lane < n.arg_max.size(); ++lane) {
        a.grad.data[static_cast<size_t>(n.arg_max[lane])] += g.data[lane];
      }
      break;
    }
    case Op::kReshape: {
      Node& a = node(n.parents[0]);
      for (int i = 0; i < g.size(); ++i) a.grad.data[i] += g.data[i];
      break;
    }
    case Op::kConstant:
    case Op::kParameter:
      break;
  }
}

template <typename T>
std::map<std::string, Tensor<T>> Graph<T>::parameter_gradients() const {
  std::map<std::string, Tensor<T>> out;
  for (const auto& [name, id] : param_lookup_) {
    out.emplace(name, node(id).grad);
  }
  return out;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace tcmn
