#ifndef TCMN_GRAPH_HPP
#define TCMN_GRAPH_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcmn/tensor.hpp"

namespace tcmn {

// Reverse-mode autodiff over dense matrices. The tape is append-only, so
// node ids are already a topological order and backward() is a single
// reverse sweep that visits each node exactly once.
//
// Primitive set: matmul, add, elementwise mul, concat, mean, sigmoid, tanh,
// softmax, L2-normalize, hinge, max-over-axis, plus a structural reshape
// (row-major view) used to fold flattened pairwise scores back into a
// square matrix.

enum class Op : uint8_t {
  kConstant,
  kParameter,
  kMatMul,
  kAdd,
  kMul,
  kConcat,
  kMean,
  kSigmoid,
  kTanh,
  kSoftmax,
  kL2Normalize,
  kHinge,
  kMaxAxis,
  kReshape,
};

struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves.
  Value constant(Tensor<T> t);
  Value constant(int rows, int cols, T fill);
  Value scalar(T v) { return constant(1, 1, v); }
  Value ones(int rows, int cols) { return constant(rows, cols, T(1)); }
  Value zeros(int rows, int cols) { return constant(rows, cols, T(0)); }
  Value one_hot_row(int n, int index);  // 1xn selector
  Value one_hot_col(int n, int index);  // nx1 selector
  // Binds a named parameter leaf; repeated binds return the same node so
  // gradients accumulate in one place.
  Value parameter(const std::string& name, const Tensor<T>& value);

  // Primitives.
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value mul(Value a, Value b);
  Value concat(int axis, std::span<const Value> parts);
  Value concat(int axis, std::initializer_list<Value> parts) {
    return concat(axis, std::span<const Value>(parts.begin(), parts.size()));
  }
  Value mean(Value a);
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value softmax(Value a, int axis);
  Value l2_normalize(Value a);  // per row
  Value hinge(Value a);         // max(0, x)
  Value max_axis(Value a, int axis);
  Value reshape(Value a, int rows, int cols);

  // Conveniences composed from the primitives above.
  Value scale(Value a, T factor);
  Value add_scalar(Value a, T c);

  const Tensor<T>& value(Value v) const { return node(v.id).value; }
  const Tensor<T>& gradient(Value v) const { return node(v.id).grad; }
  int rows(Value v) const { return node(v.id).value.rows; }
  int cols(Value v) const { return node(v.id).value.cols; }

  // Clears every gradient buffer; backward() calls this itself.
  void zero_gradients();

  // Reverse sweep from a scalar root. Throws "backward requires scalar"
  // otherwise. Parameters not reachable from the root keep zero gradients.
  void backward(Value root);

  // Gradient table for every parameter bound into this graph.
  std::map<std::string, Tensor<T>> parameter_gradients() const;

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<int> parents;
    // Op-specific payload.
    int axis = -1;               // concat / softmax / max_axis
    std::vector<int> arg_max;    // max_axis: flat index per output entry
    std::vector<T> norms;        // l2_normalize: per-row norm used
    std::string param_name;      // parameter leaves
  };

  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  Value push(Node&& n);
  void check(Value v) const;
  void propagate(int id);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> param_lookup_;
};

using GraphF = Graph<float>;
using GraphD = Graph<double>;

}  // namespace tcmn

#endif  // TCMN_GRAPH_HPP
