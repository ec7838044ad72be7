#ifndef TCMN_TENSOR_HPP
#define TCMN_TENSOR_HPP

#include <cmath>
#include <vector>

#include "tcmn/error.hpp"
#include "tcmn/rng.hpp"

namespace tcmn {

// Dense row-major matrix. Vectors are 1xN or Nx1 tensors.
template <typename T>
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int r, int c, T fill = T(0))
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw numeric_error("negative tensor dimension");
  }

  static Tensor scalar(T v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  int size() const { return rows * cols; }

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  T at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Tensor& other) const {
    return rows == other.rows && cols == other.cols;
  }

  bool finite() const {
    for (T v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  void fill_uniform(Rng& rng, double lo, double hi) {
    for (T& v : data) v = static_cast<T>(rng.uniform(lo, hi));
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(rows, cols);
    for (int i = 0; i < size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

}  // namespace tcmn

#endif  // TCMN_TENSOR_HPP
