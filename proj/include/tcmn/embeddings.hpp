#ifndef TCMN_EMBEDDINGS_HPP
#define TCMN_EMBEDDINGS_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "tcmn/tensor.hpp"

namespace tcmn {

// Fixed word-embedding table loaded from a GloVe-style text file
// ("word f1 f2 ... fD" per line). Unknown words fall back to the zero
// vector. The table is frozen; it is not part of the trainable parameters.
class WordEmbeddings {
 public:
  WordEmbeddings() = default;
  WordEmbeddings(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  size_t size() const { return rows_.size(); }
  bool contains(const std::string& word) const {
    return index_.count(word) > 0;
  }

  void add(const std::string& word, std::vector<float> vec);

  // 1 x D row; zeros for unknown words.
  template <typename T>
  Tensor<T> lookup(const std::string& word) const;

  static WordEmbeddings load(const std::string& path);
  void save(const std::string& path) const;

 private:
  int dim_ = 0;
  std::vector<std::vector<float>> rows_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace tcmn

#endif  // TCMN_EMBEDDINGS_HPP
