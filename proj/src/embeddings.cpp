#include "tcmn/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "tcmn/error.hpp"

namespace tcmn {

void WordEmbeddings::add(const std::string& word, std::vector<float> vec) {
  if (dim_ == 0) dim_ = static_cast<int>(vec.size());
  if (static_cast<int>(vec.size()) != dim_) {
    throw data_error("embedding for '" + word + "' has dimension " +
                     std::to_string(vec.size()) + ", expected " +
                     std::to_string(dim_));
  }
  if (index_.count(word)) throw data_error("duplicate embedding: " + word);
  index_.emplace(word, rows_.size());
  rows_.push_back(std::move(vec));
}

template <typename T>
Tensor<T> WordEmbeddings::lookup(const std::string& word) const {
  Tensor<T> out(1, dim_);
  auto it = index_.find(word);
  if (it == index_.end()) return out;  // UNK fallback: zero vector
  const std::vector<float>& row = rows_[it->second];
  for (int i = 0; i < dim_; ++i) out.data[i] = static_cast<T>(row[i]);
  return out;
}

WordEmbeddings WordEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read embedding file " + path);
  WordEmbeddings table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<float> vec;
    float v;
    while (ss >> v) vec.push_back(v);
    if (word.empty() || vec.empty()) {
      throw data_error(path + ":" + std::to_string(line_no) +
                       ": expected 'word f1 f2 ...'");
    }
    try {
      table.add(word, std::move(vec));
    } catch (const Error& e) {
      throw data_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (table.size() == 0) throw data_error(path + ": no embeddings");
  return table;
}

void WordEmbeddings::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write embedding file " + path);
  // Stable order keeps generated corpora byte-identical.
  std::vector<const std::string*> words;
  words.reserve(index_.size());
  for (const auto& [word, _] : index_) words.push_back(&word);
  std::sort(words.begin(), words.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  out.precision(9);
  for (const std::string* word : words) {
    out << *word;
    for (float v : rows_[index_.at(*word)]) out << ' ' << v;
    out << '\n';
  }
}

template Tensor<float> WordEmbeddings::lookup<float>(const std::string&) const;
template Tensor<double> WordEmbeddings::lookup<double>(
    const std::string&) const;

}  // namespace tcmn
