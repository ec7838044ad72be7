#ifndef TCMN_TREEBANK_HPP
#define TCMN_TREEBANK_HPP

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcmn/error.hpp"

namespace tcmn {

// Label given to leaf nodes. It is reserved: build_vocabularies() collects
// internal labels only, so kTokenLabel resolves to the UNK id and leaves
// share the UNK label embedding row.
inline constexpr const char* kTokenLabel = "TOKEN";

struct TreeNode {
  std::string label;
  std::vector<int> children;  // empty iff leaf
  std::string token;          // set iff leaf

  bool is_leaf() const { return children.empty(); }
};

// Labeled constituency tree. Node ids 0..N-1 are assigned in post order,
// so children always precede their parents and id N-1 is the root.
class ParseTree {
 public:
  ParseTree() = default;

  // Builder-style construction; returns the new node's id.
  int add_leaf(const std::string& token);
  int add_internal(const std::string& label, std::vector<int> children);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int root() const { return node_count() - 1; }
  const TreeNode& node(int id) const { return nodes_[static_cast<size_t>(id)]; }

  // Leaf ids in sentence order.
  std::vector<int> leaf_ids() const;
  std::vector<std::string> tokens() const;

  // Node ids and per-node child lists reordered so that any permutation of
  // siblings yields the identical sequence; order-sensitive float
  // reductions iterate in this layout to stay bit-identical.
  struct CanonicalLayout {
    std::vector<int> order;                   // canonical post-order
    std::vector<std::vector<int>> children;   // per node id, canonically sorted
  };
  CanonicalLayout canonical_layout() const;

 private:
  void validate_child(int id) const;

  std::vector<TreeNode> nodes_;
};

struct ParseError : Error {
  ParseError(const std::string& message, size_t offset)
      : Error(ErrorKind::kData,
              message + " at byte " + std::to_string(offset)),
        offset(offset) {}
  size_t offset;
};

// Parses one bracketed tree: "(LABEL child child ...)" with bare-token
// leaves. Throws ParseError with the byte offset of the defect.
ParseTree parse_bracketed(std::string_view text);

// Single-line bracketed form; parse_bracketed(serialize(t)) == t.
std::string serialize(const ParseTree& tree);

// Dense bidirectional token<->id map with UNK reserved at id 0.
class Vocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary();
  explicit Vocabulary(const std::set<std::string>& items);

  int id(const std::string& token) const;  // UNK id for unknown tokens
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  int unknown_id() const { return 0; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

struct Vocabularies {
  Vocabulary labels;  // internal-node labels
  Vocabulary words;   // leaf tokens
};

Vocabularies build_vocabularies(std::span<const ParseTree> trees);

}  // namespace tcmn

#endif  // TCMN_TREEBANK_HPP
