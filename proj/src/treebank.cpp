#include "tcmn/treebank.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace tcmn {

int ParseTree::add_leaf(const std::string& token) {
  TreeNode n;
  n.label = kTokenLabel;
  n.token = token;
  nodes_.push_back(std::move(n));
  return node_count() - 1;
}

int ParseTree::add_internal(const std::string& label,
                            std::vector<int> children) {
  for (int c : children) validate_child(c);
  TreeNode n;
  n.label = label;
  n.children = std::move(children);
  nodes_.push_back(std::move(n));
  return node_count() - 1;
}

void ParseTree::validate_child(int id) const {
  if (id < 0 || id >= node_count()) {
    throw data_error("tree child id out of range");
  }
}

std::vector<int> ParseTree::leaf_ids() const {
  std::vector<int> out;
  if (node_count() == 0) return out;
  std::function<void(int)> visit = [&](int id) {
    const TreeNode& n = node(id);
    if (n.is_leaf()) {
      out.push_back(id);
      return;
    }
    for (int c : n.children) visit(c);
  };
  visit(root());
  return out;
}

std::vector<std::string> ParseTree::tokens() const {
  std::vector<std::string> out;
  for (int id : leaf_ids()) out.push_back(node(id).token);
  return out;
}

ParseTree::CanonicalLayout ParseTree::canonical_layout() const {
  CanonicalLayout layout;
  const int n = node_count();
  layout.children.resize(static_cast<size_t>(n));
  if (n == 0) return layout;
  std::vector<std::string> canon(static_cast<size_t>(n));
  // Node ids are post-order, so children are processed before parents.
  for (int id = 0; id < n; ++id) {
    const TreeNode& node_ref = node(id);
    if (node_ref.is_leaf()) {
      canon[static_cast<size_t>(id)] = "t:" + node_ref.token;
      continue;
    }
    std::vector<int> sorted = node_ref.children;
    std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) {
      return canon[static_cast<size_t>(a)] < canon[static_cast<size_t>(b)];
    });
    layout.children[static_cast<size_t>(id)] = sorted;
    std::string s = "(" + node_ref.label;
    for (int c : sorted) {
      s += ' ';
      s += canon[static_cast<size_t>(c)];
    }
    s += ')';
    canon[static_cast<size_t>(id)] = std::move(s);
  }
  layout.order.reserve(static_cast<size_t>(n));
  std::function<void(int)> visit = [&](int id) {
    for (int c : layout.children[static_cast<size_t>(id)]) visit(c);
    layout.order.push_back(id);
  };
  visit(root());
  return layout;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

struct Parser {
  std::string_view text;
  size_t pos = 0;
  ParseTree tree;

  void skip_space() {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  }

  std::string read_atom() {
    const size_t start = pos;
    while (pos < text.size() && !is_space(text[pos]) && text[pos] != '(' &&
           text[pos] != ')') {
      ++pos;
    }
    return std::string(text.substr(start, pos - start));
  }

  int parse_node() {
    skip_space();
    if (pos >= text.size()) {
      throw ParseError("unbalanced parentheses: unexpected end of input", pos);
    }
    if (text[pos] != '(') {
      // Bare token leaf.
      std::string token = read_atom();
      if (token.empty()) {
        throw ParseError("unexpected character", pos);
      }
      return tree.add_leaf(token);
    }
    const size_t open = pos;
    ++pos;  // consume '('
    skip_space();
    std::string label = read_atom();
    if (label.empty()) {
      throw ParseError("empty label", pos);
    }
    std::vector<int> children;
    while (true) {
      skip_space();
      if (pos >= text.size()) {
        throw ParseError("unbalanced parentheses: '(' never closed", open);
      }
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      children.push_back(parse_node());
    }
    if (children.empty()) {
      throw ParseError("node '" + label + "' has no children", open);
    }
    return tree.add_internal(label, std::move(children));
  }
};

void serialize_node(const ParseTree& tree, int id, std::string& out) {
  const TreeNode& n = tree.node(id);
  if (n.is_leaf()) {
    out += n.token;
    return;
  }
  out += '(';
  out += n.label;
  for (int c : n.children) {
    out += ' ';
    serialize_node(tree, c, out);
  }
  out += ')';
}

}  // namespace

ParseTree parse_bracketed(std::string_view text) {
  Parser p{text, 0, ParseTree{}};
  p.skip_space();
  if (p.pos >= text.size()) {
    throw ParseError("empty input", 0);
  }
  if (text[p.pos] != '(') {
    throw ParseError("expected '('", p.pos);
  }
  p.parse_node();
  p.skip_space();
  if (p.pos < text.size()) {
    throw ParseError("trailing input after tree", p.pos);
  }
  return std::move(p.tree);
}

std::string serialize(const ParseTree& tree) {
  if (tree.node_count() == 0) throw data_error("serialize of empty tree");
  std::string out;
  serialize_node(tree, tree.root(), out);
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::set<std::string>{}) {}

Vocabulary::Vocabulary(const std::set<std::string>& items) {
  tokens_.push_back(kUnknown);
  ids_[kUnknown] = 0;
  for (const std::string& item : items) {
    if (item == kUnknown) continue;
    ids_[item] = static_cast<int>(tokens_.size());
    tokens_.push_back(item);
  }
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? unknown_id() : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw usage_error("vocabulary id out of range");
  return tokens_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) > 0;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write vocabulary file " + path);
  for (int i = 0; i < size(); ++i) {
    out << tokens_[static_cast<size_t>(i)] << '\t' << i << '\n';
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read vocabulary file " + path);
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw data_error(path + ":" + std::to_string(line_no) +
                       ": expected token<TAB>id");
    }
    const std::string token = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    if (id != static_cast<int>(tokens.size())) {
      throw data_error(path + ":" + std::to_string(line_no) +
                       ": ids must be dense and ascending");
    }
    tokens.push_back(token);
  }
  if (tokens.empty() || tokens[0] != Vocabulary::kUnknown) {
    throw data_error(path + ": first entry must be " +
                     std::string(Vocabulary::kUnknown));
  }
  Vocabulary v;
  for (size_t i = 1; i < tokens.size(); ++i) {
    v.ids_[tokens[i]] = static_cast<int>(i);
    v.tokens_.push_back(tokens[i]);
  }
  return v;
}

Vocabularies build_vocabularies(std::span<const ParseTree> trees) {
  if (trees.empty()) throw data_error("build_vocabularies: no trees");
  std::set<std::string> labels;
  std::set<std::string> words;
  for (const ParseTree& tree : trees) {
    for (int id = 0; id < tree.node_count(); ++id) {
      const TreeNode& n = tree.node(id);
      if (n.is_leaf()) {
        words.insert(n.token);
      } else {
        labels.insert(n.label);
      }
    }
  }
  return Vocabularies{Vocabulary(labels), Vocabulary(words)};
}

}  // namespace tcmn
