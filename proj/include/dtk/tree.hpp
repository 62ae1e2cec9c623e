#pragma once

// Labeled ordered trees in parenthetical notation.
//
// Trees are stored as a flat arena of nodes in depth-first preorder with the
// root at index 0. Every child therefore has a larger index than its parent,
// so bottom-up passes are plain reverse loops and no algorithm in the library
// recurses on tree depth.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dtk {

using NodeId = std::uint32_t;

inline constexpr std::size_t kDefaultMaxNodes = 100000;

// Malformed parenthetical input. `offset` is the 0-based character offset at
// which the problem was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        reason_(what),
        offset_(offset) {}

  const std::string& reason() const noexcept { return reason_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string reason_;
  std::size_t offset_;
};

namespace detail {
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_label_char(char c) { return !is_space(c) && c != '(' && c != ')'; }
}  // namespace detail

// Non-empty token without whitespace or parentheses. Comparison is
// case-sensitive byte equality.
class Label {
 public:
  explicit Label(std::string text) : text_(std::move(text)) {
    if (text_.empty()) throw std::invalid_argument("empty label");
    for (char c : text_) {
      if (!detail::is_label_char(c))
        throw std::invalid_argument("label contains whitespace or parenthesis: '" + text_ + "'");
    }
  }

  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;

 private:
  std::string text_;
};

// A non-terminal node's label together with the ordered labels of all its
// children.
struct Production {
  std::string parent;
  std::vector<std::string> children;

  friend bool operator==(const Production&, const Production&) = default;

  std::string to_string() const {
    std::string out = parent + " ->";
    for (const auto& c : children) out += " " + c;
    return out;
  }
};

class Tree {
 public:
  struct Node {
    std::string label;
    std::vector<NodeId> children;
    NodeId parent;  // equals own index for the root

    friend bool operator==(const Node&, const Node&) = default;
  };

  static Tree leaf(const Label& label) {
    Tree t;
    t.nodes_.push_back(Node{label.str(), {}, 0});
    return t;
  }

  // Builds (label c1 ... cm) by concatenating the children's arenas.
  static Tree node(const Label& label, const std::vector<Tree>& children) {
    Tree t;
    t.nodes_.push_back(Node{label.str(), {}, 0});
    for (const Tree& child : children) {
      const auto base = static_cast<NodeId>(t.nodes_.size());
      t.nodes_[0].children.push_back(base);
      for (const Node& n : child.nodes_) {
        Node copy = n;
        for (auto& c : copy.children) c += base;
        copy.parent = (&n == &child.nodes_[0]) ? 0 : n.parent + base;
        t.nodes_.push_back(std::move(copy));
      }
    }
    return t;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  NodeId root() const noexcept { return 0; }

  const Node& at(NodeId id) const { return nodes_.at(id); }
  const std::string& label(NodeId id) const { return nodes_[id].label; }
  const std::vector<NodeId>& children(NodeId id) const { return nodes_[id].children; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  bool is_terminal(NodeId id) const { return nodes_[id].children.empty(); }

  bool is_preterminal(NodeId id) const {
    const auto& ch = nodes_[id].children;
    if (ch.empty()) return false;
    for (NodeId c : ch)
      if (!is_terminal(c)) return false;
    return true;
  }

  // One past the last preorder index of the subtree rooted at `id`.
  std::size_t subtree_end(NodeId id) const {
    while (!nodes_[id].children.empty()) id = nodes_[id].children.back();
    return static_cast<std::size_t>(id) + 1;
  }

  Production production(NodeId id) const {
    Production p{nodes_[id].label, {}};
    for (NodeId c : nodes_[id].children) p.children.push_back(nodes_[c].label);
    return p;
  }

  // Deep copy of the subtree rooted at `id`.
  Tree subtree(NodeId id) const {
    Tree t;
    std::vector<std::pair<NodeId, NodeId>> stack{{id, 0}};  // (source, new parent)
    // Preorder copy; children pushed in reverse so they pop in order.
    while (!stack.empty()) {
      auto [src, parent] = stack.back();
      stack.pop_back();
      const auto idx = static_cast<NodeId>(t.nodes_.size());
      t.nodes_.push_back(Node{nodes_[src].label, {}, idx == 0 ? 0 : parent});
      if (idx != 0) t.nodes_[parent].children.push_back(idx);
      const auto& ch = nodes_[src].children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, idx);
    }
    return t;
  }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  friend Tree parse_tree(std::string_view, std::size_t);
  std::vector<Node> nodes_;
};

// Parses "(A (B w) C)" or a bare label token. Whitespace between tokens is
// free-form. Throws ParseError with the offending offset.
inline Tree parse_tree(std::string_view text, std::size_t max_nodes = kDefaultMaxNodes) {
  Tree t;
  auto& nodes = t.nodes_;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto skip_ws = [&] {
    while (i < n && detail::is_space(text[i])) ++i;
  };
  auto read_label = [&]() -> std::string {
    const std::size_t start = i;
    while (i < n && detail::is_label_char(text[i])) ++i;
    if (i == start) throw ParseError("empty label", start);
    return std::string(text.substr(start, i - start));
  };
  auto add_node = [&](std::string label, const std::vector<NodeId>& open) {
    if (nodes.size() >= max_nodes)
      throw ParseError("tree exceeds node limit of " + std::to_string(max_nodes), i);
    const auto idx = static_cast<NodeId>(nodes.size());
    const NodeId parent = open.empty() ? 0 : open.back();
    nodes.push_back(Tree::Node{std::move(label), {}, parent});
    if (!open.empty()) nodes[parent].children.push_back(idx);
    return idx;
  };

  skip_ws();
  if (i == n) throw ParseError("empty input", i);

  if (text[i] != '(') {
    if (text[i] == ')') throw ParseError("unbalanced parentheses", i);
    add_node(read_label(), {});
  } else {
    std::vector<NodeId> open;  // stack of nodes whose '(' is not yet closed
    while (true) {
      skip_ws();
      if (i == n) throw ParseError("unbalanced parentheses", i);
      const char c = text[i];
      if (c == '(') {
        ++i;
        skip_ws();
        if (i == n) throw ParseError("unbalanced parentheses", i);
        if (text[i] == '(' || text[i] == ')') throw ParseError("empty label", i);
        open.push_back(add_node(read_label(), open));
      } else if (c == ')') {
        if (open.empty()) throw ParseError("unbalanced parentheses", i);
        open.pop_back();
        ++i;
        if (open.empty()) break;
      } else {
        if (open.empty()) throw ParseError("unexpected token outside parentheses", i);
        add_node(read_label(), open);
      }
    }
  }

  skip_ws();
  if (i != n) throw ParseError("trailing characters after tree", i);
  return t;
}

// Single spaces between siblings; leaves without parentheses.
inline std::string serialize_tree(const Tree& t) {
  std::string out;
  // Each frame: node id and index of the next child to emit.
  std::vector<std::pair<NodeId, std::size_t>> stack{{t.root(), 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const auto& ch = t.children(id);
    if (next == 0) {
      if (!out.empty() && out.back() != '(') out += ' ';
      if (ch.empty()) {
        out += t.label(id);
        stack.pop_back();
        continue;
      }
      out += '(';
      out += t.label(id);
    }
    if (next < ch.size()) {
      const NodeId c = ch[next++];
      stack.emplace_back(c, 0);
    } else {
      out += ')';
      stack.pop_back();
    }
  }
  return out;
}

// Depth-first preorder, children in order. Equal to [0, node_count).
inline std::vector<NodeId> preorder(const Tree& t) {
  std::vector<NodeId> out(t.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<NodeId>(i);
  return out;
}

// One entry per non-terminal node in preorder.
inline std::vector<std::pair<NodeId, Production>> productions(const Tree& t) {
  std::vector<std::pair<NodeId, Production>> out;
  for (NodeId id : preorder(t))
    if (!t.is_terminal(id)) out.emplace_back(id, t.production(id));
  return out;
}

// Corpus files: one tree per line, '#' comments, blank lines skipped.
struct CorpusLine {
  std::size_t line_number;  // 1-based
  std::string text;
};

struct CorpusError {
  std::size_t line_number;
  std::string message;
};

struct Corpus {
  std::vector<Tree> trees;
  std::vector<std::size_t> line_numbers;  // parallel to trees
  std::vector<CorpusError> errors;
};

inline Corpus read_corpus(std::istream& in, std::size_t max_nodes = kDefaultMaxNodes) {
  Corpus corpus;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::size_t first = 0;
    while (first < line.size() && detail::is_space(line[first])) ++first;
    if (first == line.size() || line[first] == '#') continue;
    try {
      corpus.trees.push_back(parse_tree(line, max_nodes));
      corpus.line_numbers.push_back(number);
    } catch (const ParseError& e) {
      corpus.errors.push_back({number, e.what()});
    }
  }
  return corpus;
}

}  // namespace dtk
