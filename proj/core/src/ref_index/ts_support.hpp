#pragma once

#include <tree_sitter/api.h>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/repo_model.hpp"

namespace archrecon::ts {

// Returns nullptr for languages without a bundled grammar.
const TSLanguage* grammar_for(Language lang);

struct TreeDeleter {
  void operator()(TSTree* t) const noexcept { ts_tree_delete(t); }
};
using TreePtr = std::unique_ptr<TSTree, TreeDeleter>;

class Parser {
public:
  explicit Parser(const TSLanguage* language);
  ~Parser();
  Parser(const Parser&) = delete;
  Parser& operator=(const Parser&) = delete;

  TreePtr parse(std::string_view source);

private:
  TSParser* parser_;
};

// Thin view over a TSNode bound to its source text.
class Node {
public:
  Node() = default;
  Node(TSNode node, std::string_view source) : node_(node), source_(source) {}

  explicit operator bool() const { return !ts_node_is_null(node_); }
  bool operator==(const Node& other) const { return ts_node_eq(node_, other.node_); }
  std::string_view type() const { return ts_node_type(node_); }
  bool is(std::string_view t) const { return *this && type() == t; }
  std::string_view text() const {
    const auto b = ts_node_start_byte(node_);
    const auto e = ts_node_end_byte(node_);
    return source_.substr(b, e - b);
  }
  Node field(std::string_view name) const {
    return {ts_node_child_by_field_name(node_, name.data(), static_cast<uint32_t>(name.size())),
            source_};
  }
  Node parent() const { return {ts_node_parent(node_), source_}; }
  bool has_error() const { return ts_node_has_error(node_); }
  bool is_error() const { return ts_node_is_error(node_) || ts_node_is_missing(node_); }

  std::vector<Node> named_children() const {
    std::vector<Node> out;
    const auto n = ts_node_named_child_count(node_);
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.emplace_back(ts_node_named_child(node_, i), source_);
    return out;
  }
  std::vector<Node> children() const {
    std::vector<Node> out;
    const auto n = ts_node_child_count(node_);
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.emplace_back(ts_node_child(node_, i), source_);
    return out;
  }
  Node first_named_child_of(std::string_view t) const {
    for (auto& c : named_children())
      if (c.type() == t) return c;
    return {};
  }

private:
  TSNode node_{};
  std::string_view source_;
};

// Depth-first visit. `fn` returns false to skip a node's subtree.
template <class Fn>
void visit(const Node& root, Fn&& fn) {
  std::vector<Node> stack{root};
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (!fn(n)) continue;
    auto kids = n.named_children();
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
}

}  // namespace archrecon::ts
