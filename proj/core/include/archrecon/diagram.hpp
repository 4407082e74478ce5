#pragma once

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace archrecon {

enum class NodeKind { Module, File, Subview };
enum class LinkKind { Call, Data, Dependency };

std::string_view to_string(NodeKind k);
std::string_view to_string(LinkKind k);

// Heap-allocated value with deep copy and value equality, for recursive
// members.
template <class T>
class Boxed {
public:
  Boxed() : p_(std::make_unique<T>()) {}
  Boxed(T value) : p_(std::make_unique<T>(std::move(value))) {}
  Boxed(const Boxed& o) : p_(std::make_unique<T>(*o.p_)) {}
  Boxed(Boxed&&) noexcept = default;
  Boxed& operator=(const Boxed& o) {
    if (this != &o) p_ = std::make_unique<T>(*o.p_);
    return *this;
  }
  Boxed& operator=(Boxed&&) noexcept = default;

  T& operator*() { return *p_; }
  const T& operator*() const { return *p_; }
  T* operator->() { return p_.get(); }
  const T* operator->() const { return p_.get(); }

  friend bool operator==(const Boxed& a, const Boxed& b) { return *a.p_ == *b.p_; }

private:
  std::unique_ptr<T> p_;
};

struct Layer {
  std::string id;
  std::string label;

  bool operator==(const Layer&) const = default;
};

struct DiagramNode {
  std::string id;
  std::string label;
  std::string layer_id;
  NodeKind kind = NodeKind::Module;

  bool operator==(const DiagramNode&) const = default;
};

struct LinkKey {
  std::string src;
  std::string dst;
  LinkKind kind = LinkKind::Call;

  auto operator<=>(const LinkKey&) const = default;
};

struct ArchDiagram {
  std::vector<Layer> layers;                 // render order
  std::map<std::string, DiagramNode> nodes;  // keyed by id
  std::map<LinkKey, std::string> edges;      // value is the label; empty means none
  std::map<std::string, Boxed<ArchDiagram>> subviews;

  const Layer* layer(std::string_view id) const;
  void add_layer(std::string id, std::string label);
  void add_node(std::string id, std::string label, std::string layer_id,
                NodeKind kind = NodeKind::Module);
  void add_edge(std::string src, std::string dst, LinkKind kind = LinkKind::Call,
                std::string label = {});
  bool empty() const { return layers.empty() && nodes.empty(); }

  bool operator==(const ArchDiagram&) const = default;
};

struct PartialDiagram {
  std::size_t group_index = 0;
  ArchDiagram diagram;

  bool operator==(const PartialDiagram&) const = default;
};

// Lowercases ASCII letters and collapses every run of other characters to a
// single '_', trimming underscores at both ends. Mermaid keywords get a
// trailing '_'. Idempotent.
std::string normalize_id(std::string_view raw);

// Invariant violations (unknown layers, dangling edges, unnormalized ids,
// subviews on non-Subview nodes), recursively. Empty when valid.
std::vector<std::string> diagram_problems(const ArchDiagram& d);

std::string to_mermaid(const ArchDiagram& d);

// Accepts flowchart text as produced by to_mermaid and the usual hand or
// model written variations. Throws Error{MermaidSyntax} only when no
// `flowchart`/`graph` header exists; everything else degrades with a
// diagnostic.
ArchDiagram parse_mermaid(std::string_view text, std::vector<std::string>* diagnostics = nullptr);

// Unions parts by normalized id. Labels: longest wins, earliest part on
// ties. A node listed in several layers goes to the layer of the part where
// it has the most incident edges, lower group_index on ties.
ArchDiagram merge_diagrams(const std::vector<PartialDiagram>& parts);

std::string diagram_to_json(const ArchDiagram& d);
ArchDiagram diagram_from_json(std::string_view text);

}  // namespace archrecon
