#include "archrecon/diagram.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>

#include "archrecon/error.hpp"
#include "detail/json_util.hpp"
#include "detail/text.hpp"

namespace archrecon {

using detail::json;

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Module: return "module";
    case NodeKind::File: return "file";
    case NodeKind::Subview: return "subview";
  }
  return "module";
}

std::string_view to_string(LinkKind k) {
  switch (k) {
    case LinkKind::Call: return "call";
    case LinkKind::Data: return "data";
    case LinkKind::Dependency: return "dependency";
  }
  return "call";
}

const Layer* ArchDiagram::layer(std::string_view id) const {
  for (const auto& l : layers)
    if (l.id == id) return &l;
  return nullptr;
}

void ArchDiagram::add_layer(std::string id, std::string label) {
  if (layer(id)) return;
  layers.push_back({std::move(id), std::move(label)});
}

void ArchDiagram::add_node(std::string id, std::string label, std::string layer_id, NodeKind kind) {
  auto key = id;
  nodes[key] = DiagramNode{std::move(id), std::move(label), std::move(layer_id), kind};
}

void ArchDiagram::add_edge(std::string src, std::string dst, LinkKind kind, std::string label) {
  edges[LinkKey{std::move(src), std::move(dst), kind}] = std::move(label);
}

namespace {

constexpr std::array<std::string_view, 12> kReserved = {
    "end",   "subgraph", "graph",     "flowchart", "style", "classdef",
    "class", "click",    "linkstyle", "direction", "call",  "href"};

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) h = (h ^ c) * 16777619u;
  return h;
}

}  // namespace

std::string normalize_id(std::string_view raw) {
  std::string out;
  bool gap = false;
  for (char c : raw) {
    if (is_alnum(c)) {
      if (gap && !out.empty()) out += '_';
      gap = false;
      out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    } else {
      gap = true;
    }
  }
  if (out.empty()) {
    // Labels made only of punctuation or non-ASCII text still need distinct ids.
    static const char* hex = "0123456789abcdef";
    const auto h = fnv1a(raw);
    out = "n_";
    for (int shift = 28; shift >= 0; shift -= 4) out += hex[(h >> shift) & 0xF];
    return out;
  }
  if (std::find(kReserved.begin(), kReserved.end(), out) != kReserved.end()) out += '_';
  return out;
}

namespace {

void collect_problems(const ArchDiagram& d, const std::string& where,
                      std::vector<std::string>& out) {
  std::set<std::string> layer_ids;
  for (const auto& l : d.layers) {
    if (!layer_ids.insert(l.id).second) out.push_back(where + "duplicate layer '" + l.id + "'");
    if (l.id != normalize_id(l.id)) out.push_back(where + "layer id not normalized: " + l.id);
  }
  for (const auto& [id, n] : d.nodes) {
    if (n.id != id) out.push_back(where + "node key mismatch: " + id);
    if (id != normalize_id(id)) out.push_back(where + "node id not normalized: " + id);
    if (!layer_ids.count(n.layer_id))
      out.push_back(where + "node '" + id + "' in unknown layer '" + n.layer_id + "'");
  }
  for (const auto& [k, label] : d.edges) {
    if (!d.nodes.count(k.src) || !d.nodes.count(k.dst))
      out.push_back(where + "edge " + k.src + "->" + k.dst + " has a missing endpoint");
  }
  for (const auto& [id, sub] : d.subviews) {
    auto it = d.nodes.find(id);
    if (it == d.nodes.end() || it->second.kind != NodeKind::Subview)
      out.push_back(where + "subview '" + id + "' is not a Subview node");
    collect_problems(*sub, where + id + "/", out);
  }
}

// --- serialization ---------------------------------------------------------

void append_entity(std::string& out, unsigned code) {
  out += '#';
  out += std::to_string(code);
  out += ';';
}

// Quoted labels: '"' and '#' must not appear literally; control characters
// would break the line structure.
std::string escape_label(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '"') out += "#quot;";
    else if (c == '#') append_entity(out, u);
    else if (u < 0x20 || u == 0x7F) append_entity(out, u);
    else out += c;
  }
  return out;
}

// Edge labels sit unquoted between pipes, so '|' and surrounding spaces are
// encoded too.
std::string escape_edge_label(std::string_view s) {
  std::string out;
  const auto first = s.find_first_not_of(' ');
  const auto last = s.find_last_not_of(' ');
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool edge_space =
        c == ' ' && (first == std::string_view::npos || i < first || i > last);
    if (edge_space || c == '|') append_entity(out, static_cast<unsigned char>(c));
    else out += escape_label(std::string_view(&s[i], 1));
  }
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string unescape_label(std::string_view s) {
  static const std::array<std::pair<std::string_view, char>, 5> named = {{
      {"quot", '"'}, {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"apos", '\''}}};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '#') {
      const auto semi = s.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 8) {
        const auto body = s.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!body.empty() && std::all_of(body.begin(), body.end(),
                                         [](char c) { return c >= '0' && c <= '9'; })) {
          const auto cp = static_cast<std::uint32_t>(std::stoul(std::string(body)));
          if (cp <= 0x10FFFF) {
            append_utf8(out, cp);
            done = true;
          }
        } else {
          for (const auto& [name, ch] : named)
            if (body == name) {
              out += ch;
              done = true;
            }
        }
        if (done) {
          i = semi + 1;
          continue;
        }
      }
    }
    out += s[i++];
  }
  return out;
}

std::string_view arrow(LinkKind k) {
  switch (k) {
    case LinkKind::Call: return "-->";
    case LinkKind::Data: return "-.->";
    case LinkKind::Dependency: return "==>";
  }
  return "-->";
}

void emit_diagram(const ArchDiagram& d, int depth, std::string& out);

void emit_node(const ArchDiagram& d, const DiagramNode& n, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  auto sub = d.subviews.find(n.id);
  if (sub != d.subviews.end()) {
    out += pad + "subgraph " + n.id + "[\"" + escape_label(n.label) + "\"]\n";
    emit_diagram(*sub->second, depth + 1, out);
    out += pad + "end\n";
    return;
  }
  out += pad + n.id + "[\"" + escape_label(n.label) + "\"]";
  if (n.kind == NodeKind::File) out += ":::file";
  else if (n.kind == NodeKind::Subview) out += ":::subview";
  out += '\n';
}

void emit_diagram(const ArchDiagram& d, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::set<std::string> placed;
  for (const auto& l : d.layers) {
    out += pad + "subgraph " + l.id + "[\"" + escape_label(l.label) + "\"]\n";
    for (const auto& [id, n] : d.nodes)
      if (n.layer_id == l.id) {
        emit_node(d, n, depth + 1, out);
        placed.insert(id);
      }
    out += pad + "end\n";
  }
  for (const auto& [id, n] : d.nodes)
    if (!placed.count(id)) emit_node(d, n, depth, out);
  for (const auto& [k, label] : d.edges) {
    out += pad + k.src + ' ' + std::string(arrow(k.kind));
    if (!label.empty()) out += '|' + escape_edge_label(label) + '|';
    out += ' ' + k.dst + '\n';
  }
}

// --- parsing ---------------------------------------------------------------

bool id_char(char c) {
  return is_alnum(c) || c == '_' || c == '.' || c == '/' ||
         static_cast<unsigned char>(c) >= 0x80;
}

struct NodeRef {
  std::string id;
  std::optional<std::string> label;
  std::optional<NodeKind> kind;
};

struct Link {
  LinkKind kind = LinkKind::Call;
  std::string label;
};

class Cursor {
public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return i_ >= s_.size(); }
  char peek(std::size_t k = 0) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }
  void skip_ws() {
    while (!done() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }
  bool starts_with(std::string_view p) const { return s_.substr(i_).substr(0, p.size()) == p; }
  void advance(std::size_t n) { i_ = std::min(s_.size(), i_ + n); }
  std::size_t pos() const { return i_; }
  void seek(std::size_t p) { i_ = p; }
  std::string_view rest() const { return s_.substr(i_); }

  std::string read_id() {
    const auto b = i_;
    while (!done() && id_char(s_[i_])) ++i_;
    return std::string(s_.substr(b, i_ - b));
  }

  // Reads a bracketed label: ["x"], [x], (x), {x}, ((x)), ([x]), [(x)],
  // [[x]], {{x}}, [/x/], >x]. Returns nullopt and restores position when no
  // shape starts here.
  std::optional<std::string> read_shape() {
    const auto start = i_;
    std::string open;
    if (peek() == '>') {
      open = ">";
      ++i_;
    } else {
      while (open.size() < 3 && (peek() == '[' || peek() == '(' || peek() == '{')) {
        open += peek();
        ++i_;
      }
      if (open.empty()) return std::nullopt;
      if (peek() == '/' || peek() == '\\') {
        open += peek();
        ++i_;
      }
    }
    std::vector<std::string> closers;
    if (open == ">") {
      closers = {"]"};
    } else {
      std::string close;
      for (auto it = open.rbegin(); it != open.rend(); ++it) {
        switch (*it) {
          case '[': close += ']'; break;
          case '(': close += ')'; break;
          case '{': close += '}'; break;
          default: break;
        }
      }
      if (open.back() == '/' || open.back() == '\\') {
        closers = {"/" + close, "\\" + close};
      } else {
        closers = {close};
      }
    }
    std::string text;
    skip_ws();
    if (peek() == '"') {
      const auto q = s_.find('"', i_ + 1);
      if (q == std::string_view::npos) {
        i_ = start;
        return std::nullopt;
      }
      text = std::string(s_.substr(i_ + 1, q - i_ - 1));
      i_ = q + 1;
      skip_ws();
      bool closed = false;
      for (const auto& c : closers)
        if (starts_with(c)) {
          advance(c.size());
          closed = true;
          break;
        }
      if (!closed) {
        i_ = start;
        return std::nullopt;
      }
      return unescape_label(text);
    }
    std::size_t best = std::string_view::npos;
    std::size_t best_len = 0;
    for (const auto& c : closers) {
      const auto at = s_.find(c, i_);
      if (at < best) {
        best = at;
        best_len = c.size();
      }
    }
    if (best == std::string_view::npos) {
      i_ = start;
      return std::nullopt;
    }
    text = std::string(detail::trim(s_.substr(i_, best - i_)));
    i_ = best + best_len;
    return unescape_label(text);
  }

private:
  std::string_view s_;
  std::size_t i_ = 0;
};

std::optional<NodeRef> read_node_ref(Cursor& c) {
  NodeRef ref;
  ref.id = c.read_id();
  if (ref.id.empty()) return std::nullopt;
  const auto after_id = c.pos();
  c.skip_ws();
  if (auto label = c.read_shape()) ref.label = std::move(label);
  else c.seek(after_id);
  if (c.starts_with(":::")) {
    c.advance(3);
    const auto cls = c.read_id();
    if (detail::iequals(cls, "file")) ref.kind = NodeKind::File;
    else if (detail::iequals(cls, "subview")) ref.kind = NodeKind::Subview;
    else ref.kind = NodeKind::Module;
  }
  return ref;
}

bool link_char(char c) { return c == '-' || c == '=' || c == '.' || c == '<' || c == '>' || c == '~'; }

LinkKind classify(std::string_view op) {
  if (op.find('.') != std::string_view::npos) return LinkKind::Data;
  if (op.find('=') != std::string_view::npos) return LinkKind::Dependency;
  return LinkKind::Call;
}

// Arrow forms: -->, ---, -.->, ==>, ~~~ (any length), optionally followed by
// |label|, or the inline-text forms "-- text -->", "-. text .->",
// "== text ==>".
std::optional<Link> read_link(Cursor& c) {
  const auto start = c.pos();
  std::string op;
  while (!c.done() && link_char(c.peek())) {
    op += c.peek();
    c.advance(1);
  }
  // Circle/cross heads ("--o", "--x") only when followed by a space.
  if (op.size() >= 2 && (c.peek() == 'o' || c.peek() == 'x') && (c.peek(1) == ' ' || c.peek(1) == '\t')) {
    op += c.peek();
    c.advance(1);
  }
  if (op.size() < 2 || op == "..") {
    c.seek(start);
    return std::nullopt;
  }
  Link link;
  if (op == "--" || op == "-." || op == "==") {
    const std::string_view ends = op == "--" ? "-->" : op == "-." ? ".->" : "==>";
    const std::string_view alt = op == "--" ? "---" : op == "-." ? ".-" : "===";
    const auto rest = c.rest();
    auto at = rest.find(ends);
    auto len = ends.size();
    const auto at_alt = rest.find(alt);
    if (at_alt < at) {
      at = at_alt;
      len = alt.size();
    }
    if (at == std::string_view::npos) {
      c.seek(start);
      return std::nullopt;
    }
    link.label = unescape_label(detail::trim(rest.substr(0, at)));
    c.advance(at + len);
    while (!c.done() && link_char(c.peek())) c.advance(1);
    link.kind = classify(op);
    return link;
  }
  link.kind = classify(op);
  c.skip_ws();
  if (c.peek() == '|') {
    const auto rest = c.rest();
    const auto close = rest.find('|', 1);
    if (close != std::string_view::npos) {
      auto text = rest.substr(1, close - 1);
      auto t = detail::trim(text);
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') text = t.substr(1, t.size() - 2);
      else text = t;
      link.label = unescape_label(text);
      c.advance(close + 1);
    }
  }
  return link;
}

struct Builder {
  ArchDiagram d;
  std::set<std::string> explicit_nodes;
  std::set<std::string> explicit_layers;

  void declare(const NodeRef& ref, const std::string& layer, bool is_explicit) {
    const auto id = normalize_id(ref.id);
    auto it = d.nodes.find(id);
    if (it == d.nodes.end()) {
      d.add_node(id, ref.label ? *ref.label : ref.id, layer, ref.kind.value_or(NodeKind::Module));
      if (is_explicit) explicit_nodes.insert(id);
      return;
    }
    auto& n = it->second;
    const bool was_explicit = explicit_nodes.count(id) > 0;
    if (ref.label) n.label = *ref.label;  // last label wins, as in a renderer
    if (ref.kind) n.kind = *ref.kind;
    if (is_explicit && !was_explicit) {
      n.layer_id = layer;
      explicit_nodes.insert(id);
    }
  }

  void finish() {
    bool needs_default = false;
    for (auto& [id, n] : d.nodes) {
      if (d.subviews.count(id)) n.kind = NodeKind::Subview;
      if (!d.layer(n.layer_id)) needs_default = true;
    }
    if (needs_default) {
      d.add_layer("default", "default");
      for (auto& [id, n] : d.nodes)
        if (!d.layer(n.layer_id)) n.layer_id = "default";
    }
  }
};

constexpr std::string_view kDefaultLayer = "default";

class Parser {
public:
  Parser(std::vector<std::string_view> lines, std::size_t pos, std::vector<std::string>& diags)
      : lines_(std::move(lines)), pos_(pos), diags_(diags) {}

  void diagram_body(Builder& b, bool nested) {
    while (pos_ < lines_.size()) {
      const auto line = clean(lines_[pos_]);
      const auto lineno = pos_ + 1;
      ++pos_;
      if (line.empty()) continue;
      if (is_end(line)) {
        if (nested) return;
        note(lineno, "unmatched 'end'");
        continue;
      }
      if (is_keyword(line, "subgraph")) {
        auto [id, label] = subgraph_header(line);
        if (b.d.layer(id)) note(lineno, "layer '" + id + "' reopened");
        b.d.add_layer(id, label);
        layer_body(b, id);
        continue;
      }
      statement(b, line, std::string(kDefaultLayer), lineno);
    }
    if (nested) note(pos_, "subgraph not closed before end of input");
  }

private:
  void layer_body(Builder& b, const std::string& layer) {
    while (pos_ < lines_.size()) {
      const auto line = clean(lines_[pos_]);
      const auto lineno = pos_ + 1;
      ++pos_;
      if (line.empty()) continue;
      if (is_end(line)) return;
      if (is_keyword(line, "subgraph")) {
        auto [id, label] = subgraph_header(line);
        NodeRef ref{id, label, NodeKind::Subview};
        b.declare(ref, layer, true);
        Builder child;
        diagram_body(child, true);
        child.finish();
        const auto key = normalize_id(id);
        if (b.d.subviews.count(key)) note(lineno, "subview '" + key + "' defined twice");
        b.d.subviews[key] = std::move(child.d);
        continue;
      }
      statement(b, line, layer, lineno);
    }
    note(pos_, "subgraph '" + layer + "' not closed before end of input");
  }

  static std::string_view clean(std::string_view raw) {
    auto line = detail::trim(raw);
    if (line.substr(0, 2) == "%%" || line.substr(0, 3) == "```") return {};
    if (!line.empty() && line.back() == ';') line = detail::trim(line.substr(0, line.size() - 1));
    return line;
  }

  static bool is_end(std::string_view line) { return line == "end"; }

  static bool is_keyword(std::string_view line, std::string_view kw) {
    return line.substr(0, kw.size()) == kw &&
           (line.size() == kw.size() || line[kw.size()] == ' ' || line[kw.size()] == '\t');
  }

  std::pair<std::string, std::string> subgraph_header(std::string_view line) {
    auto rest = detail::trim(line.substr(8));
    if (rest.empty()) {
      const auto id = "subgraph_" + std::to_string(++anonymous_);
      return {id, id};
    }
    if (rest.front() == '"') {
      const auto q = rest.find('"', 1);
      auto label = unescape_label(rest.substr(1, q == std::string_view::npos ? rest.size() - 1 : q - 1));
      return {normalize_id(label), label};
    }
    Cursor c(rest);
    const auto raw_id = c.read_id();
    const auto after_id = c.pos();
    c.skip_ws();
    if (!raw_id.empty()) {
      if (auto label = c.read_shape()) return {normalize_id(raw_id), *label};
      c.seek(after_id);
      if (detail::trim(c.rest()).empty()) return {normalize_id(raw_id), raw_id};
    }
    const auto title = std::string(rest);
    return {normalize_id(title), unescape_label(title)};
  }

  void statement(Builder& b, std::string_view line, const std::string& layer, std::size_t lineno) {
    static const std::array<std::string_view, 8> skipped = {
        "classDef", "class", "style", "linkStyle", "click", "accTitle", "accDescr", "title"};
    if (is_keyword(line, "direction")) return;
    for (auto kw : skipped)
      if (is_keyword(line, kw) || line.substr(0, kw.size() + 1) == std::string(kw) + ":") {
        note(lineno, "skipped directive: " + std::string(line));
        return;
      }

    Cursor c(line);
    auto group = node_group(c);
    if (group.empty()) {
      note(lineno, "unrecognized line skipped: " + std::string(line));
      return;
    }
    c.skip_ws();
    if (c.done()) {
      for (const auto& ref : group) b.declare(ref, layer, true);
      return;
    }
    // Collect the whole chain first so a dangling arrow drops only its link.
    std::vector<std::vector<NodeRef>> groups{group};
    std::vector<Link> links;
    while (!c.done()) {
      auto link = read_link(c);
      if (!link) {
        note(lineno, "unparsed text after '" + std::string(line.substr(0, c.pos())) + "'");
        break;
      }
      c.skip_ws();
      auto next = node_group(c);
      if (next.empty()) {
        note(lineno, "edge without target dropped: " + std::string(line));
        break;
      }
      links.push_back(*link);
      groups.push_back(std::move(next));
      c.skip_ws();
    }
    for (const auto& g : groups)
      for (const auto& ref : g) b.declare(ref, layer, ref.label.has_value() || ref.kind.has_value());
    for (std::size_t i = 0; i < links.size(); ++i)
      for (const auto& s : groups[i])
        for (const auto& t : groups[i + 1])
          b.d.add_edge(normalize_id(s.id), normalize_id(t.id), links[i].kind, links[i].label);
  }

  static std::vector<NodeRef> node_group(Cursor& c) {
    std::vector<NodeRef> out;
    for (;;) {
      c.skip_ws();
      auto ref = read_node_ref(c);
      if (!ref) break;
      out.push_back(std::move(*ref));
      c.skip_ws();
      if (c.peek() != '&') break;
      c.advance(1);
    }
    return out;
  }

  void note(std::size_t lineno, const std::string& msg) {
    diags_.push_back("mermaid line " + std::to_string(lineno) + ": " + msg);
  }

  std::vector<std::string_view> lines_;
  std::size_t pos_;
  std::vector<std::string>& diags_;
  int anonymous_ = 0;
};

// --- merging ---------------------------------------------------------------

std::map<std::string, std::size_t> degrees(const ArchDiagram& d) {
  std::map<std::string, std::size_t> deg;
  for (const auto& [k, label] : d.edges) {
    ++deg[normalize_id(k.src)];
    if (k.dst != k.src) ++deg[normalize_id(k.dst)];
  }
  return deg;
}

ArchDiagram merge_parts(const std::vector<std::pair<std::size_t, const ArchDiagram*>>& parts) {
  ArchDiagram out;
  for (const auto& [gi, d] : parts)
    for (const auto& l : d->layers) out.add_layer(normalize_id(l.id), l.label);

  struct Choice {
    std::size_t degree = 0;
    std::size_t group = 0;
  };
  std::map<std::string, Choice> chosen;
  std::map<std::string, std::vector<std::pair<std::size_t, const ArchDiagram*>>> nested;

  for (const auto& [gi, d] : parts) {
    const auto deg = degrees(*d);
    for (const auto& [raw_id, n] : d->nodes) {
      const auto id = normalize_id(raw_id);
      const auto dg = deg.count(id) ? deg.at(id) : 0;
      auto it = out.nodes.find(id);
      if (it == out.nodes.end()) {
        out.add_node(id, n.label, normalize_id(n.layer_id), n.kind);
        chosen[id] = {dg, gi};
        continue;
      }
      auto& m = it->second;
      if (n.label.size() > m.label.size()) m.label = n.label;
      auto& ch = chosen[id];
      if (dg > ch.degree || (dg == ch.degree && gi < ch.group)) {
        m.layer_id = normalize_id(n.layer_id);
        m.kind = n.kind;
        ch = {dg, gi};
      }
    }
    for (const auto& [k, label] : d->edges) {
      LinkKey key{normalize_id(k.src), normalize_id(k.dst), k.kind};
      auto it = out.edges.find(key);
      if (it == out.edges.end()) out.edges.emplace(std::move(key), label);
      else if (label.size() > it->second.size()) it->second = label;
    }
    for (const auto& [id, sub] : d->subviews) nested[normalize_id(id)].push_back({gi, &*sub});
  }
  for (auto& [id, subs] : nested) {
    out.subviews[id] = merge_parts(subs);
    if (auto it = out.nodes.find(id); it != out.nodes.end()) it->second.kind = NodeKind::Subview;
  }
  return out;
}

json diagram_json(const ArchDiagram& d) {
  json j;
  j["layers"] = json::array();
  for (const auto& l : d.layers) j["layers"].push_back({{"id", l.id}, {"label", l.label}});
  j["nodes"] = json::array();
  for (const auto& [id, n] : d.nodes)
    j["nodes"].push_back(
        {{"id", n.id}, {"label", n.label}, {"layer", n.layer_id}, {"kind", to_string(n.kind)}});
  j["edges"] = json::array();
  for (const auto& [k, label] : d.edges) {
    json e = {{"src", k.src}, {"dst", k.dst}, {"kind", to_string(k.kind)}};
    if (!label.empty()) e["label"] = label;
    j["edges"].push_back(std::move(e));
  }
  j["subviews"] = json::object();
  for (const auto& [id, sub] : d.subviews) j["subviews"][id] = diagram_json(*sub);
  return j;
}

NodeKind node_kind_from(const std::string& s) {
  if (s == "module") return NodeKind::Module;
  if (s == "file") return NodeKind::File;
  if (s == "subview") return NodeKind::Subview;
  throw Error(ErrorKind::SchemaViolation, "diagram: unknown node kind '" + s + "'");
}

LinkKind link_kind_from(const std::string& s) {
  if (s == "call") return LinkKind::Call;
  if (s == "data") return LinkKind::Data;
  if (s == "dependency") return LinkKind::Dependency;
  throw Error(ErrorKind::SchemaViolation, "diagram: unknown edge kind '" + s + "'");
}

ArchDiagram diagram_from(const json& j) {
  constexpr std::string_view what = "diagram";
  ArchDiagram d;
  for (const auto& l : detail::require<json>(j, "layers", what))
    d.layers.push_back({detail::require<std::string>(l, "id", what),
                        detail::require<std::string>(l, "label", what)});
  for (const auto& n : detail::require<json>(j, "nodes", what))
    d.add_node(detail::require<std::string>(n, "id", what),
               detail::require<std::string>(n, "label", what),
               detail::require<std::string>(n, "layer", what),
               node_kind_from(detail::require<std::string>(n, "kind", what)));
  for (const auto& e : detail::require<json>(j, "edges", what))
    d.add_edge(detail::require<std::string>(e, "src", what),
               detail::require<std::string>(e, "dst", what),
               link_kind_from(detail::require<std::string>(e, "kind", what)),
               e.contains("label") ? detail::require<std::string>(e, "label", what) : "");
  if (j.contains("subviews"))
    for (const auto& [id, sub] : j.at("subviews").items()) d.subviews[id] = diagram_from(sub);
  return d;
}

}  // namespace

std::vector<std::string> diagram_problems(const ArchDiagram& d) {
  std::vector<std::string> out;
  collect_problems(d, "", out);
  return out;
}

std::string to_mermaid(const ArchDiagram& d) {
  std::string out = "flowchart TD\n";
  emit_diagram(d, 1, out);
  return out;
}

ArchDiagram parse_mermaid(std::string_view text, std::vector<std::string>* diagnostics) {
  std::vector<std::string> local;
  auto& diags = diagnostics ? *diagnostics : local;
  auto lines = detail::split_lines(text);
  std::size_t header = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.substr(0, 9) == "flowchart" || line.substr(0, 5) == "graph") {
      const auto kw = line.substr(0, 9) == "flowchart" ? 9u : 5u;
      if (line.size() == kw || line[kw] == ' ' || line[kw] == '\t' || line[kw] == ';') {
        header = i;
        break;
      }
    }
  }
  if (header == lines.size())
    throw Error(ErrorKind::MermaidSyntax, "no flowchart header found");
  if (header > 0)
    diags.push_back("mermaid: skipped " + std::to_string(header) + " line(s) before the header");

  Builder b;
  Parser p(std::move(lines), header + 1, diags);
  p.diagram_body(b, false);
  b.finish();
  return std::move(b.d);
}

ArchDiagram merge_diagrams(const std::vector<PartialDiagram>& parts) {
  std::vector<std::pair<std::size_t, const ArchDiagram*>> view;
  view.reserve(parts.size());
  for (const auto& p : parts) view.push_back({p.group_index, &p.diagram});
  return merge_parts(view);
}

std::string diagram_to_json(const ArchDiagram& d) {
  auto j = diagram_json(d);
  j["version"] = 1;
  return j.dump(2) + "\n";
}

ArchDiagram diagram_from_json(std::string_view text) {
  const auto j = detail::parse_json(text, "diagram");
  if (detail::require<int>(j, "version", "diagram") != 1)
    throw Error(ErrorKind::SchemaViolation, "diagram: unsupported version");
  auto d = diagram_from(j);
  auto problems = diagram_problems(d);
  if (!problems.empty()) throw Error(ErrorKind::SchemaViolation, "diagram: " + problems.front());
  return d;
}

}  // namespace archrecon
