#include <algorithm>
#include <unordered_map>

#include "detail/json_util.hpp"
#include "detail/parallel.hpp"
#include "facts.hpp"

namespace archrecon {

namespace refs {

namespace {

// More than this share of bytes under ERROR/MISSING nodes counts as a parse
// failure; below it the recovered structure is kept.
constexpr double kMaxErrorShare = 0.10;

std::size_t error_bytes(const ts::Node& root) {
  if (!root.has_error()) return 0;
  std::size_t bytes = 0;
  ts::visit(root, [&](const ts::Node& n) {
    if (n.is_error()) {
      bytes += n.text().size();
      return false;
    }
    return n.has_error();
  });
  return bytes;
}

ts::Parser& parser_for(Language lang, const TSLanguage* grammar) {
  thread_local std::unordered_map<int, std::unique_ptr<ts::Parser>> parsers;
  auto& slot = parsers[static_cast<int>(lang)];
  if (!slot) slot = std::make_unique<ts::Parser>(grammar);
  return *slot;
}

}  // namespace

FileFacts extract_facts(const SourceFile& file) {
  FileFacts bare;
  bare.path = file.path;
  bare.language = file.language;
  const TSLanguage* grammar = ts::grammar_for(file.language);
  if (!grammar) {
    bare.diagnostics.push_back(file.path + ": no grammar for " +
                               std::string(to_string(file.language)) +
                               ", indexed as a bare file");
    return bare;
  }
  auto tree = parser_for(file.language, grammar).parse(file.content);
  auto bad = tree ? error_bytes(ts::Node(ts_tree_root_node(tree.get()), file.content)) : 0;
  if (file.language == Language::C && file.path.ends_with(".h") && (!tree || bad > 0)) {
    // Headers are shared by C and C++; take the grammar that fits better.
    auto cpp_tree = parser_for(Language::Cpp, ts::grammar_for(Language::Cpp)).parse(file.content);
    if (cpp_tree) {
      const auto cpp_bad = error_bytes(ts::Node(ts_tree_root_node(cpp_tree.get()), file.content));
      if (!tree || cpp_bad < bad) {
        tree = std::move(cpp_tree);
        bad = cpp_bad;
      }
    }
  }
  if (!tree) {
    bare.diagnostics.push_back(file.path + ": ParseFailure: parser produced no tree");
    return bare;
  }
  const ts::Node root(ts_tree_root_node(tree.get()), file.content);
  if (bad > 0 && static_cast<double>(bad) > kMaxErrorShare * static_cast<double>(file.content.size())) {
    bare.diagnostics.push_back(file.path + ": ParseFailure: " + std::to_string(bad) + " of " +
                               std::to_string(file.content.size()) + " bytes unparseable");
    return bare;
  }

  FileFacts facts;
  switch (file.language) {
    case Language::Python: facts = extract_python(file, root); break;
    case Language::Java: facts = extract_java(file, root); break;
    case Language::Go: facts = extract_go(file, root); break;
    case Language::C:
    case Language::Cpp: facts = extract_cfamily(file, root); break;
    case Language::JavaScript:
    case Language::TypeScript: facts = extract_ecmascript(file, root); break;
    case Language::Rust: facts = extract_rust(file, root); break;
    default: return bare;
  }
  facts.path = file.path;
  facts.language = file.language;
  facts.parsed = true;
  if (bad > 0)
    facts.diagnostics.push_back(file.path + ": recovered from syntax errors in " +
                                std::to_string(bad) + " bytes");
  return facts;
}

}  // namespace refs

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::File: return "File";
    case Granularity::Class: return "Class";
    case Granularity::Function: return "Function";
  }
  return "File";
}

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Import: return "Import";
    case EdgeKind::Call: return "Call";
    case EdgeKind::Inheritance: return "Inheritance";
  }
  return "Import";
}

const RefNode* ReferenceGraph::node(std::string_view id) const {
  auto it = nodes.find(std::string(id));
  return it == nodes.end() ? nullptr : &it->second;
}

bool ReferenceGraph::has_file(std::string_view path) const {
  const auto* n = node(path);
  return n && n->granularity == Granularity::File;
}

std::vector<const RefNode*> ReferenceGraph::symbols_in(std::string_view path) const {
  std::vector<const RefNode*> out;
  const std::string prefix = std::string(path) + "::";
  for (auto it = nodes.lower_bound(prefix); it != nodes.end() && it->first.starts_with(prefix); ++it)
    if (it->second.file == path) out.push_back(&it->second);
  return out;
}

ReferenceGraph build_reference_graph(const RepoModel& repo, unsigned threads) {
  std::vector<refs::FileFacts> facts(repo.files.size());
  detail::parallel_for(repo.files.size(), threads,
                       [&](std::size_t i) { facts[i] = refs::extract_facts(repo.files[i]); });
  return refs::resolve(repo, facts);
}

namespace {

std::string file_of(const ReferenceGraph& graph, const std::string& id) {
  const auto* n = graph.node(id);
  return n ? n->file : id;
}

}  // namespace

FileProjection file_projection(const ReferenceGraph& graph) {
  FileProjection out;
  for (const auto& e : graph.edges) {
    auto a = file_of(graph, e.src);
    auto b = file_of(graph, e.dst);
    if (a != b) out[a].insert(std::move(b));
  }
  return out;
}

std::map<std::pair<std::string, std::string>, std::size_t> file_edge_counts(
    const ReferenceGraph& graph) {
  std::map<std::pair<std::string, std::string>, std::size_t> out;
  for (const auto& e : graph.edges) {
    auto a = file_of(graph, e.src);
    auto b = file_of(graph, e.dst);
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    ++out[{std::move(a), std::move(b)}];
  }
  return out;
}

std::vector<std::string> neighbors(const ReferenceGraph& graph, std::string_view file,
                                   unsigned depth) {
  if (!graph.has_file(file))
    throw Error(ErrorKind::UnknownFile, "unknown file: " + std::string(file));
  const auto counts = file_edge_counts(graph);
  std::map<std::string, std::map<std::string, std::size_t>> adj;
  for (const auto& [pair, n] : counts) {
    adj[pair.first][pair.second] = n;
    adj[pair.second][pair.first] = n;
  }
  const std::string seed(file);
  std::map<std::string, unsigned> hop{{seed, 0}};
  std::vector<std::string> frontier{seed};
  std::vector<std::string> out;
  for (unsigned h = 1; h <= depth && !frontier.empty(); ++h) {
    std::map<std::string, std::size_t> weight;
    for (const auto& f : frontier) {
      auto it = adj.find(f);
      if (it == adj.end()) continue;
      for (const auto& [g, n] : it->second)
        if (!hop.count(g)) weight[g] += n;
    }
    std::vector<std::pair<std::string, std::size_t>> layer(weight.begin(), weight.end());
    std::stable_sort(layer.begin(), layer.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    frontier.clear();
    for (auto& [g, n] : layer) {
      hop[g] = h;
      frontier.push_back(g);
      out.push_back(g);
    }
  }
  return out;
}

std::string graph_to_json(const ReferenceGraph& graph) {
  using detail::json;
  json nodes = json::array();
  for (const auto& [id, n] : graph.nodes)
    nodes.push_back({{"id", n.id},
                     {"granularity", to_string(n.granularity)},
                     {"name", n.name},
                     {"file", n.file}});
  json edges = json::array();
  for (const auto& e : graph.edges)
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  json unresolved = json::array();
  for (const auto& u : graph.unresolved)
    unresolved.push_back({{"src", u.src}, {"target", u.target}});
  json doc = {{"version", 1},
              {"nodes", nodes},
              {"edges", edges},
              {"unresolved", unresolved},
              {"diagnostics", graph.diagnostics}};
  return doc.dump(1);
}

ReferenceGraph graph_from_json(std::string_view text) {
  using detail::json;
  using detail::require;
  constexpr std::string_view what = "graph.json";
  const auto doc = detail::parse_json(text, what);
  ReferenceGraph g;
  for (const auto& n : require<json>(doc, "nodes", what)) {
    RefNode node;
    node.id = require<std::string>(n, "id", what);
    const auto gran = require<std::string>(n, "granularity", what);
    if (gran == "File") node.granularity = Granularity::File;
    else if (gran == "Class") node.granularity = Granularity::Class;
    else if (gran == "Function") node.granularity = Granularity::Function;
    else throw Error(ErrorKind::SchemaViolation, "graph.json: unknown granularity '" + gran + "'");
    node.name = require<std::string>(n, "name", what);
    node.file = require<std::string>(n, "file", what);
    g.nodes[node.id] = std::move(node);
  }
  for (const auto& e : require<json>(doc, "edges", what)) {
    RefEdge edge;
    edge.src = require<std::string>(e, "src", what);
    edge.dst = require<std::string>(e, "dst", what);
    const auto kind = require<std::string>(e, "kind", what);
    if (kind == "Import") edge.kind = EdgeKind::Import;
    else if (kind == "Call") edge.kind = EdgeKind::Call;
    else if (kind == "Inheritance") edge.kind = EdgeKind::Inheritance;
    else throw Error(ErrorKind::SchemaViolation, "graph.json: unknown edge kind '" + kind + "'");
    if (!g.nodes.count(edge.src) || !g.nodes.count(edge.dst))
      throw Error(ErrorKind::SchemaViolation, "graph.json: edge endpoint is not a node");
    g.edges.insert(std::move(edge));
  }
  if (doc.contains("unresolved"))
    for (const auto& u : doc["unresolved"])
      g.unresolved.insert({require<std::string>(u, "src", what), require<std::string>(u, "target", what)});
  if (doc.contains("diagnostics"))
    g.diagnostics = doc["diagnostics"].get<std::vector<std::string>>();
  return g;
}

}  // namespace archrecon
