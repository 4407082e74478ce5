#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/repo_model.hpp"

namespace archrecon {

enum class Granularity { File, Class, Function };
enum class EdgeKind { Import, Call, Inheritance };

std::string_view to_string(Granularity g);
std::string_view to_string(EdgeKind k);

// Node ids: "path" (File), "path::Class" (Class), "path::func" or
// "path::Class::func" (Function).
struct RefNode {
  std::string id;
  Granularity granularity = Granularity::File;
  std::string name;
  std::string file;

  bool operator==(const RefNode&) const = default;
};

struct RefEdge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::Import;

  auto operator<=>(const RefEdge&) const = default;
};

struct UnresolvedRef {
  std::string src;     // node id that made the reference
  std::string target;  // name as written in source

  auto operator<=>(const UnresolvedRef&) const = default;
};

struct ReferenceGraph {
  std::map<std::string, RefNode> nodes;  // keyed by id
  std::set<RefEdge> edges;
  std::set<UnresolvedRef> unresolved;
  std::vector<std::string> diagnostics;

  const RefNode* node(std::string_view id) const;
  bool has_file(std::string_view path) const;
  // Class and Function nodes declared in `path` (excluding the File node).
  std::vector<const RefNode*> symbols_in(std::string_view path) const;

  bool operator==(const ReferenceGraph&) const = default;
};

// Parses every file with its grammar and resolves imports, calls and
// inheritance across the repository. Per-file parse failures are recorded
// in diagnostics and leave a bare File node.
ReferenceGraph build_reference_graph(const RepoModel& repo, unsigned threads = 0);

using FileProjection = std::map<std::string, std::set<std::string>>;

// Collapses every edge to (file, file) pairs, dropping self-loops. Only files
// with at least one outgoing reference appear as keys.
FileProjection file_projection(const ReferenceGraph& graph);

// Number of underlying edges between each unordered pair of distinct files.
std::map<std::pair<std::string, std::string>, std::size_t> file_edge_counts(
    const ReferenceGraph& graph);

// Files within `depth` undirected hops of `file` in the file projection,
// excluding `file`. Ordered by hop count, then by the number of underlying
// edges linking the file to files one hop closer (descending), then path.
// Throws Error{UnknownFile}.
std::vector<std::string> neighbors(const ReferenceGraph& graph, std::string_view file,
                                   unsigned depth);

std::string graph_to_json(const ReferenceGraph& graph);
ReferenceGraph graph_from_json(std::string_view text);

}  // namespace archrecon
