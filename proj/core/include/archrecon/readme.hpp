#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/gateway.hpp"
#include "archrecon/ref_index.hpp"
#include "archrecon/repo_model.hpp"
#include "archrecon/summarizer.hpp"

namespace archrecon {

// Declaration order is the reporting precedence.
enum class EntryKind { ManifestDeclared, MainFunction, ServerBootstrap, CliBinary, LlmNominated };

std::string_view to_string(EntryKind kind);
std::optional<EntryKind> entry_kind_from_string(std::string_view name);

struct EntryPoint {
  std::string file;
  EntryKind kind = EntryKind::MainFunction;
  std::string evidence;

  bool operator==(const EntryPoint&) const = default;
};

struct Trace {
  EntryPoint entry;
  std::vector<std::string> path_nodes;  // RefNode ids

  bool operator==(const Trace&) const = default;
};

struct ApiUsage {
  std::string endpoint;
  std::string method;
  std::vector<std::string> callers;
  double qps = 0.0;

  bool operator==(const ApiUsage&) const = default;
};

struct RepoSignals {
  std::string name;
  std::optional<std::string> doc_text;
  std::vector<ApiUsage> apis;

  bool operator==(const RepoSignals&) const = default;
};

struct CrossRepoSignals {
  std::vector<RepoSignals> repos;

  bool empty() const { return repos.empty(); }
  bool operator==(const CrossRepoSignals&) const = default;
};

inline constexpr std::array<std::string_view, 4> kReadmeSections = {
    "Architecture", "Key Modules", "Primary Workflows", "Entry Points"};

struct ReadmeDoc {
  std::string text;
  std::vector<std::string> sections;  // headings found, in order
};

// Deterministic detectors (manifest declarations, conventional main
// constructs, server bootstraps, CLI scripts) plus, when a gateway is given,
// backend nominations validated against repository paths. One entry per
// file, the highest-precedence kind winning. Ordered by kind, then path.
std::vector<EntryPoint> find_entry_points(const RepoModel& repo, const ReferenceGraph& graph,
                                          Gateway* gateway = nullptr,
                                          const std::vector<FileSummary>* summaries = nullptr,
                                          std::vector<std::string>* diagnostics = nullptr);

// Heaviest outgoing path (Call and Import edges) from any node of the entry
// file: most distinct files, then fewest nodes, then most Call edges, then
// the lexicographically smallest id sequence. Throws Error{UnknownFile}.
Trace trace_downstream(const EntryPoint& entry, const ReferenceGraph& graph,
                       unsigned max_depth = 6);

// Every consecutive pair of path_nodes is a graph edge and the first node
// lives in the entry file.
bool trace_is_valid(const Trace& trace, const ReferenceGraph& graph);

struct ReadmeOptions {
  std::string repo_name = "repository";
  // Supplies file fan-in for evicting summaries when the prompt is too big.
  const ReferenceGraph* graph = nullptr;
  std::uint32_t max_output_tokens = 4096;
};

// Throws Error{Precondition} on empty summaries and
// Error{SectionValidationFailure} when the reply still lacks a required
// section or an entry after one repair attempt. Empty signals are treated
// exactly like absent ones.
ReadmeDoc generate_readme(const std::vector<FileSummary>& summaries,
                          const std::vector<Trace>& traces, const CrossRepoSignals* signals,
                          Gateway& gateway, const ReadmeOptions& options = {},
                          std::vector<std::string>* diagnostics = nullptr);

// Problems with `text` as a README for these entries; empty when valid.
std::vector<std::string> readme_problems(std::string_view text,
                                         const std::vector<EntryPoint>& entries);

// Wraps stored README text, recovering its heading list.
ReadmeDoc readme_from_text(std::string text);

// Markdown block appended to the model content: API table by descending
// QPS, then documentation excerpts. Empty for empty signals.
std::string render_signals(const CrossRepoSignals& signals);

CrossRepoSignals signals_from_json(std::string_view text);
std::string signals_to_json(const CrossRepoSignals& signals);

std::string entries_to_json(const std::vector<EntryPoint>& entries);
std::vector<EntryPoint> entries_from_json(std::string_view text);
std::string traces_to_json(const std::vector<Trace>& traces);
std::vector<Trace> traces_from_json(std::string_view text);

}  // namespace archrecon
