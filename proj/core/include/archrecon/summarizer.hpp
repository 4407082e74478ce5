#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/gateway.hpp"
#include "archrecon/grouper.hpp"
#include "archrecon/ref_index.hpp"
#include "archrecon/repo_model.hpp"

namespace archrecon {

struct FileSummary {
  std::string path;
  std::string summary;
  std::vector<std::string> related_files;
  std::vector<std::string> exported_symbols;

  bool operator==(const FileSummary&) const = default;
};

struct SummarizerConfig {
  std::uint64_t summary_token_cap = 300;
  std::size_t max_related = 8;
  std::uint32_t max_output_tokens = 1024;
  std::size_t max_edge_lines = 400;
  double max_failure_share = 0.20;
};

// Top-level classes and functions of `path` that the language treats as
// public, sorted.
std::vector<std::string> exported_symbols(const ReferenceGraph& graph, std::string_view path);

// The summarize-file request: file content (head/tail truncated to fit the
// context), its edges at every granularity, and depth-1 neighbors as
// related-file candidates.
LlmRequest summary_request(const SourceFile& file, const ReferenceGraph& graph,
                           std::uint64_t context_tokens, const SummarizerConfig& config = {});

// Throws Error{UnknownFile} when the graph lacks the file; gateway errors
// propagate. Backend-named related files that are not repository files are
// dropped and reported in `diagnostics`.
FileSummary summarize_file(const SourceFile& file, const ReferenceGraph& graph, Gateway& gateway,
                           const SummarizerConfig& config = {},
                           std::vector<std::string>* diagnostics = nullptr);

struct SummaryRun {
  std::vector<FileSummary> summaries;  // canonical file order
  std::vector<std::string> diagnostics;
  std::size_t failures = 0;
};

// Summarizes every file, up to the gateway's concurrency at once. A file
// whose request fails gets an extractive fallback summary; more than
// max_failure_share failures throws Error{TooManyFailures}.
SummaryRun summarize_repo(const RepoModel& repo, const ReferenceGraph& graph, Gateway& gateway,
                          const SummarizerConfig& config = {});

// Head and tail of `text` within `allowance_tokens` (70% / 30%), joined by
// a marker line. Returns text unchanged when it fits.
std::string truncate_head_tail(std::string_view text, std::uint64_t allowance_tokens);

TokenWeights summary_weights(const std::vector<FileSummary>& summaries);

std::string summaries_to_jsonl(const std::vector<FileSummary>& summaries);
std::vector<FileSummary> summaries_from_jsonl(std::string_view text);

}  // namespace archrecon
