#include "archrecon/summarizer.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/prompt.hpp"
#include "detail/extractive.hpp"
#include "detail/json_util.hpp"
#include "detail/parallel.hpp"
#include "detail/text.hpp"

namespace archrecon {

using detail::json;

namespace {

constexpr std::string_view kSystemPrompt =
    "You are documenting one file of a software repository.\n"
    "The user message contains the file (<<<FILE|path>>>), its public symbols,\n"
    "its references to and from other code (<<<EDGES>>>, one per line as\n"
    "'out|in KIND source -> target') and candidate related files (<<<CANDIDATES>>>).\n"
    "First identify the other files that are functionally closely related to this\n"
    "one. Then write the summary. Reply in exactly this format:\n"
    "RELATED FILES:\n"
    "- <repository path>\n"
    "=== SUMMARY ===\n"
    "<summary: purpose, main responsibilities, key symbols, how it collaborates\n"
    "with the related files; at most 200 words>\n";

bool is_public(std::string_view name, Language lang) {
  if (name.empty()) return false;
  if (lang == Language::Go) return name.front() >= 'A' && name.front() <= 'Z';
  return name.front() != '_';
}

std::string strip_item(std::string_view item) {
  auto s = detail::trim(item);
  while (!s.empty() && (s.front() == '`' || s.front() == '"' || s.front() == '\'')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '`' || s.back() == '"' || s.back() == '\'' || s.back() == ','))
    s.remove_suffix(1);
  if (s.substr(0, 2) == "./") s.remove_prefix(2);
  return std::string(s);
}

std::string cap_tokens(std::string text, std::uint64_t cap) {
  if (token_estimate(text) <= cap) return text;
  const auto max_bytes = cap * 4;
  auto cut = detail::utf8_floor(text, max_bytes > 3 ? max_bytes - 3 : 0);
  const auto space = text.rfind(' ', cut);
  if (space != std::string::npos && space > cut / 2) cut = space;
  text.resize(cut);
  return text + "...";
}

// Per-file reference lines, depth-1 neighbours and parse failures, built
// once per graph so summarizing a repository stays linear in its edges.
struct GraphIndex {
  std::map<std::string, std::vector<std::string>> edge_lines;
  std::map<std::string, std::map<std::string, std::size_t>> adjacent;
  std::set<std::string> parse_failed;

  explicit GraphIndex(const ReferenceGraph& graph) {
    for (const auto& e : graph.edges) {
      const auto* s = graph.node(e.src);
      const auto* d = graph.node(e.dst);
      if (!s || !d) continue;
      const auto tail = std::string(to_string(e.kind)) + " " + e.src + " -> " + e.dst;
      edge_lines[s->file].push_back("out " + tail);
      if (d->file != s->file) edge_lines[d->file].push_back("in " + tail);
    }
    for (const auto& [pair, n] : file_edge_counts(graph)) {
      adjacent[pair.first][pair.second] = n;
      adjacent[pair.second][pair.first] = n;
    }
    for (const auto& d : graph.diagnostics) {
      const auto at = d.find(": ParseFailure");
      if (at != std::string::npos) parse_failed.insert(d.substr(0, at));
    }
  }

  // Same order as neighbors(graph, path, 1).
  std::vector<std::string> near(const std::string& path) const {
    std::vector<std::pair<std::string, std::size_t>> layer;
    if (auto it = adjacent.find(path); it != adjacent.end()) layer.assign(it->second.begin(), it->second.end());
    std::stable_sort(layer.begin(), layer.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (auto& [g, n] : layer) out.push_back(std::move(g));
    return out;
  }

  std::string edges_for(const std::string& path, std::size_t limit) const {
    auto it = edge_lines.find(path);
    if (it == edge_lines.end()) return {};
    const auto& lines = it->second;
    std::string text;
    const auto shown = std::min(limit, lines.size());
    for (std::size_t i = 0; i < shown; ++i) text += lines[i] + "\n";
    if (shown < lines.size())
      text += "... (" + std::to_string(lines.size() - shown) + " more references)\n";
    return text;
  }
};

}  // namespace

std::vector<std::string> exported_symbols(const ReferenceGraph& graph, std::string_view path) {
  const auto lang = language_for_path(path);
  std::set<std::string> out;
  const std::string prefix = std::string(path) + "::";
  for (const auto* n : graph.symbols_in(path)) {
    const auto local = std::string_view(n->id).substr(prefix.size());
    if (local.find("::") != std::string_view::npos) continue;  // member of a class
    if (is_public(n->name, lang)) out.insert(n->name);
  }
  return {out.begin(), out.end()};
}

std::string truncate_head_tail(std::string_view text, std::uint64_t allowance_tokens) {
  if (token_estimate(text) <= allowance_tokens) return std::string(text);
  const auto budget = allowance_tokens * 4;
  const auto head = detail::utf8_floor(text, budget * 7 / 10);
  const auto tail_start = detail::utf8_ceil(text, text.size() - std::min<std::uint64_t>(text.size(), budget * 3 / 10));
  std::string out(text.substr(0, head));
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "... [truncated " + std::to_string(tail_start - head) + " bytes] ...\n";
  out += text.substr(std::max<std::size_t>(tail_start, head));
  return out;
}

namespace {

LlmRequest request_with(const SourceFile& file, const ReferenceGraph& graph, const GraphIndex& index,
                        std::uint64_t context_tokens, const SummarizerConfig& config) {
  if (!graph.has_file(file.path))
    throw Error(ErrorKind::UnknownFile, "reference graph has no file " + file.path);
  LlmRequest req;
  req.system_prompt = prompt::task_line(prompt::kSummarizeFile) + "\n" + std::string(kSystemPrompt);
  req.max_output_tokens = config.max_output_tokens;

  std::string symbols;
  for (const auto& s : exported_symbols(graph, file.path)) symbols += "- " + s + "\n";
  std::string candidates;
  for (const auto& n : index.near(file.path)) candidates += "- " + n + "\n";
  const auto rest = prompt::section("SYMBOLS", symbols) +
                    prompt::section("EDGES", index.edges_for(file.path, config.max_edge_lines)) +
                    prompt::section("CANDIDATES", candidates);

  const auto overhead = token_estimate(req.system_prompt) + token_estimate(rest) +
                        token_estimate(prompt::section("FILE", "", file.path)) +
                        config.max_output_tokens + 64;
  const auto allowance = context_tokens > overhead ? context_tokens - overhead : 0;
  req.user_content = prompt::section("FILE", truncate_head_tail(file.content, allowance), file.path) + rest;
  return req;
}

FileSummary summarize_with(const SourceFile& file, const ReferenceGraph& graph, const GraphIndex& index,
                           Gateway& gateway, const SummarizerConfig& config, std::vector<std::string>* diagnostics) {
  const auto req = request_with(file, graph, index, gateway.context_tokens(), config);
  if (diagnostics && index.parse_failed.count(file.path))
    diagnostics->push_back(file.path + ": summarized from raw content (no parse tree)");
  const auto resp = gateway.complete(req);

  FileSummary out;
  out.path = file.path;
  out.exported_symbols = exported_symbols(graph, file.path);

  const auto lines = detail::split_lines(resp.text);
  std::size_t delim = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (detail::trim(lines[i]) == prompt::kSummaryDelimiter) {
      delim = i;
      break;
    }
  std::string summary;
  if (delim == lines.size()) {
    summary = std::string(detail::trim(resp.text));
    if (diagnostics) diagnostics->push_back(file.path + ": backend reply lacks the summary delimiter");
  } else {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < delim; ++i) {
      auto line = detail::trim(lines[i]);
      if (line.empty() || line == prompt::kRelatedHeader) continue;
      if (line.substr(0, 2) == "- " || line.substr(0, 2) == "* ") line = line.substr(2);
      const auto path = strip_item(line);
      if (path.empty() || path == "none" || path == "(none)") continue;
      if (path == file.path || !graph.has_file(path)) {
        if (diagnostics && path != file.path)
          diagnostics->push_back(file.path + ": dropped unknown related file '" + path + "'");
        continue;
      }
      if (seen.insert(path).second && out.related_files.size() < config.max_related)
        out.related_files.push_back(path);
    }
    std::vector<std::string> rest;
    for (std::size_t i = delim + 1; i < lines.size(); ++i) rest.emplace_back(lines[i]);
    summary = std::string(detail::trim(detail::join(rest, "\n")));
  }
  if (summary.empty()) summary = detail::extractive_summary(file.path, file.content);
  out.summary = cap_tokens(std::move(summary), config.summary_token_cap);
  return out;
}

}  // namespace

LlmRequest summary_request(const SourceFile& file, const ReferenceGraph& graph,
                           std::uint64_t context_tokens, const SummarizerConfig& config) {
  return request_with(file, graph, GraphIndex(graph), context_tokens, config);
}

FileSummary summarize_file(const SourceFile& file, const ReferenceGraph& graph, Gateway& gateway,
                           const SummarizerConfig& config, std::vector<std::string>* diagnostics) {
  return summarize_with(file, graph, GraphIndex(graph), gateway, config, diagnostics);
}

SummaryRun summarize_repo(const RepoModel& repo, const ReferenceGraph& graph, Gateway& gateway,
                          const SummarizerConfig& config) {
  const auto n = repo.files.size();
  SummaryRun run;
  run.summaries.resize(n);
  std::vector<std::vector<std::string>> diags(n);
  std::vector<char> failed(n, 0);
  const GraphIndex index(graph);
  detail::parallel_for(n, gateway.concurrency(), [&](std::size_t i) {
    const auto& file = repo.files[i];
    try {
      run.summaries[i] = summarize_with(file, graph, index, gateway, config, &diags[i]);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::UnknownFile || e.kind() == ErrorKind::Auth ||
          e.kind() == ErrorKind::Config)
        throw;
      failed[i] = 1;
      diags[i].push_back(file.path + ": summary request failed (" + std::string(to_string(e.kind())) +
                         "): " + e.what() + "; using extractive fallback");
      FileSummary fb;
      fb.path = file.path;
      fb.exported_symbols = exported_symbols(graph, file.path);
      fb.summary = cap_tokens(detail::extractive_summary(file.path, file.content), config.summary_token_cap);
      run.summaries[i] = std::move(fb);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    run.failures += failed[i];
    for (auto& d : diags[i]) run.diagnostics.push_back(std::move(d));
  }
  if (n > 0 && static_cast<double>(run.failures) > config.max_failure_share * static_cast<double>(n)) {
    std::string msg = std::to_string(run.failures) + " of " + std::to_string(n) +
                      " file summaries failed";
    for (const auto& d : run.diagnostics)
      if (d.find(": summary request failed") != std::string::npos) {
        msg += "; first: " + d;
        break;
      }
    throw Error(ErrorKind::TooManyFailures, msg);
  }
  return run;
}

TokenWeights summary_weights(const std::vector<FileSummary>& summaries) {
  TokenWeights w;
  for (const auto& s : summaries) w[s.path] = token_estimate(s.summary);
  return w;
}

std::string summaries_to_jsonl(const std::vector<FileSummary>& summaries) {
  std::string out;
  for (const auto& s : summaries) {
    json j = {{"version", 1},
              {"path", s.path},
              {"summary", s.summary},
              {"related_files", s.related_files},
              {"exported_symbols", s.exported_symbols}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<FileSummary> summaries_from_jsonl(std::string_view text) {
  constexpr std::string_view what = "summaries.jsonl";
  std::vector<FileSummary> out;
  for (auto line : detail::split_lines(text)) {
    if (detail::trim(line).empty()) continue;
    const auto j = detail::parse_json(line, what);
    if (detail::require<int>(j, "version", what) != 1)
      throw Error(ErrorKind::SchemaViolation, "summaries.jsonl: unsupported version");
    FileSummary s;
    s.path = detail::require<std::string>(j, "path", what);
    s.summary = detail::require<std::string>(j, "summary", what);
    s.related_files = detail::require<std::vector<std::string>>(j, "related_files", what);
    s.exported_symbols = detail::require<std::vector<std::string>>(j, "exported_symbols", what);
    if (s.related_files.size() > 8 ||
        std::find(s.related_files.begin(), s.related_files.end(), s.path) != s.related_files.end())
      throw Error(ErrorKind::SchemaViolation, "summaries.jsonl: bad related_files for " + s.path);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace archrecon
