#include "archrecon/architect.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/prompt.hpp"
#include "detail/parallel.hpp"
#include "detail/text.hpp"

namespace archrecon {

namespace {

constexpr std::string_view kDiagramPrompt =
    "You are a software architect drawing part of a repository's architecture.\n"
    "The user message holds the repository README (<<<README>>>), summaries of\n"
    "one group of files as 'path (functions: N; symbols: ...): summary'\n"
    "(<<<FILES>>>) and the file dependencies inside the group as 'a -> b'\n"
    "(<<<DEPENDENCIES>>>). Draw the business-level modules these files\n"
    "implement, grouped into architectural layers, and how they interact.\n"
    "Reply with a Mermaid flowchart only:\n"
    "- start with 'flowchart TD';\n"
    "- one 'subgraph layer_id[\"Layer name\"]' block per layer;\n"
    "- nodes as 'id[\"Label\"]';\n"
    "- '-->' for calls, '-.->' for data flow, '==>' for dependencies, with\n"
    "  '|label|' where useful;\n"
    "- for a file with an important internal workflow, a nested subgraph\n"
    "  inside its layer holding that workflow.\n";

std::string one_line(std::string_view s) {
  std::string out(detail::trim(s));
  for (auto& c : out)
    if (c == '\n' || c == '\r') c = ' ';
  return out;
}

std::string file_line(const std::string& path, const FileSummary& summary, const ReferenceGraph* graph,
                      const ArchitectConfig& config) {
  std::size_t functions = 0;
  std::set<std::string> names;
  if (graph) {
    for (const auto* n : graph->symbols_in(path)) {
      if (n->granularity != Granularity::Function) continue;
      ++functions;
      names.insert(n->name);
    }
  }
  std::vector<std::string> symbols(names.begin(), names.end());
  if (symbols.size() > config.max_symbols_per_file) symbols.resize(config.max_symbols_per_file);
  std::string line = "- " + path + " (functions: " + std::to_string(functions);
  if (!symbols.empty()) line += "; symbols: " + detail::join(symbols, ", ");
  return line + "): " + one_line(summary.summary) + "\n";
}

std::string dependency_line(const std::string& src, const std::string& dst) { return "- " + src + " -> " + dst + "\n"; }

}  // namespace

TokenWeights partial_weights(const std::vector<FileSummary>& summaries, const ReferenceGraph* graph,
                             const ArchitectConfig& config) {
  TokenWeights out;
  for (const auto& s : summaries) out[s.path] = token_estimate(file_line(s.path, s, graph, config));
  if (graph)
    for (const auto& [src, dsts] : file_projection(*graph)) {
      const auto it = out.find(src);
      if (it == out.end()) continue;
      for (const auto& d : dsts) it->second += token_estimate(dependency_line(src, d));
    }
  return out;
}

LlmRequest partial_request(const Group& group, const std::vector<FileSummary>& summaries,
                           const ReadmeDoc& readme, const ReferenceGraph* graph,
                           std::uint64_t context_tokens, const ArchitectConfig& config,
                           std::string_view repair) {
  if (group.files.empty()) throw Error(ErrorKind::Precondition, "group " + std::to_string(group.index) + " is empty");
  std::map<std::string_view, const FileSummary*> by_path;
  for (const auto& s : summaries) by_path[s.path] = &s;

  std::string files;
  for (const auto& path : group.files) {
    const auto it = by_path.find(path);
    if (it == by_path.end())
      throw Error(ErrorKind::Precondition, "group " + std::to_string(group.index) + ": no summary for " + path);
    files += file_line(path, *it->second, graph, config);
  }

  std::string deps;
  if (graph) {
    const std::set<std::string_view> members(group.files.begin(), group.files.end());
    for (const auto& [src, dsts] : file_projection(*graph)) {
      if (!members.count(src)) continue;
      for (const auto& d : dsts)
        if (members.count(d)) deps += dependency_line(src, d);
    }
  }

  LlmRequest req;
  req.system_prompt = prompt::task_line(prompt::kGenDiagram) + "\n" + std::string(kDiagramPrompt);
  req.max_output_tokens = config.max_output_tokens;
  std::string rest = prompt::section("FILES", files) + prompt::section("DEPENDENCIES", deps);
  if (!repair.empty()) rest += prompt::section("REPAIR", repair);

  // The README is the only part that yields when the context is tight.
  const auto fixed = token_estimate(req.system_prompt) + token_estimate(rest) +
                     token_estimate(prompt::section("README", "")) + req.max_output_tokens + 64;
  const auto allowance = context_tokens > fixed ? context_tokens - fixed : 0;
  req.user_content = prompt::section("README", truncate_head_tail(readme.text, allowance)) + rest;
  return req;
}

PartialDiagram generate_partial(const Group& group, const std::vector<FileSummary>& summaries,
                                const ReadmeDoc& readme, Gateway& gateway, const ReferenceGraph* graph,
                                const ArchitectConfig& config, std::vector<std::string>* diagnostics) {
  const auto tag = "group " + std::to_string(group.index) + ": ";
  auto attempt = [&](std::string_view repair, std::string& error) -> std::optional<ArchDiagram> {
    const auto req = partial_request(group, summaries, readme, graph, gateway.context_tokens(), config, repair);
    const auto reply = gateway.complete(req).text;
    std::vector<std::string> notes;
    try {
      auto d = parse_mermaid(reply, &notes);
      if (d.nodes.empty()) {
        error = "the flowchart declares no nodes";
        return std::nullopt;
      }
      if (diagnostics)
        for (auto& n : notes) diagnostics->push_back(tag + n);
      return d;
    } catch (const Error& e) {
      error = e.what();
      return std::nullopt;
    }
  };

  std::string error;
  if (auto d = attempt({}, error)) return PartialDiagram{group.index, std::move(*d)};
  if (diagnostics) diagnostics->push_back(tag + "unusable diagram (" + error + "); retrying once");
  const auto repair = "Your previous reply could not be used: " + error +
                      "\nReply again with only a Mermaid flowchart that starts with 'flowchart TD'.\n";
  std::string second;
  if (auto d = attempt(repair, second)) return PartialDiagram{group.index, std::move(*d)};
  throw Error(ErrorKind::DiagramParseFailure, tag + "no usable diagram after repair: " + second);
}

std::vector<PartialDiagram> generate_partials(const GroupPlan& plan, const std::vector<FileSummary>& summaries,
                                              const ReadmeDoc& readme, Gateway& gateway,
                                              const ReferenceGraph* graph, const ArchitectConfig& config,
                                              std::vector<std::string>* diagnostics) {
  const auto n = plan.groups.size();
  std::vector<PartialDiagram> parts(n);
  std::vector<std::vector<std::string>> diags(n);
  detail::parallel_for(n, gateway.concurrency(), [&](std::size_t i) {
    parts[i] = generate_partial(plan.groups[i], summaries, readme, gateway, graph, config, &diags[i]);
  });
  if (diagnostics)
    for (auto& d : diags)
      for (auto& x : d) diagnostics->push_back(std::move(x));
  return parts;
}

}  // namespace archrecon
