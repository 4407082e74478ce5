#include <algorithm>
#include <map>
#include <set>

#include "archrecon/diagram.hpp"
#include "archrecon/gateway.hpp"
#include "archrecon/prompt.hpp"
#include "archrecon/repo_model.hpp"
#include "detail/extractive.hpp"
#include "detail/text.hpp"

namespace archrecon {

namespace {

using prompt::find_section;
using prompt::list_items;
using prompt::Section;

std::string top_module(std::string_view path) {
  const auto slash = path.find('/');
  return std::string(slash == std::string_view::npos ? path : path.substr(0, slash));
}

std::string summarize_file(const std::vector<Section>& sections) {
  const auto* file = find_section(sections, "FILE");
  if (!file) return "RELATED FILES:\n" + std::string(prompt::kSummaryDelimiter) + "\nEmpty request.\n";
  std::vector<std::string> symbols;
  if (const auto* s = find_section(sections, "SYMBOLS")) symbols = list_items(s->body);
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());

  std::string out(prompt::kRelatedHeader);
  out += '\n';
  if (const auto* c = find_section(sections, "CANDIDATES"))
    for (const auto& item : list_items(c->body)) out += "- " + item + "\n";
  out += prompt::kSummaryDelimiter;
  out += '\n';

  auto summary = detail::extractive_summary(file->arg, file->body);
  summary += " Exports: " + (symbols.empty() ? std::string("none") : detail::join(symbols, ", ")) + ".";
  return out + summary + "\n";
}

std::string first_sentence(std::string_view text) {
  const auto dot = text.find(". ");
  auto s = dot == std::string_view::npos ? text : text.substr(0, dot + 1);
  if (s.size() > 160) return std::string(s.substr(0, detail::utf8_floor(s, 157))) + "...";
  return std::string(s);
}

std::string gen_readme(const std::vector<Section>& sections) {
  std::string name = "repository";
  if (const auto* r = find_section(sections, "REPOSITORY"); r && !r->arg.empty()) name = r->arg;

  // module -> (file count, first summary)
  std::map<std::string, std::pair<std::size_t, std::string>> modules;
  std::size_t files = 0;
  if (const auto* s = find_section(sections, "SUMMARIES")) {
    for (const auto& item : list_items(s->body)) {
      const auto colon = item.find(": ");
      const auto path = item.substr(0, colon);
      auto& m = modules[path.find('/') == std::string::npos ? std::string("(root)") : top_module(path)];
      if (m.first++ == 0 && colon != std::string::npos) m.second = first_sentence(item.substr(colon + 2));
      ++files;
    }
  }
  std::string out = "# " + name + "\n\n## Architecture\n\n";
  std::vector<std::string> names;
  for (const auto& [m, info] : modules) names.push_back("`" + m + "`");
  out += name + " contains " + std::to_string(files) + " summarized files in " +
         std::to_string(modules.size()) + " top-level modules: " + detail::join(names, ", ") + ".\n";
  out += "\n## Key Modules\n\n";
  for (const auto& [m, info] : modules) {
    out += "- `" + m + "` (" + std::to_string(info.first) + (info.first == 1 ? " file" : " files") + ")";
    if (!info.second.empty()) out += ": " + info.second;
    out += '\n';
  }
  out += "\n## Primary Workflows\n\n";
  const auto* traces = find_section(sections, "TRACES");
  const auto trace_items = traces ? list_items(traces->body) : std::vector<std::string>{};
  if (trace_items.empty()) out += "- No traced workflows.\n";
  for (const auto& t : trace_items) out += "- " + t + "\n";
  out += "\n## Entry Points\n\n";
  const auto* entries = find_section(sections, "ENTRY POINTS");
  const auto entry_items = entries ? list_items(entries->body) : std::vector<std::string>{};
  if (entry_items.empty()) out += "- None detected.\n";
  for (const auto& e : entry_items) out += "- " + e + "\n";
  if (const auto* x = find_section(sections, "CROSS-REPOSITORY CONTEXT"))
    out += "\n## Cross-Repository Context\n\n" + x->body + "\n";
  return out;
}

struct FileLine {
  std::string path;
  std::size_t functions = 0;
  std::vector<std::string> symbols;
};

// "path (functions: N; symbols: a, b): summary"
FileLine parse_file_line(const std::string& item) {
  FileLine f;
  const auto paren = item.find(" (functions: ");
  if (paren == std::string::npos) {
    f.path = item.substr(0, item.find(": "));
    return f;
  }
  f.path = item.substr(0, paren);
  const auto close = item.find(')', paren);
  const auto meta = item.substr(paren + 13, close == std::string::npos ? std::string::npos : close - paren - 13);
  const auto semi = meta.find("; symbols: ");
  try {
    f.functions = std::stoul(meta.substr(0, semi));
  } catch (const std::exception&) {
    f.functions = 0;
  }
  if (semi != std::string::npos) {
    std::string_view rest(meta);
    rest.remove_prefix(semi + 11);
    while (!rest.empty()) {
      const auto comma = rest.find(", ");
      const auto sym = detail::trim(rest.substr(0, comma));
      if (!sym.empty()) f.symbols.emplace_back(sym);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 2);
    }
  }
  return f;
}

std::string gen_diagram(const std::vector<Section>& sections) {
  constexpr std::size_t kSubviewFunctions = 20;
  ArchDiagram d;
  d.add_layer("modules", "Modules");
  auto module_node = [&](const std::string& path) {
    const auto m = top_module(path);
    const auto id = normalize_id(m);
    if (!d.nodes.count(id)) d.add_node(id, m, "modules", NodeKind::Module);
    return id;
  };
  if (const auto* s = find_section(sections, "FILES")) {
    for (const auto& item : list_items(s->body)) {
      const auto f = parse_file_line(item);
      if (f.path.empty()) continue;
      const auto owner = module_node(f.path);
      if (f.functions <= kSubviewFunctions) continue;
      const auto id = normalize_id(f.path);
      d.add_node(id, f.path, "modules", NodeKind::Subview);
      ArchDiagram inner;
      inner.add_layer("functions", "Functions");
      for (const auto& sym : f.symbols) inner.add_node(normalize_id(sym), sym, "functions");
      d.subviews[id] = std::move(inner);
      if (owner != id) d.add_edge(owner, id, LinkKind::Dependency);
    }
  }
  if (const auto* s = find_section(sections, "DEPENDENCIES")) {
    for (const auto& item : list_items(s->body)) {
      const auto arrow = item.find(" -> ");
      if (arrow == std::string::npos) continue;
      const auto a = module_node(std::string(detail::trim(item.substr(0, arrow))));
      const auto b = module_node(std::string(detail::trim(item.substr(arrow + 4))));
      if (a != b) d.add_edge(a, b, LinkKind::Call);
    }
  }
  return to_mermaid(d);
}

std::string nominate_entries(const std::vector<Section>& sections) {
  static const std::set<std::string> stems = {"main", "app", "server", "cli", "index",
                                              "__main__", "manage", "run", "wsgi", "asgi"};
  std::string out;
  if (const auto* s = find_section(sections, "CANDIDATES")) {
    for (const auto& item : list_items(s->body)) {
      const auto path = item.substr(0, item.find(": "));
      auto base = path.substr(path.rfind('/') == std::string::npos ? 0 : path.rfind('/') + 1);
      base = base.substr(0, base.find('.'));
      if (stems.count(base)) out += path + ": conventional entry-point file name\n";
    }
  }
  return out.empty() ? "NONE\n" : out;
}

}  // namespace

std::string MockBackend::complete(const LlmRequest& req) {
  const auto tag = prompt::task_tag(req.system_prompt);
  if (!tag) throw Error(ErrorKind::UnknownTaskTag, "mock backend: system prompt has no task tag");
  const auto sections = prompt::parse_sections(req.user_content);
  if (*tag == prompt::kSummarizeFile) return summarize_file(sections);
  if (*tag == prompt::kGenReadme) return gen_readme(sections);
  if (*tag == prompt::kGenDiagram) return gen_diagram(sections);
  if (*tag == prompt::kNominateEntries) return nominate_entries(sections);
  throw Error(ErrorKind::UnknownTaskTag, "mock backend: unknown task tag '" + *tag + "'");
}

}  // namespace archrecon
