#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/prompt.hpp"
#include "archrecon/readme.hpp"
#include "detail/json_util.hpp"
#include "detail/text.hpp"

namespace archrecon {

using detail::json;

namespace {

constexpr std::string_view kReadmePrompt =
    "You are writing the README of a software repository for developers who\n"
    "have never seen it. The user message gives the entry points, one traced\n"
    "execution path per entry point, per-file summaries and, optionally,\n"
    "context from neighbouring repositories (API usage, QPS, their docs).\n"
    "Write Markdown with exactly these level-2 sections, in order:\n"
    "## Architecture, ## Key Modules, ## Primary Workflows, ## Entry Points.\n"
    "Primary Workflows walks through the traced execution paths. Entry Points\n"
    "lists every entry point exactly once, as a bullet starting with its path\n"
    "in backticks, and names no other entry point's path. Add\n"
    "## Cross-Repository Context only when such context is given.\n";

constexpr std::size_t kDocExcerptBytes = 2000;

std::string one_line(std::string_view s) {
  std::string out(detail::trim(s));
  for (auto& c : out)
    if (c == '\n' || c == '\r') c = ' ';
  return out;
}

std::string cell(std::string_view s) {
  std::string out;
  for (const char c : one_line(s)) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

bool path_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '/' || c == '.';
}

// Occurrences of `path` not embedded in a longer path. A trailing '.' only
// continues the path when another path character follows it.
std::size_t count_path(std::string_view text, std::string_view path) {
  std::size_t n = 0;
  for (auto at = text.find(path); at != std::string_view::npos; at = text.find(path, at + 1)) {
    if (at > 0 && path_char(text[at - 1])) continue;
    const auto end = at + path.size();
    if (end < text.size()) {
      const char next = text[end];
      if (next == '.') {
        if (end + 1 < text.size() && path_char(text[end + 1]) && text[end + 1] != '.') continue;
      } else if (path_char(next)) {
        continue;
      }
    }
    ++n;
  }
  return n;
}

struct Heading {
  std::size_t line;
  int level;
  std::string title;
};

std::vector<Heading> headings(const std::vector<std::string_view>& lines) {
  std::vector<Heading> out;
  bool fenced = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = detail::trim(lines[i]);
    if (t.starts_with("```")) fenced = !fenced;
    if (fenced || !t.starts_with("#")) continue;
    int level = 0;
    while (level < static_cast<int>(t.size()) && t[level] == '#') ++level;
    if (level > 6 || (level < static_cast<int>(t.size()) && t[level] != ' ')) continue;
    auto title = detail::trim(t.substr(level));
    while (!title.empty() && (title.back() == '#' || title.back() == ':')) title.remove_suffix(1);
    out.push_back({i, level, std::string(detail::trim(title))});
  }
  return out;
}

std::string entry_line(const EntryPoint& e) {
  return "`" + e.file + "` (" + std::string(to_string(e.kind)) + "): " + one_line(e.evidence);
}

std::string trace_line(const Trace& t) {
  std::vector<std::string> hops;
  for (const auto& n : t.path_nodes) hops.push_back("`" + n + "`");
  return detail::join(hops, " -> ");
}

}  // namespace

std::string render_signals(const CrossRepoSignals& signals) {
  if (signals.empty()) return {};
  std::string out;
  std::vector<std::string> names;
  for (const auto& r : signals.repos) names.push_back("`" + r.name + "`");
  out += "Related repositories: " + detail::join(names, ", ") + ".\n";

  struct Row {
    const RepoSignals* repo;
    const ApiUsage* api;
  };
  std::vector<Row> rows;
  for (const auto& r : signals.repos)
    for (const auto& a : r.apis) rows.push_back({&r, &a});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    if (x.api->qps != y.api->qps) return x.api->qps > y.api->qps;
    return std::tie(x.repo->name, x.api->endpoint, x.api->method) <
           std::tie(y.repo->name, y.api->endpoint, y.api->method);
  });
  if (!rows.empty()) {
    out += "\n### API Usage\n\n| Repository | Method | Endpoint | Callers | QPS |\n"
           "| --- | --- | --- | --- | --- |\n";
    for (const auto& row : rows) {
      out += "| " + cell(row.repo->name) + " | " + cell(row.api->method) + " | " + cell(row.api->endpoint) +
             " | " + cell(detail::join(row.api->callers, ", ")) + " | " +
             detail::format_decimal(row.api->qps) + " |\n";
    }
  }
  bool docs_header = false;
  for (const auto& r : signals.repos) {
    if (!r.doc_text || detail::trim(*r.doc_text).empty()) continue;
    if (!docs_header) out += "\n### Repository Documentation\n";
    docs_header = true;
    const auto doc = detail::trim(*r.doc_text);
    const auto cut = detail::utf8_floor(doc, kDocExcerptBytes);
    out += "\n#### " + r.name + "\n\n" + std::string(doc.substr(0, cut)) + (cut < doc.size() ? " ..." : "") + "\n";
  }
  return out;
}

std::vector<std::string> readme_problems(std::string_view text, const std::vector<EntryPoint>& entries) {
  std::vector<std::string> problems;
  const auto lines = detail::split_lines(text);
  const auto hs = headings(lines);
  const Heading* entry_heading = nullptr;
  for (const auto required : kReadmeSections) {
    const auto it = std::find_if(hs.begin(), hs.end(), [&](const Heading& h) { return detail::iequals(h.title, required); });
    if (it == hs.end()) problems.push_back("missing section '" + std::string(required) + "'");
    else if (required == "Entry Points") entry_heading = &*it;
  }
  if (!entry_heading) return problems;
  std::size_t end = lines.size();
  for (const auto& h : hs)
    if (h.line > entry_heading->line && h.level <= entry_heading->level) {
      end = h.line;
      break;
    }
  std::string body;
  for (std::size_t i = entry_heading->line + 1; i < end; ++i) {
    body += lines[i];
    body += '\n';
  }
  for (const auto& e : entries) {
    const auto n = count_path(body, e.file);
    if (n == 0) problems.push_back("entry point `" + e.file + "` is missing from Entry Points");
    else if (n > 1)
      problems.push_back("entry point `" + e.file + "` appears " + std::to_string(n) +
                         " times in Entry Points; list it exactly once");
  }
  return problems;
}

ReadmeDoc generate_readme(const std::vector<FileSummary>& summaries, const std::vector<Trace>& traces,
                          const CrossRepoSignals* signals, Gateway& gateway, const ReadmeOptions& options,
                          std::vector<std::string>* diagnostics) {
  if (summaries.empty()) throw Error(ErrorKind::Precondition, "README generation needs file summaries");

  std::vector<EntryPoint> entries;
  std::string entry_body;
  std::string trace_body;
  for (const auto& t : traces) {
    entries.push_back(t.entry);
    entry_body += "- " + entry_line(t.entry) + "\n";
    trace_body += "- `" + t.entry.file + "`: " + trace_line(t) + "\n";
  }
  const auto cross = signals ? render_signals(*signals) : std::string();

  // Eviction order: lowest fan-in first, later files before earlier ones.
  std::map<std::string, std::size_t> fan_in;
  if (options.graph)
    for (const auto& [src, dsts] : file_projection(*options.graph))
      for (const auto& d : dsts) ++fan_in[d];
  std::vector<std::size_t> order(summaries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto fa = fan_in[summaries[a].path];
    const auto fb = fan_in[summaries[b].path];
    return fa != fb ? fa < fb : a > b;
  });
  std::vector<char> kept(summaries.size(), 1);

  LlmRequest req;
  req.system_prompt = prompt::task_line(prompt::kGenReadme) + "\n" + std::string(kReadmePrompt);
  req.max_output_tokens = options.max_output_tokens;

  auto build = [&](std::string_view repair) {
    std::string summary_body;
    for (std::size_t i = 0; i < summaries.size(); ++i)
      if (kept[i]) summary_body += "- " + summaries[i].path + ": " + one_line(summaries[i].summary) + "\n";
    std::string user = prompt::section("REPOSITORY", options.repo_name, options.repo_name) +
                       prompt::section("ENTRY POINTS", entry_body) + prompt::section("TRACES", trace_body) +
                       prompt::section("SUMMARIES", summary_body);
    if (!cross.empty()) user += prompt::section("CROSS-REPOSITORY CONTEXT", cross);
    if (!repair.empty()) user += prompt::section("REPAIR", repair);
    return user;
  };

  const auto limit = gateway.context_tokens();
  const auto fits = [&](const std::string& user) {
    return token_estimate(req.system_prompt) + token_estimate(user) + req.max_output_tokens + 64 <= limit;
  };
  req.user_content = build({});
  std::size_t evicted = 0;
  for (std::size_t k = 0; k < order.size() && !fits(req.user_content); ++k) {
    kept[order[k]] = 0;
    ++evicted;
    req.user_content = build({});
  }
  if (evicted && diagnostics)
    diagnostics->push_back("README context: evicted " + std::to_string(evicted) + " of " +
                           std::to_string(summaries.size()) + " file summaries (lowest fan-in first)");

  auto text = gateway.complete(req).text;
  auto problems = readme_problems(text, entries);
  if (!problems.empty()) {
    if (diagnostics)
      diagnostics->push_back("README failed validation (" + detail::join(problems, "; ") + "); retrying once");
    std::string repair = "The previous README was rejected:\n";
    for (const auto& p : problems) repair += "- " + p + "\n";
    repair += "Write the whole README again and fix these problems.\n";
    req.user_content = build(repair);
    text = gateway.complete(req).text;
    problems = readme_problems(text, entries);
    if (!problems.empty())
      throw Error(ErrorKind::SectionValidationFailure,
                  "README still invalid after repair: " + detail::join(problems, "; "));
  }

  return readme_from_text(std::move(text));
}

ReadmeDoc readme_from_text(std::string text) {
  ReadmeDoc doc;
  if (!text.empty() && text.back() != '\n') text += '\n';
  doc.text = std::move(text);
  for (const auto& h : headings(detail::split_lines(doc.text))) doc.sections.push_back(h.title);
  return doc;
}

CrossRepoSignals signals_from_json(std::string_view text) {
  constexpr std::string_view what = "signals";
  const auto j = detail::parse_json(text, what);
  if (detail::require<int>(j, "version", what) != 1)
    throw Error(ErrorKind::SchemaViolation, "signals: unsupported version");
  CrossRepoSignals out;
  if (!j.contains("repos")) return out;
  if (!j["repos"].is_array()) throw Error(ErrorKind::SchemaViolation, "signals: 'repos' must be an array");
  std::set<std::string> names;
  for (const auto& r : j["repos"]) {
    RepoSignals repo;
    repo.name = detail::require<std::string>(r, "name", what);
    if (repo.name.empty() || !names.insert(repo.name).second)
      throw Error(ErrorKind::SchemaViolation, "signals: repository names must be non-empty and unique ('" +
                                                  repo.name + "')");
    if (r.contains("doc_text") && !r["doc_text"].is_null())
      repo.doc_text = detail::require<std::string>(r, "doc_text", what);
    if (r.contains("apis")) {
      if (!r["apis"].is_array()) throw Error(ErrorKind::SchemaViolation, "signals: 'apis' must be an array");
      for (const auto& a : r["apis"]) {
        ApiUsage api;
        api.endpoint = detail::require<std::string>(a, "endpoint", what);
        if (a.contains("method")) api.method = detail::require<std::string>(a, "method", what);
        if (a.contains("callers")) api.callers = detail::require<std::vector<std::string>>(a, "callers", what);
        if (a.contains("qps")) api.qps = detail::require<double>(a, "qps", what);
        if (!std::isfinite(api.qps) || api.qps < 0)
          throw Error(ErrorKind::SchemaViolation, "signals: qps must be a non-negative number");
        repo.apis.push_back(std::move(api));
      }
    }
    out.repos.push_back(std::move(repo));
  }
  return out;
}

std::string signals_to_json(const CrossRepoSignals& signals) {
  json repos = json::array();
  for (const auto& r : signals.repos) {
    json apis = json::array();
    for (const auto& a : r.apis)
      apis.push_back({{"endpoint", a.endpoint}, {"method", a.method}, {"callers", a.callers}, {"qps", a.qps}});
    json o = {{"name", r.name}, {"apis", apis}};
    if (r.doc_text) o["doc_text"] = *r.doc_text;
    repos.push_back(std::move(o));
  }
  return json{{"version", 1}, {"repos", repos}}.dump(2) + "\n";
}

namespace {

json entry_json(const EntryPoint& e) {
  return {{"file", e.file}, {"kind", std::string(to_string(e.kind))}, {"evidence", e.evidence}};
}

EntryPoint entry_from(const json& j, std::string_view what) {
  EntryPoint e;
  e.file = detail::require<std::string>(j, "file", what);
  const auto kind = entry_kind_from_string(detail::require<std::string>(j, "kind", what));
  if (!kind) throw Error(ErrorKind::SchemaViolation, std::string(what) + ": unknown entry kind");
  e.kind = *kind;
  e.evidence = detail::require<std::string>(j, "evidence", what);
  return e;
}

void check_version(const json& j, std::string_view what) {
  if (detail::require<int>(j, "version", what) != 1)
    throw Error(ErrorKind::SchemaViolation, std::string(what) + ": unsupported version");
}

}  // namespace

std::string entries_to_json(const std::vector<EntryPoint>& entries) {
  json arr = json::array();
  for (const auto& e : entries) arr.push_back(entry_json(e));
  return json{{"version", 1}, {"entries", arr}}.dump(2) + "\n";
}

std::vector<EntryPoint> entries_from_json(std::string_view text) {
  constexpr std::string_view what = "entries";
  const auto j = detail::parse_json(text, what);
  check_version(j, what);
  std::vector<EntryPoint> out;
  for (const auto& e : detail::require<json>(j, "entries", what)) out.push_back(entry_from(e, what));
  return out;
}

std::string traces_to_json(const std::vector<Trace>& traces) {
  json arr = json::array();
  for (const auto& t : traces) arr.push_back({{"entry", entry_json(t.entry)}, {"path_nodes", t.path_nodes}});
  return json{{"version", 1}, {"traces", arr}}.dump(2) + "\n";
}

std::vector<Trace> traces_from_json(std::string_view text) {
  constexpr std::string_view what = "traces";
  const auto j = detail::parse_json(text, what);
  check_version(j, what);
  std::vector<Trace> out;
  for (const auto& t : detail::require<json>(j, "traces", what)) {
    Trace tr;
    tr.entry = entry_from(detail::require<json>(t, "entry", what), what);
    tr.path_nodes = detail::require<std::vector<std::string>>(t, "path_nodes", what);
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace archrecon
