#include <algorithm>
#include <map>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/prompt.hpp"
#include "archrecon/readme.hpp"
#include "detail/extractive.hpp"
#include "detail/json_util.hpp"
#include "detail/text.hpp"
#include "toml.hpp"

namespace archrecon {

using detail::json;

namespace {

std::string_view dir_of(std::string_view path) {
  const auto slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string_view{} : path.substr(0, slash);
}

std::string_view base_of(std::string_view path) {
  const auto slash = path.rfind('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

// Joins a manifest-relative path onto the manifest's directory, folding
// "." and ".." components.
std::string resolve(std::string_view manifest_dir, std::string_view rel) {
  std::vector<std::string> parts;
  auto push = [&](std::string_view s) {
    while (!s.empty()) {
      const auto slash = s.find('/');
      const auto part = s.substr(0, slash);
      if (part == "..") {
        if (!parts.empty()) parts.pop_back();
      } else if (!part.empty() && part != ".") {
        parts.emplace_back(part);
      }
      if (slash == std::string_view::npos) break;
      s.remove_prefix(slash + 1);
    }
  };
  push(manifest_dir);
  push(rel);
  return detail::join(parts, "/");
}

bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_script(Language lang) {
  return lang == Language::Python || lang == Language::JavaScript || lang == Language::TypeScript;
}

bool unindented_code(std::string_view line) {
  if (line.empty() || line.front() == ' ' || line.front() == '\t') return false;
  const auto t = detail::trim(line);
  return !(t.starts_with("#") || t.starts_with("//") || t.starts_with("/*") || t.starts_with("*"));
}

// Position of `token` in `line` where an identifier-initial token is not
// glued to a preceding identifier character.
bool contains_token(std::string_view line, std::string_view token) {
  std::size_t from = 0;
  while (true) {
    const auto at = line.find(token, from);
    if (at == std::string_view::npos) return false;
    if (!is_ident(token.front()) || at == 0 || !is_ident(line[at - 1])) return true;
    from = at + 1;
  }
}

class Detector {
public:
  Detector(const RepoModel& repo, const ReferenceGraph& graph, std::vector<std::string>* diags)
      : repo_(repo), graph_(graph), diags_(diags) {}

  void add(const std::string& file, EntryKind kind, std::string evidence) {
    auto it = found_.find(file);
    if (it == found_.end() || kind < it->second.kind)
      found_[file] = EntryPoint{file, kind, std::move(evidence)};
  }

  void note(std::string msg) {
    if (diags_) diags_->push_back(std::move(msg));
  }

  bool has(const std::string& file) const { return found_.count(file) > 0; }

  std::vector<EntryPoint> result() const {
    std::vector<EntryPoint> out;
    for (const auto& [file, e] : found_) out.push_back(e);
    std::stable_sort(out.begin(), out.end(), [](const EntryPoint& a, const EntryPoint& b) {
      return a.kind != b.kind ? a.kind < b.kind : a.file < b.file;
    });
    return out;
  }

  void scan_sources() {
    for (const auto& f : repo_.files) {
      main_construct(f);
      if (!is_script(f.language)) continue;
      const auto lines = detail::split_lines(f.content);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (i == 0 && line.starts_with("#!")) {
          add(f.path, EntryKind::CliBinary, "executable script (`" + std::string(detail::trim(line)) + "`)");
          continue;
        }
        if (!unindented_code(line)) continue;
        const auto t = detail::trim(line);
        if (t.starts_with("def ") || t.starts_with("async def ") || t.starts_with("class ") ||
            t.starts_with("function ") || t.starts_with("export ") || t.starts_with("import ") ||
            t.starts_with("from "))
          continue;
        for (std::string_view tok : {".listen(", "serve_forever(", "uvicorn.run(", "app.run(",
                                     "run_app(", "serve(", "createServer("}) {
          if (contains_token(t, tok)) {
            add(f.path, EntryKind::ServerBootstrap,
                "top-level `" + std::string(tok.substr(tok.front() == '.' ? 1 : 0)) +
                    "...)` call on line " + std::to_string(i + 1));
            break;
          }
        }
        for (std::string_view tok : {"ArgumentParser(", "process.argv", "@click.command",
                                     "@click.group", "typer.Typer(", "fire.Fire(", "sys.argv"}) {
          if (contains_token(t, tok)) {
            add(f.path, EntryKind::CliBinary,
                "top-level argument handling (`" + std::string(tok) + "`) on line " + std::to_string(i + 1));
            break;
          }
        }
      }
    }
  }

  void scan_manifests() {
    for (const auto& m : repo_.manifests) {
      const auto name = base_of(m.path);
      try {
        if (name == "package.json") package_json(m);
        else if (name == "Cargo.toml") cargo_toml(m);
        else if (name == "pyproject.toml") pyproject_toml(m);
        else if (name == "setup.cfg" || name == "setup.py") python_setup(m);
        else if (name == "CMakeLists.txt") cmake_lists(m);
      } catch (const Error& e) {
        note(m.path + ": manifest not understood: " + e.what());
      }
    }
  }

private:
  const RefNode* node(const std::string& id) const { return graph_.node(id); }

  void main_construct(const SourceFile& f) {
    const auto main_fn = node(f.path + "::main");
    const bool has_main = main_fn && main_fn->granularity == Granularity::Function;
    switch (f.language) {
      case Language::Python: {
        if (base_of(f.path) == "__main__.py") {
          add(f.path, EntryKind::MainFunction, "package `__main__` module");
          return;
        }
        for (const auto line : detail::split_lines(f.content)) {
          if (!unindented_code(line)) continue;
          const auto t = detail::trim(line);
          if (t.starts_with("if __name__") && t.find("__main__") != std::string_view::npos) {
            add(f.path, EntryKind::MainFunction, "`if __name__ == \"__main__\"` guard");
            return;
          }
        }
        return;
      }
      case Language::Go: {
        bool package_main = false;
        for (const auto line : detail::split_lines(f.content)) {
          const auto t = detail::trim(line);
          if (t == "package main" || t.starts_with("package main ") || t.starts_with("package main/")) {
            package_main = true;
            break;
          }
        }
        if (package_main && has_main) add(f.path, EntryKind::MainFunction, "`func main` in package main");
        return;
      }
      case Language::Java: {
        if (f.content.find("static void main(") == std::string::npos &&
            f.content.find("static void main (") == std::string::npos)
          return;
        for (const auto* n : graph_.symbols_in(f.path)) {
          if (n->granularity != Granularity::Function || n->name != "main") continue;
          const auto local = std::string_view(n->id).substr(f.path.size() + 2);
          const auto cls = local.substr(0, local.rfind("::"));
          add(f.path, EntryKind::MainFunction, "class `" + std::string(cls) + "` declares `static void main`");
          return;
        }
        return;
      }
      case Language::C:
      case Language::Cpp:
        if (has_main) add(f.path, EntryKind::MainFunction, "defines `main()`");
        return;
      case Language::Rust:
        if (has_main) add(f.path, EntryKind::MainFunction, "defines `fn main`");
        return;
      default:
        return;
    }
  }

  void declared(const ManifestFile& m, const std::string& rel, const std::string& what) {
    const auto path = resolve(dir_of(m.path), rel);
    if (repo_.contains(path)) {
      add(path, EntryKind::ManifestDeclared, "declared as " + what + " in " + std::string(base_of(m.path)));
      return;
    }
    for (const auto* ext : {".js", ".ts", ".mjs", ".cjs", "/index.js", "/index.ts"}) {
      if (repo_.contains(path + ext)) {
        add(path + ext, EntryKind::ManifestDeclared,
            "declared as " + what + " in " + std::string(base_of(m.path)));
        return;
      }
    }
    note(m.path + ": " + what + " names '" + rel + "', which is not a scanned source file");
  }

  void package_json(const ManifestFile& m) {
    const auto j = detail::parse_json(m.content, m.path);
    if (!j.is_object()) return;
    if (j.contains("bin")) {
      const auto& bin = j["bin"];
      if (bin.is_string()) {
        declared(m, bin.get<std::string>(), "`bin`");
      } else if (bin.is_object()) {
        for (const auto& [k, v] : bin.items())
          if (v.is_string()) declared(m, v.get<std::string>(), "`bin." + k + "`");
      }
    }
    if (j.contains("main") && j["main"].is_string()) declared(m, j["main"].get<std::string>(), "`main`");
  }

  static toml::table parse_toml(const ManifestFile& m) {
    try {
      return toml::parse(m.content);
    } catch (const toml::parse_error& e) {
      throw Error(ErrorKind::Config, std::string(e.description()));
    }
  }

  void cargo_toml(const ManifestFile& m) {
    const auto tbl = parse_toml(m);
    bool explicit_bins = false;
    if (const auto* bins = tbl["bin"].as_array()) {
      for (const auto& b : *bins) {
        const auto* t = b.as_table();
        if (!t) continue;
        explicit_bins = true;
        const auto name = (*t)["name"].value_or(std::string{});
        if (auto p = (*t)["path"].value<std::string>())
          declared(m, *p, "`[[bin]] " + name + "`");
        else if (!name.empty())
          declared(m, "src/bin/" + name + ".rs", "`[[bin]] " + name + "`");
      }
    }
    if (!explicit_bins && tbl["package"].as_table()) {
      const auto main_rs = resolve(dir_of(m.path), "src/main.rs");
      if (repo_.contains(main_rs))
        add(main_rs, EntryKind::ManifestDeclared, "default binary target of the Cargo package");
    }
  }

  // "pkg.mod:func" -> the module's source file, if scanned.
  void python_target(const ManifestFile& m, std::string_view target, const std::string& what) {
    auto module = std::string(detail::trim(target.substr(0, target.find(':'))));
    std::replace(module.begin(), module.end(), '.', '/');
    for (const auto* prefix : {"", "src/"}) {
      for (const auto* suffix : {".py", "/__init__.py", "/__main__.py"}) {
        const auto path = resolve(dir_of(m.path), std::string(prefix) + module + suffix);
        if (repo_.contains(path)) {
          add(path, EntryKind::ManifestDeclared, "declared as " + what + " in " + std::string(base_of(m.path)));
          return;
        }
      }
    }
    note(m.path + ": " + what + " names module '" + std::string(target) + "', which is not a scanned source file");
  }

  void pyproject_toml(const ManifestFile& m) {
    const auto tbl = parse_toml(m);
    for (const auto* key : {"project.scripts", "project.gui-scripts", "tool.poetry.scripts"}) {
      const auto* scripts = tbl.at_path(key).as_table();
      if (!scripts) continue;
      for (const auto& [name, v] : *scripts) {
        if (auto s = v.value<std::string>())
          python_target(m, *s, "script `" + std::string(name.str()) + "`");
      }
    }
  }

  // console_scripts lines of setup.cfg / setup.py: "name = pkg.mod:func".
  void python_setup(const ManifestFile& m) {
    const bool cfg = m.path.ends_with(".cfg");
    bool in_scripts = !cfg;
    for (auto line : detail::split_lines(m.content)) {
      auto t = detail::trim(line);
      if (cfg) {
        if (t.starts_with("console_scripts")) {
          in_scripts = true;
          continue;
        }
        if (in_scripts && (t.starts_with("[") || (!line.empty() && line.front() != ' ' && line.front() != '\t')))
          in_scripts = false;
      }
      if (!in_scripts) continue;
      while (!t.empty() && (t.front() == '"' || t.front() == '\'' || t.front() == '[')) t.remove_prefix(1);
      const auto eq = t.find('=');
      const auto colon = t.find(':');
      if (eq == std::string_view::npos || colon == std::string_view::npos || colon < eq) continue;
      const auto name = detail::trim(t.substr(0, eq));
      auto target = detail::trim(t.substr(eq + 1));
      const auto end = target.find_first_of("\"' ,]");
      target = target.substr(0, end);
      if (name.empty() || name.find_first_of(" (") != std::string_view::npos || target.find(':') == std::string_view::npos)
        continue;
      python_target(m, target, "console script `" + std::string(name) + "`");
    }
  }

  void cmake_lists(const ManifestFile& m) {
    std::string_view text = m.content;
    std::size_t from = 0;
    while ((from = text.find("add_executable(", from)) != std::string_view::npos) {
      if (from > 0 && is_ident(text[from - 1])) {
        ++from;
        continue;
      }
      const auto open = from + 15;
      const auto close = text.find(')', open);
      if (close == std::string_view::npos) break;
      std::vector<std::string> args;
      std::string cur;
      for (const char c : text.substr(open, close - open)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
          if (!cur.empty()) args.push_back(std::move(cur)), cur.clear();
        } else {
          cur += c;
        }
      }
      if (!cur.empty()) args.push_back(cur);
      from = close;
      if (args.size() < 2) continue;
      for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i].find("${") != std::string::npos || args[i] == "WIN32" || args[i] == "MACOSX_BUNDLE" ||
            args[i] == "EXCLUDE_FROM_ALL")
          continue;
        const auto path = resolve(dir_of(m.path), args[i]);
        if (repo_.contains(path)) {
          add(path, EntryKind::ManifestDeclared, "`add_executable(" + args[0] + ")` in CMakeLists.txt");
          break;
        }
      }
    }
  }

  const RepoModel& repo_;
  const ReferenceGraph& graph_;
  std::vector<std::string>* diags_;
  std::map<std::string, EntryPoint> found_;
};

constexpr std::string_view kNominatePrompt =
    "You are locating the entry points of a software repository: files where\n"
    "execution starts (programs, services, command-line tools, jobs).\n"
    "The user message lists candidate files as 'path: summary'. Reply with one\n"
    "line per entry-point file, formatted 'path: reason'. Reply NONE if there\n"
    "are none. Use only paths from the list.\n";

void nominate(const RepoModel& repo, Gateway& gateway, const std::vector<FileSummary>* summaries,
              Detector& det) {
  std::map<std::string, std::string, std::less<>> by_path;
  if (summaries)
    for (const auto& s : *summaries) by_path[s.path] = s.summary;

  LlmRequest req;
  req.system_prompt = prompt::task_line(prompt::kNominateEntries) + "\n" + std::string(kNominatePrompt);
  req.max_output_tokens = 1024;
  const auto limit = gateway.context_tokens();
  const auto fixed = token_estimate(req.system_prompt) + req.max_output_tokens + 64;
  std::string body;
  std::size_t listed = 0;
  std::size_t candidates = 0;
  for (const auto& f : repo.files) {
    if (det.has(f.path)) continue;
    ++candidates;
    const auto it = by_path.find(f.path);
    auto summary = it != by_path.end() ? it->second : detail::extractive_summary(f.path, f.content);
    std::replace(summary.begin(), summary.end(), '\n', ' ');
    auto line = "- " + f.path + ": " + summary + "\n";
    if (fixed + token_estimate(body) + token_estimate(line) + 8 > limit) break;
    body += line;
    ++listed;
  }
  if (candidates == 0) return;
  if (listed < candidates)
    det.note("entry nomination listed " + std::to_string(listed) + " of " + std::to_string(candidates) +
             " candidate files (context limit)");
  req.user_content = prompt::section("CANDIDATES", body);

  std::string reply;
  try {
    reply = gateway.complete(req).text;
  } catch (const Error& e) {
    det.note(std::string("entry nomination failed: ") + e.what());
    return;
  }
  for (auto line : detail::split_lines(reply)) {
    auto t = detail::trim(line);
    if (t.empty() || t == "NONE") continue;
    if (t.starts_with("- ") || t.starts_with("* ")) t.remove_prefix(2);
    const auto colon = t.find(": ");
    auto path = std::string(detail::trim(t.substr(0, colon)));
    path.erase(std::remove(path.begin(), path.end(), '`'), path.end());
    const auto reason = colon == std::string_view::npos ? std::string("nominated by the backend")
                                                        : std::string(detail::trim(t.substr(colon + 2)));
    if (!repo.contains(path)) {
      det.note("entry nomination named '" + path + "', which is not a repository file");
      continue;
    }
    if (!det.has(path)) det.add(path, EntryKind::LlmNominated, "backend: " + reason);
  }
}

}  // namespace

std::string_view to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::ManifestDeclared: return "ManifestDeclared";
    case EntryKind::MainFunction: return "MainFunction";
    case EntryKind::ServerBootstrap: return "ServerBootstrap";
    case EntryKind::CliBinary: return "CliBinary";
    case EntryKind::LlmNominated: return "LlmNominated";
  }
  return "?";
}

std::optional<EntryKind> entry_kind_from_string(std::string_view name) {
  for (auto k : {EntryKind::ManifestDeclared, EntryKind::MainFunction, EntryKind::ServerBootstrap,
                 EntryKind::CliBinary, EntryKind::LlmNominated})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<EntryPoint> find_entry_points(const RepoModel& repo, const ReferenceGraph& graph,
                                          Gateway* gateway, const std::vector<FileSummary>* summaries,
                                          std::vector<std::string>* diagnostics) {
  Detector det(repo, graph, diagnostics);
  det.scan_manifests();
  det.scan_sources();
  if (gateway) nominate(repo, *gateway, summaries, det);
  auto out = det.result();
  if (out.empty()) det.note("no entry points detected; the repository looks like a library");
  return out;
}

namespace {

struct Candidate {
  std::vector<std::string> nodes;
  std::size_t files = 0;
  std::size_t calls = 0;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.files != b.files) return a.files > b.files;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  if (a.calls != b.calls) return a.calls > b.calls;
  return a.nodes < b.nodes;
}

struct Step {
  const std::string* dst;
  bool call;
};

class PathSearch {
public:
  PathSearch(const ReferenceGraph& graph, unsigned max_depth) : graph_(graph), max_depth_(max_depth) {
    for (const auto& e : graph.edges) {
      if (e.kind == EdgeKind::Inheritance) continue;
      auto& steps = out_[e.src];
      auto it = std::find_if(steps.begin(), steps.end(), [&](const Step& s) { return *s.dst == e.dst; });
      if (it == steps.end()) steps.push_back({&e.dst, e.kind == EdgeKind::Call});
      else it->call = it->call || e.kind == EdgeKind::Call;
    }
    for (auto& [src, steps] : out_)
      std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) {
        return a.call != b.call ? a.call : *a.dst < *b.dst;
      });
  }

  Candidate run(const std::vector<std::string>& starts) {
    for (const auto& s : starts) {
      cur_.nodes = {s};
      cur_.calls = 0;
      cur_.files = 0;
      file_count_.clear();
      on_path_.clear();
      enter(s);
      consider();
      dfs(s, 0);
    }
    return best_;
  }

private:
  static constexpr std::size_t kExpansionBudget = 200000;

  void enter(const std::string& id) {
    on_path_.insert(id);
    if (file_count_[graph_.node(id)->file]++ == 0) ++cur_.files;
  }
  void leave(const std::string& id) {
    on_path_.erase(id);
    if (--file_count_[graph_.node(id)->file] == 0) --cur_.files;
  }

  void consider() {
    if (!have_best_ || better(cur_, best_)) {
      best_ = cur_;
      have_best_ = true;
    }
  }

  void dfs(const std::string& at, unsigned depth) {
    if (depth >= max_depth_) return;
    const auto it = out_.find(at);
    if (it == out_.end()) return;
    for (const auto& step : it->second) {
      if (++expansions_ > kExpansionBudget) return;
      const auto& next = *step.dst;
      if (on_path_.count(next) || !graph_.node(next)) continue;
      cur_.nodes.push_back(next);
      cur_.calls += step.call;
      enter(next);
      consider();
      dfs(next, depth + 1);
      leave(next);
      cur_.calls -= step.call;
      cur_.nodes.pop_back();
    }
  }

  const ReferenceGraph& graph_;
  unsigned max_depth_;
  std::map<std::string, std::vector<Step>, std::less<>> out_;
  Candidate cur_;
  Candidate best_;
  bool have_best_ = false;
  std::size_t expansions_ = 0;
  std::map<std::string, std::size_t> file_count_;
  std::set<std::string> on_path_;
};

}  // namespace

Trace trace_downstream(const EntryPoint& entry, const ReferenceGraph& graph, unsigned max_depth) {
  if (!graph.has_file(entry.file))
    throw Error(ErrorKind::UnknownFile, "reference graph has no file " + entry.file);
  if (max_depth == 0) throw Error(ErrorKind::Precondition, "trace depth must be positive");
  std::vector<std::string> starts{entry.file};
  for (const auto* n : graph.symbols_in(entry.file)) starts.push_back(n->id);
  std::sort(starts.begin(), starts.end());
  PathSearch search(graph, max_depth);
  return Trace{entry, search.run(starts).nodes};
}

bool trace_is_valid(const Trace& trace, const ReferenceGraph& graph) {
  if (trace.path_nodes.empty()) return false;
  const auto* first = graph.node(trace.path_nodes.front());
  if (!first || first->file != trace.entry.file) return false;
  for (std::size_t i = 0; i + 1 < trace.path_nodes.size(); ++i) {
    const auto& a = trace.path_nodes[i];
    const auto& b = trace.path_nodes[i + 1];
    bool linked = false;
    for (auto k : {EdgeKind::Import, EdgeKind::Call, EdgeKind::Inheritance})
      linked = linked || graph.edges.count(RefEdge{a, b, k}) > 0;
    if (!linked) return false;
  }
  return true;
}

}  // namespace archrecon
