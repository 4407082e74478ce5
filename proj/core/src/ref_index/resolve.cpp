#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "detail/text.hpp"
#include "facts.hpp"

namespace archrecon::refs {

namespace {

enum class Family { Python, Java, Go, CFamily, Ecma, Rust, None };

Family family_of(Language l) {
  switch (l) {
    case Language::Python: return Family::Python;
    case Language::Java: return Family::Java;
    case Language::Go: return Family::Go;
    case Language::C:
    case Language::Cpp: return Family::CFamily;
    case Language::JavaScript:
    case Language::TypeScript: return Family::Ecma;
    case Language::Rust: return Family::Rust;
    default: return Family::None;
  }
}

std::string dir_of(std::string_view path) {
  const auto slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

std::string file_name(std::string_view path) {
  const auto slash = path.rfind('/');
  return std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
}

std::string join_path(const std::string& dir, std::string_view rest) {
  if (dir.empty()) return std::string(rest);
  if (rest.empty()) return dir;
  return dir + "/" + std::string(rest);
}

// Resolves "." and ".." segments; returns nullopt when escaping the root.
std::optional<std::string> normalize(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    auto seg = path.substr(start, slash == std::string_view::npos ? std::string_view::npos
                                                                   : slash - start);
    if (seg == "..") {
      if (parts.empty()) return std::nullopt;
      parts.pop_back();
    } else if (!seg.empty() && seg != ".") {
      parts.emplace_back(seg);
    }
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return detail::join(parts, "/");
}

std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                    : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + sep.size();
  }
  return out;
}

bool path_has_suffix(std::string_view path, std::string_view suffix) {
  if (path == suffix) return true;
  return path.size() > suffix.size() && path.ends_with(suffix) &&
         path[path.size() - suffix.size() - 1] == '/';
}

struct SymbolInfo {
  std::string id;
  std::string name;
  std::string owner;
  Granularity granularity;
  std::string file;
};

struct Lookup {
  enum State { Found, Ambiguous, Missing } state = Missing;
  std::string id;
};

// Per-file import bindings.
struct Scope {
  std::set<std::string> imported;
  std::map<std::string, std::vector<std::string>> modules;  // alias -> files
  std::map<std::string, std::pair<std::vector<std::string>, std::string>> names;
  std::set<std::string> external;  // bindings to modules outside the repo
};

class Resolver {
public:
  Resolver(const RepoModel& repo, const std::vector<FileFacts>& facts) : facts_(facts) {
    for (const auto& f : repo.files) {
      files_.insert(f.path);
      dir_files_[dir_of(f.path)].push_back(f.path);
      language_[f.path] = f.language;
    }
    for (const auto& m : repo.manifests)
      if (file_name(m.path) == "go.mod") go_modules_.push_back(m);
  }

  ReferenceGraph run() {
    for (const auto& f : facts_) {
      facts_by_path_[f.path] = &f;
      graph_.nodes[f.path] = RefNode{f.path, Granularity::File, file_name(f.path), f.path};
      for (const auto& d : f.diagnostics) graph_.diagnostics.push_back(d);
      for (const auto& s : f.symbols) {
        const auto id = symbol_id(f.path, s.owner, s.name);
        if (graph_.nodes.count(id)) continue;
        graph_.nodes[id] = RefNode{id, s.granularity, s.name, f.path};
        SymbolInfo info{id, s.name, s.owner, s.granularity, f.path};
        symbols_[id] = info;
        file_symbols_[f.path].push_back(info);
        const auto fam = family_of(f.language);
        global_[{fam, s.name}].push_back(id);
        if (!s.owner.empty()) members_[{fam, s.owner}].push_back(id);
      }
    }
    for (const auto& f : facts_) bind_imports(f);
    // Bases first: member lookup walks resolved inheritance edges.
    for (const auto& f : facts_)
      for (const auto& b : f.bases) resolve_base(f, b);
    for (const auto& f : facts_)
      for (const auto& c : f.calls) resolve_call(f, c);
    return std::move(graph_);
  }

private:
  // ---- imports -----------------------------------------------------------

  bool exists(const std::string& p) const { return files_.count(p) != 0; }

  void add_import(const FileFacts& f, Scope& scope, const std::string& target) {
    if (target == f.path) return;
    scope.imported.insert(target);
    graph_.edges.insert({f.path, target, EdgeKind::Import});
  }

  void unresolved(const std::string& src, std::string target) {
    graph_.unresolved.insert({src, std::move(target)});
  }

  std::optional<std::string> python_module(const std::string& spec, int level,
                                           const std::string& file_dir) const {
    std::string rel = spec;
    std::replace(rel.begin(), rel.end(), '.', '/');
    auto try_base = [&](const std::string& base) -> std::optional<std::string> {
      if (rel.empty()) {
        auto init = join_path(base, "__init__.py");
        if (exists(init)) return init;
        return std::nullopt;
      }
      for (auto cand : {join_path(base, rel + ".py"), join_path(base, rel + "/__init__.py")})
        if (exists(cand)) return cand;
      return std::nullopt;
    };
    if (level > 0) {
      std::string base = file_dir;
      for (int i = 1; i < level; ++i) {
        if (base.empty()) return std::nullopt;
        base = dir_of(base);
      }
      return try_base(base);
    }
    for (std::string base = file_dir;; base = dir_of(base)) {
      if (auto hit = try_base(base)) return hit;
      if (base.empty()) break;
    }
    return std::nullopt;
  }

  bool python_package_dir(const std::string& spec, int level, const std::string& file_dir) const {
    std::string rel = spec;
    std::replace(rel.begin(), rel.end(), '.', '/');
    if (level > 0) return true;
    for (std::string base = file_dir;; base = dir_of(base)) {
      if (dir_files_.count(join_path(base, rel))) return true;
      if (base.empty()) break;
    }
    return false;
  }

  void bind_python(const FileFacts& f, const ImportDecl& d, Scope& scope) {
    const auto dir = dir_of(f.path);
    const std::string shown = std::string(static_cast<std::size_t>(d.level), '.') + d.spec;
    if (d.style == ImportStyle::PythonModule) {
      const auto first = split(d.spec, ".").front();
      if (auto target = python_module(d.spec, 0, dir)) {
        add_import(f, scope, *target);
        scope.modules[d.alias.empty() ? d.spec : d.alias].push_back(*target);
        if (d.alias.empty() && first != d.spec)
          if (auto pkg = python_module(first, 0, dir)) scope.modules[first].push_back(*pkg);
      } else {
        unresolved(f.path, shown);
        scope.external.insert(d.alias.empty() ? first : d.alias);
      }
      return;
    }
    const auto module = python_module(d.spec, d.level, dir);
    bool any = false;
    if (d.wildcard && module) {
      add_import(f, scope, *module);
      any = true;
    }
    for (const auto& [name, alias] : d.names) {
      const auto sub_spec = d.spec.empty() ? name : d.spec + "." + name;
      if (auto sub = python_module(sub_spec, d.level, dir)) {
        add_import(f, scope, *sub);
        scope.modules[alias].push_back(*sub);
        any = true;
      } else if (module) {
        add_import(f, scope, *module);
        scope.names[alias] = {{*module}, name};
        any = true;
      } else {
        scope.external.insert(alias);
      }
    }
    if (!any) unresolved(f.path, shown);
  }

  std::vector<std::string> java_package_files(const std::string& pkg_path) const {
    std::vector<std::string> out;
    for (const auto& [dir, files] : dir_files_) {
      if (!path_has_suffix(dir, pkg_path)) continue;
      for (const auto& p : files)
        if (p.ends_with(".java")) out.push_back(p);
    }
    return out;
  }

  std::vector<std::string> files_with_suffix(const std::string& suffix) const {
    std::vector<std::string> out;
    for (const auto& p : files_)
      if (path_has_suffix(p, suffix)) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
  }

  void bind_java(const FileFacts& f, const ImportDecl& d, Scope& scope) {
    auto segs = split(d.spec, ".");
    if (d.style == ImportStyle::JavaWildcard) {
      auto files = java_package_files(detail::join(segs, "/"));
      if (files.empty()) {
        auto cls = files_with_suffix(detail::join(segs, "/") + ".java");
        files = cls;
      }
      if (files.empty()) {
        unresolved(f.path, d.spec + ".*");
        return;
      }
      for (const auto& t : files) add_import(f, scope, t);
      return;
    }
    auto cls = files_with_suffix(detail::join(segs, "/") + ".java");
    if (cls.size() == 1) {
      add_import(f, scope, cls.front());
      scope.names[segs.back()] = {{cls.front()}, segs.back()};
      return;
    }
    if (segs.size() > 1) {
      auto member = segs.back();
      auto owner = std::vector<std::string>(segs.begin(), segs.end() - 1);
      auto holder = files_with_suffix(detail::join(owner, "/") + ".java");
      if (holder.size() == 1) {
        add_import(f, scope, holder.front());
        scope.names[member] = {{holder.front()}, member};
        return;
      }
    }
    unresolved(f.path, d.spec);
    scope.external.insert(segs.back());
  }

  std::vector<std::string> go_files_in(const std::string& dir) const {
    std::vector<std::string> out;
    auto it = dir_files_.find(dir);
    if (it == dir_files_.end()) return out;
    for (const auto& p : it->second)
      if (p.ends_with(".go") && !p.ends_with("_test.go")) out.push_back(p);
    return out;
  }

  void bind_go(const FileFacts& f, const ImportDecl& d, Scope& scope) {
    std::optional<std::string> dir;
    for (const auto& mod : go_modules_) {
      for (auto line : detail::split_lines(mod.content)) {
        line = detail::trim(line);
        if (!line.starts_with("module ")) continue;
        const auto module = std::string(detail::trim(line.substr(7)));
        const auto root = dir_of(mod.path);
        if (d.spec == module) dir = root;
        else if (d.spec.starts_with(module + "/"))
          dir = join_path(root, std::string_view(d.spec).substr(module.size() + 1));
      }
    }
    if (!dir) {
      auto segs = split(d.spec, "/");
      const std::size_t min_len = std::min<std::size_t>(2, segs.size());
      for (std::size_t k = 0; k + min_len <= segs.size() && !dir; ++k) {
        const auto suffix = detail::join(std::vector<std::string>(segs.begin() + k, segs.end()), "/");
        std::vector<std::string> hits;
        for (const auto& [dname, files] : dir_files_)
          if (path_has_suffix(dname, suffix) && !go_files_in(dname).empty()) hits.push_back(dname);
        if (hits.size() == 1) dir = hits.front();
      }
    }
    const auto files = dir ? go_files_in(*dir) : std::vector<std::string>{};
    std::string binding = d.alias;
    if (binding.empty()) {
      binding = last_segment(d.spec);
      if (!files.empty())
        if (auto it = facts_by_path_.find(files.front()); it != facts_by_path_.end() &&
                                                           !it->second->package.empty())
          binding = it->second->package;
    }
    if (files.empty()) {
      unresolved(f.path, d.spec);
      scope.external.insert(binding);
      return;
    }
    for (const auto& t : files) add_import(f, scope, t);
    if (binding != "_" && binding != ".") scope.modules[binding] = files;
  }

  void bind_c(const FileFacts& f, const ImportDecl& d, Scope& scope) {
    std::optional<std::string> target;
    if (d.style == ImportStyle::CInclude) {
      if (auto local = normalize(join_path(dir_of(f.path), d.spec)); local && exists(*local))
        target = local;
    }
    if (!target) {
      if (auto rooted = normalize(d.spec); rooted && exists(*rooted)) target = rooted;
    }
    if (!target) {
      auto hits = files_with_suffix(d.spec);
      if (hits.size() == 1) target = hits.front();
    }
    if (target) add_import(f, scope, *target);
    else unresolved(f.path, d.spec);
  }

  void bind_ecma(const FileFacts& f, const ImportDecl& d, Scope& scope) {
    std::optional<std::string> target;
    if (d.spec.starts_with(".")) {
      if (auto base = normalize(join_path(dir_of(f.path), d.spec))) {
        static const char* kExts[] = {".ts", ".tsx", ".js", ".jsx", ".mjs", ".cjs"};
        if (exists(*base)) target = base;
        for (const char* ext : kExts)
          if (!target && exists(*base + ext)) target = *base + ext;
        for (const char* ext : kExts)
          if (!target && exists(join_path(*base, std::string("index") + ext)))
            target = join_path(*base, std::string("index") + ext);
      }
    }
    if (!target) {
      unresolved(f.path, d.spec);
      if (!d.alias.empty()) scope.external.insert(d.alias);
      for (const auto& [name, alias] : d.names) scope.external.insert(alias);
      return;
    }
    add_import(f, scope, *target);
    if (!d.alias.empty()) scope.modules[d.alias] = {*target};
    for (const auto& [name, alias] : d.names) scope.names[alias] = {{*target}, name};
  }

  static bool is_rust_root_file(const std::string& path) {
    const auto name = file_name(path);
    return name == "main.rs" || name == "lib.rs" || name == "mod.rs";
  }

  // Directory holding the child modules of `path`.
  static std::string rust_module_dir(const std::string& path) {
    if (is_rust_root_file(path)) return dir_of(path);
    auto stem = file_name(path);
    stem = stem.substr(0, stem.size() - 3);
    return join_path(dir_of(path), stem);
  }

  std::optional<std::string> rust_crate_root(const std::string& path) const {
    for (std::string dir = dir_of(path);; dir = dir_of(dir)) {
      if (exists(join_path(dir, "lib.rs")) || exists(join_path(dir, "main.rs"))) return dir;
      if (dir.empty()) break;
    }
    return std::nullopt;
  }

  std::optional<std::string> rust_module_file(const std::string& dir,
                                              const std::vector<std::string>& segs) const {
    const auto rel = join_path(dir, detail::join(segs, "/"));
    if (exists(rel + ".rs")) return rel + ".rs";
    if (exists(rel + "/mod.rs")) return rel + "/mod.rs";
    return std::nullopt;
  }

  void bind_rust(const FileFacts& f, const ImportDecl& d, Scope& scope) {
    if (d.style == ImportStyle::RustMod) {
      if (auto t = rust_module_file(rust_module_dir(f.path), {d.spec})) add_import(f, scope, *t);
      else unresolved(f.path, "mod " + d.spec);
      return;
    }
    auto segs = split(d.spec, "::");
    std::optional<std::string> base;
    std::optional<std::string> base_file;
    std::size_t i = 0;
    if (segs.front() == "crate") {
      base = rust_crate_root(f.path);
      i = 1;
    } else if (segs.front() == "self") {
      base = rust_module_dir(f.path);
      base_file = f.path;
      i = 1;
    } else if (segs.front() == "super") {
      auto here = rust_module_dir(f.path);
      base = dir_of(here);
      i = 1;
      while (i < segs.size() && segs[i] == "super") {
        base = dir_of(*base);
        ++i;
      }
    }
    if (!base) {
      unresolved(f.path, d.spec);
      if (!d.alias.empty()) scope.external.insert(d.alias);
      return;
    }
    // Longest module path wins; trailing segments are item names.
    std::optional<std::string> target;
    std::size_t consumed = i;
    for (std::size_t end = segs.size(); end > i && !target; --end) {
      std::vector<std::string> mod(segs.begin() + static_cast<long>(i), segs.begin() + static_cast<long>(end));
      if (auto t = rust_module_file(*base, mod)) {
        target = t;
        consumed = end;
      }
    }
    if (!target) {
      for (const auto* root : {"lib.rs", "main.rs", "mod.rs"})
        if (!target && exists(join_path(*base, root))) target = join_path(*base, root);
      if (!target && base_file) target = base_file;
    }
    if (!target) {
      unresolved(f.path, d.spec);
      return;
    }
    add_import(f, scope, *target);
    if (d.wildcard || d.alias.empty()) return;
    if (consumed < segs.size()) scope.names[d.alias] = {{*target}, segs.back()};
    else scope.modules[d.alias] = {*target};
  }

  void bind_imports(const FileFacts& f) {
    auto& scope = scopes_[f.path];
    for (const auto& d : f.imports) {
      switch (d.style) {
        case ImportStyle::PythonModule:
        case ImportStyle::PythonFrom: bind_python(f, d, scope); break;
        case ImportStyle::JavaClass:
        case ImportStyle::JavaWildcard: bind_java(f, d, scope); break;
        case ImportStyle::GoPackage: bind_go(f, d, scope); break;
        case ImportStyle::CInclude:
        case ImportStyle::CSystemInclude: bind_c(f, d, scope); break;
        case ImportStyle::EcmaModule: bind_ecma(f, d, scope); break;
        case ImportStyle::RustMod:
        case ImportStyle::RustUse: bind_rust(f, d, scope); break;
      }
    }
  }

  // ---- symbols -----------------------------------------------------------

  // One winner, or Ambiguous. A class beats its own constructor.
  Lookup decide(const std::set<std::string>& hits) const {
    if (hits.empty()) return {};
    if (hits.size() == 1) return {Lookup::Found, *hits.begin()};
    std::set<std::string> kept;
    for (const auto& id : hits) {
      const auto& s = symbols_.at(id);
      const bool ctor = s.granularity == Granularity::Function && s.owner == s.name &&
                        hits.count(symbol_id(s.file, "", s.name));
      if (!ctor) kept.insert(id);
    }
    if (kept.size() == 1) return {Lookup::Found, *kept.begin()};
    return {Lookup::Ambiguous, {}};
  }

  template <class Pred>
  Lookup pick(const std::vector<std::string>& files, Pred&& pred) const {
    std::set<std::string> hits;
    for (const auto& file : files) {
      auto it = file_symbols_.find(file);
      if (it == file_symbols_.end()) continue;
      for (const auto& s : it->second)
        if (pred(s)) hits.insert(s.id);
    }
    return decide(hits);
  }

  Lookup pick_ids(const std::vector<std::string>& ids) const {
    return decide(std::set<std::string>(ids.begin(), ids.end()));
  }

  // Like pick(), but when nothing matches follows the files' own imports,
  // which is how barrel modules and package __init__ files re-export names.
  template <class Pred>
  Lookup pick_exported(const std::vector<std::string>& files, Pred&& pred) const {
    constexpr int kMaxHops = 4;
    std::set<std::string> seen(files.begin(), files.end());
    std::vector<std::string> level = files;
    for (int hop = 0; hop <= kMaxHops && !level.empty(); ++hop) {
      if (auto r = pick(level, pred); r.state != Lookup::Missing) return r;
      std::vector<std::string> next;
      for (const auto& file : level) {
        const auto fam = family_of(language_.at(file));
        if (fam != Family::Python && fam != Family::Ecma && fam != Family::Rust) continue;
        auto it = scopes_.find(file);
        if (it == scopes_.end()) continue;
        for (const auto& t : it->second.imported)
          if (seen.insert(t).second) next.push_back(t);
      }
      level = std::move(next);
    }
    return {};
  }

  std::vector<std::string> package_peers(const FileFacts& f) const {
    std::vector<std::string> peers;
    const auto fam = family_of(f.language);
    if (fam != Family::Go && fam != Family::Java) return peers;
    auto it = dir_files_.find(dir_of(f.path));
    if (it == dir_files_.end()) return peers;
    for (const auto& p : it->second) {
      if (p == f.path || family_of(language_.at(p)) != fam) continue;
      auto pf = facts_by_path_.find(p);
      if (pf != facts_by_path_.end() && pf->second->package == f.package) peers.push_back(p);
    }
    return peers;
  }

  // Same file, package peers, imported files, then a repository-wide unique
  // name. Each stage stops the search on a hit or an ambiguity.
  template <class Pred>
  Lookup staged(const FileFacts& f, const std::string& name, Pred&& pred) const {
    auto match = [&](const SymbolInfo& s) { return s.name == name && pred(s); };
    if (auto r = pick({f.path}, match); r.state != Lookup::Missing) return r;
    if (auto r = pick(package_peers(f), match); r.state != Lookup::Missing) return r;
    const auto& scope = scopes_.at(f.path);
    std::vector<std::string> imported(scope.imported.begin(), scope.imported.end());
    if (auto r = pick(imported, match); r.state != Lookup::Missing) return r;
    auto it = global_.find({family_of(f.language), name});
    if (it == global_.end()) return {};
    std::vector<std::string> ids;
    for (const auto& id : it->second)
      if (pred(symbols_.at(id))) ids.push_back(id);
    auto r = pick_ids(ids);
    return r;
  }

  // Method `name` of class `cls_id`: its own file, then anywhere in the
  // same language family, then up the resolved inheritance chain.
  Lookup member_of(const FileFacts& f, const std::string& cls_id, const std::string& name,
                   int depth = 0) const {
    const auto& cls = symbols_.at(cls_id);
    auto match = [&](const SymbolInfo& s) { return s.owner == cls.name && s.name == name; };
    if (auto r = pick({cls.file}, match); r.state != Lookup::Missing) return r;
    if (auto it = members_.find({family_of(f.language), cls.name}); it != members_.end()) {
      std::vector<std::string> ids;
      for (const auto& id : it->second)
        if (symbols_.at(id).name == name) ids.push_back(id);
      if (auto r = pick_ids(ids); r.state != Lookup::Missing) return r;
    }
    return inherited(f, cls_id, name, depth);
  }

  Lookup inherited(const FileFacts& f, const std::string& cls_id, const std::string& name,
                   int depth) const {
    constexpr int kMaxDepth = 8;
    if (depth >= kMaxDepth) return {};
    std::set<std::string> found;
    bool ambiguous = false;
    for (auto it = graph_.edges.lower_bound({cls_id, "", EdgeKind::Import});
         it != graph_.edges.end() && it->src == cls_id; ++it) {
      if (it->kind != EdgeKind::Inheritance || !symbols_.count(it->dst)) continue;
      auto r = member_of(f, it->dst, name, depth + 1);
      if (r.state == Lookup::Found) found.insert(r.id);
      if (r.state == Lookup::Ambiguous) ambiguous = true;
    }
    if (ambiguous || found.size() > 1) return {Lookup::Ambiguous, {}};
    if (found.empty()) return {};
    return {Lookup::Found, *found.begin()};
  }

  // Resolves a written type such as "Cart", "ledger.Server" or "a::T" to a
  // class node.
  Lookup resolve_type(const FileFacts& f, const std::string& written) const {
    const auto& scope = scopes_.at(f.path);
    const auto last = last_segment(written);
    std::string prefix = written.substr(0, written.size() - last.size());
    while (!prefix.empty() && (prefix.back() == '.' || prefix.back() == ':')) prefix.pop_back();
    auto named = [&](const SymbolInfo& s) { return s.name == last && is_class(s); };
    if (!prefix.empty()) {
      std::string dotted = prefix;
      for (std::size_t pos; (pos = dotted.find("::")) != std::string::npos;) dotted.replace(pos, 2, ".");
      if (auto it = scope.modules.find(dotted); it != scope.modules.end())
        return pick_exported(it->second, named);
      const auto head = split(dotted, ".").front();
      if (scope.external.count(dotted) || scope.external.count(head)) return {};
    } else if (auto it = scope.names.find(last); it != scope.names.end()) {
      return pick_exported(it->second.first, [&](const SymbolInfo& s) {
        return s.name == it->second.second && is_class(s);
      });
    } else if (scope.external.count(last)) {
      return {};
    }
    return staged(f, last, is_class);
  }

  static bool is_class(const SymbolInfo& s) { return s.granularity == Granularity::Class; }
  static bool is_top_level(const SymbolInfo& s) { return s.owner.empty(); }

  Lookup resolve_callee(const FileFacts& f, const CallSite& c) const {
    const auto& scope = scopes_.at(f.path);
    const SymbolInfo* caller = symbols_.count(c.from) ? &symbols_.at(c.from) : nullptr;
    const std::string owner = !caller ? std::string()
                              : caller->granularity == Granularity::Class ? caller->name
                                                                          : caller->owner;
    const auto owner_id = owner.empty() ? std::string() : symbol_id(f.path, "", owner);

    if (c.qualifier == "super" || c.qualifier.starts_with("super(")) {
      if (!symbols_.count(owner_id)) return {};
      return inherited(f, owner_id, c.name, 0);
    }
    if (c.on_self && !owner.empty()) {
      if (symbols_.count(owner_id)) {
        if (auto r = member_of(f, owner_id, c.name); r.state != Lookup::Missing) return r;
      } else {
        // Out-of-line definitions: the class body lives in another file.
        auto it = members_.find({family_of(f.language), owner});
        if (it != members_.end()) {
          std::vector<std::string> ids;
          for (const auto& id : it->second)
            if (symbols_.at(id).name == c.name) ids.push_back(id);
          if (auto r = pick_ids(ids); r.state != Lookup::Missing) return r;
        }
      }
    } else if (!c.receiver_type.empty()) {
      auto cls = resolve_type(f, c.receiver_type);
      if (cls.state != Lookup::Found) return {};
      return member_of(f, cls.id, c.name);
    } else if (!c.qualifier.empty()) {
      const auto& q = c.qualifier;
      const auto head = split(q, ".").front();
      if (auto it = scope.modules.find(q); it != scope.modules.end()) {
        return pick_exported(it->second, [&](const SymbolInfo& s) {
          return s.name == c.name && is_top_level(s);
        });
      }
      if (auto it = scope.names.find(q); it != scope.names.end()) {
        auto cls = pick_exported(it->second.first, [&](const SymbolInfo& s) {
          return s.name == it->second.second && is_class(s);
        });
        if (cls.state != Lookup::Found) return {};
        return member_of(f, cls.id, c.name);
      }
      if (scope.external.count(q) || scope.external.count(head)) return {};
      const auto last = last_segment(q);
      if (!last.empty() && std::isupper(static_cast<unsigned char>(last.front()))) {
        auto cls = resolve_type(f, q);
        if (cls.state == Lookup::Found) return member_of(f, cls.id, c.name);
      }
    } else if (auto it = scope.names.find(c.name); it != scope.names.end()) {
      return pick_exported(it->second.first, [&](const SymbolInfo& s) {
        return s.name == it->second.second && is_top_level(s);
      });
    } else if (scope.external.count(c.name)) {
      return {};
    }
    return staged(f, c.name, [](const SymbolInfo&) { return true; });
  }

  void resolve_call(const FileFacts& f, const CallSite& c) {
    if (!symbols_.count(c.from)) return;
    auto r = resolve_callee(f, c);
    if (r.state == Lookup::Found) {
      graph_.edges.insert({c.from, r.id, EdgeKind::Call});
    } else {
      unresolved(c.from, c.qualifier.empty() ? c.name : c.qualifier + "." + c.name);
    }
  }

  Lookup resolve_class(const FileFacts& f, const BaseRef& b) const {
    return resolve_type(f, b.qualifier.empty() ? b.name : b.qualifier + "." + b.name);
  }

  void resolve_base(const FileFacts& f, const BaseRef& b) {
    const auto full = b.qualifier.empty() ? b.name : b.qualifier + "." + b.name;
    if (!symbols_.count(b.from)) {
      unresolved(f.path, full);
      return;
    }
    auto r = resolve_class(f, b);
    if (r.state == Lookup::Found && r.id != b.from) {
      graph_.edges.insert({b.from, r.id, EdgeKind::Inheritance});
    } else {
      unresolved(b.from, full);
    }
  }

  const std::vector<FileFacts>& facts_;
  ReferenceGraph graph_;
  std::unordered_set<std::string> files_;
  std::map<std::string, std::vector<std::string>> dir_files_;
  std::unordered_map<std::string, Language> language_;
  std::vector<ManifestFile> go_modules_;
  std::unordered_map<std::string, const FileFacts*> facts_by_path_;
  std::unordered_map<std::string, SymbolInfo> symbols_;
  std::unordered_map<std::string, std::vector<SymbolInfo>> file_symbols_;
  std::map<std::pair<Family, std::string>, std::vector<std::string>> global_;
  std::map<std::pair<Family, std::string>, std::vector<std::string>> members_;
  std::unordered_map<std::string, Scope> scopes_;
};

}  // namespace

std::string last_segment(std::string_view qualified) {
  std::size_t cut = 0;
  for (std::size_t i = 0; i < qualified.size(); ++i) {
    const char c = qualified[i];
    if (c == '.' || c == '/' || c == ':') cut = i + 1;
  }
  return std::string(qualified.substr(cut));
}

ReferenceGraph resolve(const RepoModel& repo, const std::vector<FileFacts>& facts) {
  return Resolver(repo, facts).run();
}

}  // namespace archrecon::refs
