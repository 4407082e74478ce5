#include "archrecon/repo_model.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <system_error>

#include "archrecon/error.hpp"
#include "detail/json_util.hpp"
#include "detail/parallel.hpp"
#include "detail/text.hpp"
#include "toml.hpp"

namespace archrecon {

namespace fs = std::filesystem;
using detail::json;

namespace {

constexpr std::array kLanguageNames{
    std::pair{Language::Go, "Go"},           std::pair{Language::Java, "Java"},
    std::pair{Language::C, "C"},             std::pair{Language::Cpp, "Cpp"},
    std::pair{Language::Python, "Python"},   std::pair{Language::Yaml, "Yaml"},
    std::pair{Language::JavaScript, "JavaScript"},
    std::pair{Language::TypeScript, "TypeScript"},
    std::pair{Language::Rust, "Rust"},       std::pair{Language::Other, "Other"},
};

constexpr std::array kManifestNames{"package.json", "pyproject.toml", "setup.cfg",
                                    "setup.py",     "Cargo.toml",     "CMakeLists.txt", "go.mod"};

std::string extension_of(std::string_view path) {
  const auto slash = path.rfind('/');
  const auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return {};
  return detail::to_lower(name.substr(dot));
}

std::uint64_t count_words(std::string_view text) {
  std::uint64_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

struct Candidate {
  std::string rel;
  fs::path abs;
  bool manifest_only = false;
};

void walk(const fs::path& dir, const std::string& rel_prefix, const ScanConfig& cfg,
          std::vector<Candidate>& out, std::vector<std::string>& diags) {
  std::error_code ec;
  std::vector<fs::directory_entry> entries;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec))
    entries.push_back(*it);
  if (ec) {
    diags.push_back("cannot list directory '" + (rel_prefix.empty() ? "." : rel_prefix) +
                    "': " + ec.message());
    return;
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.path().filename().string() < b.path().filename().string();
  });
  for (const auto& entry : entries) {
    const auto name = entry.path().filename().string();
    const auto rel = rel_prefix.empty() ? name : rel_prefix + "/" + name;
    if (path_excluded(rel, cfg.exclude_globs)) continue;
    std::error_code sec;
    if (entry.is_symlink(sec)) continue;
    if (entry.is_directory(sec)) {
      walk(entry.path(), rel, cfg, out, diags);
    } else if (entry.is_regular_file(sec)) {
      const auto ext = extension_of(name);
      const bool included = std::find(cfg.include_extensions.begin(),
                                      cfg.include_extensions.end(),
                                      ext) != cfg.include_extensions.end();
      const bool manifest =
          std::find(kManifestNames.begin(), kManifestNames.end(), name) != kManifestNames.end();
      if (included || manifest) out.push_back({rel, entry.path(), !included});
    }
  }
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

ScanConfig apply_overrides(ScanConfig cfg, const json& obj) {
  auto strings = [](const json& arr, const char* key) {
    if (!arr.is_array()) throw Error(ErrorKind::Config, std::string(key) + " must be an array");
    std::vector<std::string> out;
    for (const auto& v : arr) {
      if (!v.is_string())
        throw Error(ErrorKind::Config, std::string(key) + " entries must be strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  if (obj.contains("include_extensions")) {
    cfg.include_extensions = strings(obj["include_extensions"], "include_extensions");
    for (auto& e : cfg.include_extensions) {
      e = detail::to_lower(e);
      if (!e.empty() && e.front() != '.') e.insert(e.begin(), '.');
    }
  }
  if (obj.contains("exclude_globs"))
    cfg.exclude_globs = strings(obj["exclude_globs"], "exclude_globs");
  if (obj.contains("token_counter")) {
    if (!obj["token_counter"].is_string())
      throw Error(ErrorKind::Config, "token_counter must be a string");
    cfg.token_counter = obj["token_counter"].get<std::string>();
    (void)make_token_counter(cfg.token_counter);
  }
  return cfg;
}

}  // namespace

std::string_view to_string(Language lang) {
  for (const auto& [l, name] : kLanguageNames)
    if (l == lang) return name;
  return "Other";
}

std::optional<Language> language_from_string(std::string_view name) {
  for (const auto& [l, n] : kLanguageNames)
    if (name == n) return l;
  return std::nullopt;
}

Language language_for_path(std::string_view path) {
  const auto ext = extension_of(path);
  if (ext == ".go") return Language::Go;
  if (ext == ".java") return Language::Java;
  if (ext == ".c" || ext == ".h") return Language::C;
  if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".hpp" || ext == ".hh" ||
      ext == ".hxx")
    return Language::Cpp;
  if (ext == ".py") return Language::Python;
  if (ext == ".yaml" || ext == ".yml") return Language::Yaml;
  if (ext == ".js" || ext == ".mjs" || ext == ".cjs" || ext == ".jsx") return Language::JavaScript;
  if (ext == ".ts" || ext == ".tsx") return Language::TypeScript;
  if (ext == ".rs") return Language::Rust;
  return Language::Other;
}

std::uint64_t token_estimate(std::string_view text) { return (text.size() + 3) / 4; }

TokenCounter make_token_counter(std::string_view name) {
  if (name == "bytes4") return [](std::string_view t) { return token_estimate(t); };
  if (name == "words") return [](std::string_view t) { return count_words(t); };
  throw Error(ErrorKind::Config, "unknown token_counter '" + std::string(name) + "'");
}

ScanConfig::ScanConfig()
    : include_extensions(default_include_extensions()), exclude_globs(default_exclude_globs()) {}

std::vector<std::string> ScanConfig::default_include_extensions() {
  return {".go", ".java", ".c",  ".h",  ".cc", ".cpp", ".cxx", ".hpp", ".hh", ".hxx", ".py",
          ".yaml", ".yml", ".js", ".mjs", ".cjs", ".jsx", ".ts", ".tsx", ".rs"};
}

std::vector<std::string> ScanConfig::default_exclude_globs() {
  return {".git",   ".hg",          ".svn",         ".archrecon", "build", "dist",
          "out",    "target",       "vendor",       "third_party", "node_modules",
          "__pycache__", ".venv",   "venv",         ".tox",       "*.min.js"};
}

TokenCounter ScanConfig::counter() const {
  if (custom_counter) return custom_counter;
  return make_token_counter(token_counter);
}

bool path_excluded(std::string_view rel_path, const std::vector<std::string>& globs) {
  const std::string rel(rel_path);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= rel.size()) {
    const auto slash = rel.find('/', start);
    parts.push_back(rel.substr(start, slash == std::string::npos ? std::string::npos
                                                                  : slash - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  for (const auto& g : globs) {
    if (::fnmatch(g.c_str(), rel.c_str(), 0) == 0) return true;
    for (const auto& part : parts)
      if (::fnmatch(g.c_str(), part.c_str(), 0) == 0) return true;
  }
  return false;
}

const SourceFile* RepoModel::find(std::string_view path) const {
  for (const auto& f : files)
    if (f.path == path) return &f;
  return nullptr;
}

RepoModel scan_repo(const fs::path& root, const ScanConfig& config) {
  std::error_code ec;
  if (!fs::exists(root, ec) || !fs::is_directory(root, ec))
    throw Error(ErrorKind::Io, "repository root '" + root.string() + "' is not a readable directory");
  {
    fs::directory_iterator probe(root, ec);
    if (ec)
      throw Error(ErrorKind::Io, "cannot read repository root '" + root.string() + "': " +
                                     ec.message());
  }

  RepoModel model;
  auto canonical = fs::weakly_canonical(root, ec);
  model.root_name = (ec ? root : canonical).filename().string();
  if (model.root_name.empty()) model.root_name = (ec ? root : canonical).parent_path().filename().string();

  std::vector<Candidate> candidates;
  walk(root, "", config, candidates, model.diagnostics);

  const auto counter = config.counter();
  struct Loaded {
    std::optional<std::string> content;
    std::string problem;
  };
  std::vector<Loaded> loaded(candidates.size());
  detail::parallel_for(candidates.size(), config.threads, [&](std::size_t i) {
    auto text = read_file(candidates[i].abs);
    if (!text) {
      loaded[i].problem = "unreadable";
    } else if (text->find('\0') != std::string::npos) {
      loaded[i].problem = "binary content";
    } else if (!detail::is_valid_utf8(*text)) {
      loaded[i].problem = "not valid UTF-8";
    } else {
      loaded[i].content = std::move(text);
    }
  });

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (!loaded[i].content) {
      model.diagnostics.push_back("skipped '" + c.rel + "': " + loaded[i].problem);
      continue;
    }
    if (c.manifest_only || c.rel.ends_with("setup.py")) {
      model.manifests.push_back({c.rel, *loaded[i].content});
      if (c.manifest_only) continue;
    }
    SourceFile f;
    f.path = c.rel;
    f.language = language_for_path(c.rel);
    f.token_count = counter(*loaded[i].content);
    f.content = std::move(*loaded[i].content);
    model.total_tokens += f.token_count;
    model.files.push_back(std::move(f));
  }
  if (model.files.empty())
    throw Error(ErrorKind::EmptyRepo, "no source files matched under '" + root.string() + "'");
  return model;
}

ScanConfig scan_config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("scan config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Config, "scan config must be a JSON object");
  if (doc.contains("scan")) doc = doc["scan"];
  return apply_overrides(ScanConfig{}, doc);
}

ScanConfig scan_config_from_toml(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("scan config: invalid TOML: ") +
                                       std::string(e.description()));
  }
  const toml::table* scope = &tbl;
  if (auto* scan = tbl["scan"].as_table()) scope = scan;
  json obj = json::object();
  for (const char* key : {"include_extensions", "exclude_globs"}) {
    if (auto* arr = (*scope)[key].as_array()) {
      json list = json::array();
      for (const auto& v : *arr) {
        auto s = v.value<std::string>();
        if (!s) throw Error(ErrorKind::Config, std::string(key) + " entries must be strings");
        list.push_back(*s);
      }
      obj[key] = list;
    } else if ((*scope).contains(key)) {
      throw Error(ErrorKind::Config, std::string(key) + " must be an array");
    }
  }
  if (auto v = (*scope)["token_counter"].value<std::string>()) obj["token_counter"] = *v;
  return apply_overrides(ScanConfig{}, obj);
}

ScanConfig load_scan_config(const fs::path& file) {
  auto text = read_file(file);
  if (!text) throw Error(ErrorKind::Io, "cannot read config '" + file.string() + "'");
  if (file.extension() == ".json") return scan_config_from_json(*text);
  return scan_config_from_toml(*text);
}

std::string repo_to_json(const RepoModel& repo) {
  json files = json::array();
  for (const auto& f : repo.files)
    files.push_back({{"path", f.path},
                     {"language", std::string(to_string(f.language))},
                     {"token_count", f.token_count},
                     {"content", f.content}});
  json manifests = json::array();
  for (const auto& m : repo.manifests)
    manifests.push_back({{"path", m.path}, {"content", m.content}});
  json doc = {{"version", 1},
              {"root_name", repo.root_name},
              {"total_tokens", repo.total_tokens},
              {"files", files},
              {"manifests", manifests},
              {"diagnostics", repo.diagnostics}};
  return doc.dump(1);
}

RepoModel repo_from_json(std::string_view text) {
  constexpr std::string_view what = "repo.json";
  const auto doc = detail::parse_json(text, what);
  if (detail::require<int>(doc, "version", what) != 1)
    throw Error(ErrorKind::SchemaViolation, "repo.json: unsupported version");
  RepoModel repo;
  repo.root_name = detail::require<std::string>(doc, "root_name", what);
  for (const auto& f : detail::require<json>(doc, "files", what)) {
    SourceFile sf;
    sf.path = detail::require<std::string>(f, "path", what);
    auto lang = language_from_string(detail::require<std::string>(f, "language", what));
    if (!lang) throw Error(ErrorKind::SchemaViolation, "repo.json: unknown language");
    sf.language = *lang;
    sf.token_count = detail::require<std::uint64_t>(f, "token_count", what);
    sf.content = detail::require<std::string>(f, "content", what);
    repo.total_tokens += sf.token_count;
    repo.files.push_back(std::move(sf));
  }
  if (repo.total_tokens != detail::require<std::uint64_t>(doc, "total_tokens", what))
    throw Error(ErrorKind::SchemaViolation, "repo.json: total_tokens does not match files");
  if (doc.contains("manifests"))
    for (const auto& m : doc["manifests"])
      repo.manifests.push_back({detail::require<std::string>(m, "path", what),
                                detail::require<std::string>(m, "content", what)});
  if (doc.contains("diagnostics"))
    repo.diagnostics = doc["diagnostics"].get<std::vector<std::string>>();
  return repo;
}

}  // namespace archrecon
