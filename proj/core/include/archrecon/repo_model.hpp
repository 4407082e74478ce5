#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace archrecon {

enum class Language { Go, Java, C, Cpp, Python, Yaml, JavaScript, TypeScript, Rust, Other };

std::string_view to_string(Language lang);
std::optional<Language> language_from_string(std::string_view name);

// Maps a path's extension to a language; unknown extensions give Other.
Language language_for_path(std::string_view path);

// Approximate model tokens: ceil(bytes / 4).
std::uint64_t token_estimate(std::string_view text);

using TokenCounter = std::function<std::uint64_t(std::string_view)>;

// Named counters usable from config files: "bytes4" (default) and "words".
TokenCounter make_token_counter(std::string_view name);

struct ScanConfig {
  std::vector<std::string> include_extensions;
  std::vector<std::string> exclude_globs;
  std::string token_counter = "bytes4";
  // Overrides token_counter when set, e.g. for an exact tokenizer.
  TokenCounter custom_counter;
  unsigned threads = 0;

  ScanConfig();

  static std::vector<std::string> default_include_extensions();
  static std::vector<std::string> default_exclude_globs();

  TokenCounter counter() const;
};

// Reads include_extensions / exclude_globs / token_counter from a .toml or
// .json file. TOML keys may live at top level or under a [scan] table.
ScanConfig load_scan_config(const std::filesystem::path& file);
ScanConfig scan_config_from_json(std::string_view text);
ScanConfig scan_config_from_toml(std::string_view text);

struct SourceFile {
  std::string path;  // repo-relative, '/'-separated
  Language language = Language::Other;
  std::string content;
  std::uint64_t token_count = 0;

  bool operator==(const SourceFile&) const = default;
};

// Build manifests (package.json, Cargo.toml, ...) kept for entry-point
// detection. They are not part of files and do not count toward tokens.
struct ManifestFile {
  std::string path;
  std::string content;

  bool operator==(const ManifestFile&) const = default;
};

struct RepoModel {
  std::string root_name;
  std::vector<SourceFile> files;  // canonical DFS order
  std::uint64_t total_tokens = 0;
  std::vector<ManifestFile> manifests;
  std::vector<std::string> diagnostics;

  const SourceFile* find(std::string_view path) const;
  bool contains(std::string_view path) const { return find(path) != nullptr; }

  bool operator==(const RepoModel&) const = default;
};

// Walks root depth-first with siblings in byte-lexicographic name order.
// Throws Error{Io} if root is unreadable and Error{EmptyRepo} when no file
// matches. Binary or non-UTF-8 files are skipped with a diagnostic.
RepoModel scan_repo(const std::filesystem::path& root, const ScanConfig& config = {});

// True when the repo-relative path (or any of its components) matches one
// of the globs.
bool path_excluded(std::string_view rel_path, const std::vector<std::string>& globs);

std::string repo_to_json(const RepoModel& repo);
RepoModel repo_from_json(std::string_view text);

}  // namespace archrecon
