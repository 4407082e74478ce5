#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "archrecon/error.hpp"
#include "archrecon/pipeline.hpp"
#include "detail/json_util.hpp"
#include "toml.hpp"

namespace archrecon {

using detail::json;

namespace {

constexpr std::string_view kStageNames[] = {"Scanned", "Indexed", "Summarized", "ReadmeDone", "DiagramsDone"};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, "archrecon.toml: " + msg); }

void reject_unknown(const toml::table& tbl, std::string_view table, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : tbl) {
    (void)value;
    if (std::find(known.begin(), known.end(), key.str()) == known.end())
      config_error("unknown key '" + std::string(key.str()) + "' in [" + std::string(table) + "]");
  }
}

template <class T>
std::optional<T> get(const toml::table& tbl, std::string_view table, std::string_view key) {
  const auto node = tbl[key];
  if (!node) return std::nullopt;
  if (auto v = node.value<T>()) return v;
  config_error("[" + std::string(table) + "] " + std::string(key) + " has the wrong type");
}

std::uint64_t positive(std::int64_t v, std::string_view what) {
  if (v <= 0) config_error(std::string(what) + " must be positive");
  return static_cast<std::uint64_t>(v);
}

BackendKind backend_kind(std::string_view name, std::string_view what) {
  if (name == "mock") return BackendKind::Mock;
  if (name == "http") return BackendKind::Http;
  throw Error(ErrorKind::Config, std::string(what) + ": backend must be 'mock' or 'http', got '" + std::string(name) + "'");
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::uint64_t env_positive(const std::string& text, const char* name) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, std::string(name) + " must be a positive integer, got '" + text + "'");
}

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<int>(s)]; }

std::optional<Stage> stage_from_string(std::string_view name) {
  for (const auto s : kAllStages)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

void apply_config_toml(PipelineConfig& config, std::string_view text) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    config_error("invalid TOML: " + std::string(e.description()));
  }
  reject_unknown(doc, "top level", {"scan", "llm", "readme", "grouping", "output"});

  if (const auto* scan = doc["scan"].as_table()) {
    reject_unknown(*scan, "scan", {"include_extensions", "exclude_globs", "token_counter", "threads"});
    const auto threads = config.scan.threads;
    config.scan = scan_config_from_toml(text);
    config.scan.threads = threads;
    if (auto v = get<std::int64_t>(*scan, "scan", "threads")) {
      if (*v < 0) config_error("[scan] threads must not be negative");
      config.scan.threads = static_cast<unsigned>(*v);
    }
  }
  if (const auto* llm = doc["llm"].as_table()) {
    reject_unknown(*llm, "llm", {"backend", "base_url", "model", "context_tokens", "concurrency", "max_attempts",
                                 "timeout_seconds", "mock_context_tokens"});
    if (auto v = get<std::string>(*llm, "llm", "backend")) config.backend = backend_kind(*v, "archrecon.toml");
    if (auto v = get<std::string>(*llm, "llm", "base_url")) config.http.base_url = *v;
    if (auto v = get<std::string>(*llm, "llm", "model")) config.http.model = *v;
    if (auto v = get<std::int64_t>(*llm, "llm", "context_tokens"))
      config.http.context_tokens = positive(*v, "[llm] context_tokens");
    if (auto v = get<std::int64_t>(*llm, "llm", "mock_context_tokens"))
      config.mock_context_tokens = positive(*v, "[llm] mock_context_tokens");
    if (auto v = get<std::int64_t>(*llm, "llm", "concurrency"))
      config.concurrency = static_cast<unsigned>(positive(*v, "[llm] concurrency"));
    if (auto v = get<std::int64_t>(*llm, "llm", "max_attempts"))
      config.max_attempts = static_cast<int>(positive(*v, "[llm] max_attempts"));
    if (auto v = get<std::int64_t>(*llm, "llm", "timeout_seconds"))
      config.http.timeout = std::chrono::seconds(positive(*v, "[llm] timeout_seconds"));
  }
  if (const auto* readme = doc["readme"].as_table()) {
    reject_unknown(*readme, "readme", {"name", "trace_depth", "nominate_entries", "signals"});
    if (auto v = get<std::string>(*readme, "readme", "name")) config.repo_name = *v;
    if (auto v = get<std::int64_t>(*readme, "readme", "trace_depth"))
      config.trace_depth = static_cast<unsigned>(positive(*v, "[readme] trace_depth"));
    if (auto v = get<bool>(*readme, "readme", "nominate_entries")) config.nominate_entries = *v;
    if (auto v = get<std::string>(*readme, "readme", "signals")) config.signals = *v;
  }
  if (const auto* grouping = doc["grouping"].as_table()) {
    reject_unknown(*grouping, "grouping", {"max_tokens", "overlap_rate", "by_summary"});
    if (auto v = get<std::int64_t>(*grouping, "grouping", "max_tokens"))
      config.max_tokens = positive(*v, "[grouping] max_tokens");
    if (auto v = get<double>(*grouping, "grouping", "overlap_rate")) {
      if (*v < 0.0 || *v > 0.5) config_error("[grouping] overlap_rate must lie in [0, 0.5]");
      config.overlap_rate = *v;
    }
    if (auto v = get<bool>(*grouping, "grouping", "by_summary")) config.group_by_summary = *v;
  }
  if (const auto* output = doc["output"].as_table()) {
    reject_unknown(*output, "output", {"dir", "json"});
    if (auto v = get<std::string>(*output, "output", "dir")) config.out = *v;
    if (auto v = get<bool>(*output, "output", "json")) config.emit_json = *v;
  }
}

void apply_env(PipelineConfig& config) {
  if (auto v = env("ARCH_LLM_BACKEND")) config.backend = backend_kind(*v, "ARCH_LLM_BACKEND");
  if (auto v = env("ARCH_LLM_BASE_URL")) config.http.base_url = *v;
  if (auto v = env("ARCH_LLM_MODEL")) config.http.model = *v;
  if (auto v = env("ARCH_LLM_API_KEY")) config.http.api_key = *v;
  if (auto v = env("ARCH_LLM_CONTEXT_TOKENS")) config.http.context_tokens = env_positive(*v, "ARCH_LLM_CONTEXT_TOKENS");
  config.concurrency = concurrency_from_env(config.concurrency);
}

PipelineConfig load_pipeline_config(const std::filesystem::path* file) {
  PipelineConfig config;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw Error(ErrorKind::Config, "cannot read config file '" + file->string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_toml(config, buf.str());
  }
  apply_env(config);
  return config;
}

std::optional<Stage> PipelineState::stage() const {
  if (stages.empty()) return std::nullopt;
  return stages.back().stage;
}

std::string PipelineState::config_hash() const { return stages.empty() ? std::string() : stages.back().hash; }

const StageRecord* PipelineState::record(Stage s) const {
  for (const auto& r : stages)
    if (r.stage == s) return &r;
  return nullptr;
}

std::string state_to_json(const PipelineState& state) {
  json stages = json::array();
  for (const auto& r : state.stages) {
    json artifacts = json::array();
    for (const auto& a : r.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}});
    stages.push_back({{"stage", std::string(to_string(r.stage))},
                      {"hash", r.hash},
                      {"artifacts", artifacts},
                      {"diagnostics", r.diagnostics}});
  }
  json doc = {{"version", 1}, {"stages", stages}};
  doc["stage"] = state.stage() ? json(std::string(to_string(*state.stage()))) : json(nullptr);
  doc["config_hash"] = state.config_hash();
  return doc.dump(1) + "\n";
}

PipelineState state_from_json(std::string_view text) {
  constexpr std::string_view what = "state.json";
  const auto doc = detail::parse_json(text, what);
  if (detail::require<int>(doc, "version", what) != 1)
    throw Error(ErrorKind::SchemaViolation, "state.json: unsupported version");
  PipelineState state;
  for (const auto& r : detail::require<json>(doc, "stages", what)) {
    StageRecord rec;
    const auto name = detail::require<std::string>(r, "stage", what);
    const auto stage = stage_from_string(name);
    if (!stage) throw Error(ErrorKind::SchemaViolation, "state.json: unknown stage '" + name + "'");
    if (static_cast<std::size_t>(*stage) != state.stages.size())
      throw Error(ErrorKind::SchemaViolation, "state.json: stage '" + name + "' out of order");
    rec.stage = *stage;
    rec.hash = detail::require<std::string>(r, "hash", what);
    for (const auto& a : detail::require<json>(r, "artifacts", what))
      rec.artifacts.push_back({detail::require<std::string>(a, "path", what), detail::require<std::string>(a, "sha256", what)});
    rec.diagnostics = detail::require<std::vector<std::string>>(r, "diagnostics", what);
    state.stages.push_back(std::move(rec));
  }
  const auto stage = detail::require<json>(doc, "stage", what);
  const bool consistent = state.stages.empty()
                              ? stage.is_null()
                              : stage == json(std::string(to_string(*state.stage())));
  if (!consistent || detail::require<std::string>(doc, "config_hash", what) != state.config_hash())
    throw Error(ErrorKind::SchemaViolation, "state.json: stage and config_hash do not match the stage list");
  return state;
}

}  // namespace archrecon
