#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/architect.hpp"
#include "archrecon/gateway.hpp"
#include "archrecon/grouper.hpp"
#include "archrecon/readme.hpp"
#include "archrecon/ref_index.hpp"
#include "archrecon/repo_model.hpp"
#include "archrecon/summarizer.hpp"

namespace archrecon {

enum class Stage { Scanned, Indexed, Summarized, ReadmeDone, DiagramsDone };

inline constexpr Stage kAllStages[] = {Stage::Scanned, Stage::Indexed, Stage::Summarized,
                                       Stage::ReadmeDone, Stage::DiagramsDone};

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view name);

enum class BackendKind { Mock, Http };

struct PipelineConfig {
  std::filesystem::path repo;
  std::filesystem::path out = "archrecon-out";
  ScanConfig scan;

  BackendKind backend = BackendKind::Http;
  HttpBackendConfig http;
  std::uint64_t mock_context_tokens = 128000;
  unsigned concurrency = 4;
  int max_attempts = 5;

  std::string repo_name;  // defaults to the repository directory name
  unsigned trace_depth = 6;
  bool nominate_entries = true;
  std::filesystem::path signals;  // empty: no cross-repository signals

  std::optional<std::uint64_t> max_tokens;  // default: half the context
  double overlap_rate = kDefaultOverlapRate;
  bool group_by_summary = true;

  bool emit_json = false;
  bool resume = false;
};

// Applies an archrecon.toml document ([scan], [llm], [readme], [grouping],
// [output]). Unknown keys inside those tables throw Error{Config}.
void apply_config_toml(PipelineConfig& config, std::string_view text);

// Applies ARCH_LLM_BACKEND (mock|http), ARCH_LLM_BASE_URL, ARCH_LLM_MODEL,
// ARCH_LLM_API_KEY, ARCH_LLM_CONTEXT_TOKENS and ARCH_LLM_CONCURRENCY.
void apply_env(PipelineConfig& config);

// Defaults, then `file` (when given), then the environment. Command-line
// flags are applied by the caller on top.
PipelineConfig load_pipeline_config(const std::filesystem::path* file);

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;

  bool operator==(const Artifact&) const = default;
};

struct StageRecord {
  Stage stage = Stage::Scanned;
  std::string hash;  // chained: covers this stage's settings and all earlier ones
  std::vector<Artifact> artifacts;
  std::vector<std::string> diagnostics;

  bool operator==(const StageRecord&) const = default;
};

// Checkpoint kept at <out>/.archrecon/state.json. `stages` holds the
// completed stages in order; stage and config_hash mirror the last one.
struct PipelineState {
  std::vector<StageRecord> stages;

  std::optional<Stage> stage() const;
  std::string config_hash() const;
  const StageRecord* record(Stage s) const;

  bool operator==(const PipelineState&) const = default;
};

std::string state_to_json(const PipelineState& state);
PipelineState state_from_json(std::string_view text);

// Runs the stages against one output directory. Each stage reads the
// artifacts of the previous ones from disk, so a stage can run on its own
// once its predecessors have completed.
class Pipeline {
public:
  // `backend` overrides the configured one (tests, embedding).
  explicit Pipeline(PipelineConfig config, std::shared_ptr<Backend> backend = nullptr);

  // All stages in order. With config.resume, completed stages whose hash
  // matches and whose artifacts load cleanly are skipped.
  void run();

  void scan();
  void index();
  void summarize();
  void readme();
  // Plans groups from the current artifacts and writes groups.json.
  GroupPlan group();
  // Group, architect and merge. With reuse_groups, a groups.json left by
  // group() is used when it still covers the repository.
  void diagrams(bool reuse_groups = false);

  const PipelineState& state() const { return state_; }
  const PipelineConfig& config() const { return config_; }
  // "stage: ran" / "stage: skipped" lines in execution order.
  const std::vector<std::string>& events() const { return events_; }
  std::uint64_t budget() const;

  std::filesystem::path work_dir() const;
  std::filesystem::path readme_path() const;
  std::filesystem::path diagram_path() const;

private:
  enum class Step { Run, Skip };

  Step step(Stage s);
  void execute(Stage s, const std::function<void(StageRecord&)>& body);
  std::string stage_hash(Stage s) const;
  std::string chain_hash(Stage s, const std::string& settings) const;
  std::string own_settings(Stage s) const;
  std::string diagram_settings(std::uint64_t budget, double overlap_rate) const;
  std::uint64_t context_tokens() const;
  // Why a completed stage's artifacts cannot be reused, if they cannot.
  std::optional<std::string> artifact_problem(const StageRecord& rec) const;
  void require_stage(Stage s, std::string_view command) const;
  void write_artifact(StageRecord& rec, const std::string& rel, std::string_view content);
  std::string read_artifact(const std::string& rel) const;
  void save_state() const;
  void write_diagnostics_log() const;
  Gateway& gateway();

  PipelineConfig config_;
  std::shared_ptr<Backend> backend_;
  bool injected_backend_ = false;
  std::unique_ptr<Gateway> gateway_;
  std::optional<CrossRepoSignals> signals_;
  std::string signals_bytes_;
  PipelineState state_;
  std::vector<std::string> events_;
};

}  // namespace archrecon
