#include "archrecon/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "archrecon/diagram.hpp"
#include "archrecon/error.hpp"
#include "detail/hash.hpp"
#include "detail/json_util.hpp"

namespace archrecon {

namespace fs = std::filesystem;
using detail::json;
using detail::sha256_hex;

namespace {

constexpr const char* kRepoJson = ".archrecon/repo.json";
constexpr const char* kGraphJson = ".archrecon/graph.json";
constexpr const char* kSummaries = ".archrecon/summaries.jsonl";
constexpr const char* kEntries = ".archrecon/entries.json";
constexpr const char* kTraces = ".archrecon/traces.json";
constexpr const char* kGroups = ".archrecon/groups.json";
constexpr const char* kPartialsDir = ".archrecon/partials";
constexpr const char* kReadmeOut = "README.generated.md";
constexpr const char* kDiagramOut = "architecture.mmd";
constexpr const char* kDiagramJson = "architecture.json";

std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const fs::path& p, std::string_view content) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot write " + p.string() + ": " + ec.message());
}

bool inside(const fs::path& child, const fs::path& parent) {
  auto c = child.begin();
  for (auto p = parent.begin(); p != parent.end(); ++p, ++c) {
    if (p->empty()) continue;  // trailing separator
    if (c == child.end() || *c != *p) return false;
  }
  return true;
}

std::string partial_name(std::size_t index) {
  auto n = std::to_string(index);
  if (n.size() < 3) n.insert(0, 3 - n.size(), '0');
  return std::string(kPartialsDir) + "/group-" + n + ".mmd";
}

// A stored plan is still usable when it covers exactly the repo's files.
bool plan_covers(const GroupPlan& plan, const RepoModel& repo) {
  std::set<std::string> planned;
  for (const auto& g : plan.groups) planned.insert(g.files.begin(), g.files.end());
  std::set<std::string> files;
  for (const auto& f : repo.files) files.insert(f.path);
  return !plan.groups.empty() && planned == files;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)), injected_backend_(backend_ != nullptr) {
  if (config_.out.empty()) throw Error(ErrorKind::Config, "output directory must not be empty");
  if (!config_.repo.empty()) {
    std::error_code ec;
    const auto repo = fs::weakly_canonical(config_.repo, ec);
    const auto out = fs::weakly_canonical(config_.out, ec);
    if (inside(out, repo))
      throw Error(ErrorKind::Config, "output directory " + config_.out.string() +
                                         " lies inside the analyzed repository; choose a directory outside it");
  }
  if (!config_.signals.empty()) {
    auto bytes = slurp(config_.signals);
    if (!bytes) throw Error(ErrorKind::Io, "cannot read signals file " + config_.signals.string());
    try {
      signals_ = signals_from_json(*bytes);
    } catch (const Error& e) {
      throw Error(e.kind(), "signals file " + config_.signals.string() + ": " + e.what());
    }
    signals_bytes_ = std::move(*bytes);
  }
  if (auto text = slurp(work_dir() / "state.json")) {
    try {
      state_ = state_from_json(*text);
    } catch (const Error& e) {
      events_.push_back(std::string("state: ignoring unreadable checkpoint (") + e.what() + ")");
    }
  }
}

fs::path Pipeline::work_dir() const { return config_.out / ".archrecon"; }
fs::path Pipeline::readme_path() const { return config_.out / kReadmeOut; }
fs::path Pipeline::diagram_path() const { return config_.out / kDiagramOut; }

std::uint64_t Pipeline::context_tokens() const {
  if (backend_) return backend_->context_tokens();
  return config_.backend == BackendKind::Mock ? config_.mock_context_tokens : config_.http.context_tokens;
}

std::uint64_t Pipeline::budget() const { return config_.max_tokens.value_or(context_tokens() / 2); }

Gateway& Pipeline::gateway() {
  if (gateway_) return *gateway_;
  GatewayConfig gc;
  gc.concurrency = config_.concurrency;
  gc.max_attempts = config_.max_attempts;
  if (!backend_) {
    if (config_.backend == BackendKind::Mock) {
      backend_ = std::make_shared<MockBackend>(config_.mock_context_tokens);
    } else {
      if (config_.http.base_url.empty() || config_.http.model.empty())
        throw Error(ErrorKind::Config,
                    "no LLM backend configured: set ARCH_LLM_BASE_URL and ARCH_LLM_MODEL, fill [llm] in "
                    "archrecon.toml, or use --mock");
      backend_ = std::make_shared<HttpBackend>(config_.http);
      gc.cache_dir = work_dir() / "cache";
    }
  }
  gateway_ = std::make_unique<Gateway>(backend_, gc);
  return *gateway_;
}

std::string Pipeline::own_settings(Stage s) const {
  json j = json::object();
  auto backend_identity = [&] {
    if (injected_backend_) return json{{"id", backend_->id()}, {"model", backend_->model()}, {"context", context_tokens()}};
    if (config_.backend == BackendKind::Mock) return json{{"id", "mock"}, {"context", config_.mock_context_tokens}};
    return json{{"id", "http"},
                {"base_url", config_.http.base_url},
                {"model", config_.http.model},
                {"context", config_.http.context_tokens}};
  };
  switch (s) {
    case Stage::Scanned: {
      std::error_code ec;
      j["repo"] = fs::weakly_canonical(config_.repo, ec).generic_string();
      j["include_extensions"] = config_.scan.include_extensions;
      j["exclude_globs"] = config_.scan.exclude_globs;
      j["token_counter"] = config_.scan.custom_counter ? std::string("custom") : config_.scan.token_counter;
      break;
    }
    case Stage::Indexed:
      break;
    case Stage::Summarized:
      j["backend"] = backend_identity();
      break;
    case Stage::ReadmeDone:
      j["backend"] = backend_identity();
      j["name"] = config_.repo_name;
      j["trace_depth"] = config_.trace_depth;
      j["nominate_entries"] = config_.nominate_entries;
      j["signals"] = signals_ ? json(sha256_hex(signals_bytes_)) : json(nullptr);
      break;
    case Stage::DiagramsDone:
      return diagram_settings(budget(), config_.overlap_rate);
  }
  return j.dump();
}

std::string Pipeline::diagram_settings(std::uint64_t budget, double overlap_rate) const {
  json j = {{"budget", budget},
            {"overlap_rate", overlap_rate},
            {"by_summary", config_.group_by_summary},
            {"json", config_.emit_json}};
  j["backend"] = json::parse(own_settings(Stage::Summarized))["backend"];
  return j.dump();
}

std::string Pipeline::chain_hash(Stage s, const std::string& settings) const {
  std::string prev;
  if (s != Stage::Scanned) {
    const auto* rec = state_.record(static_cast<Stage>(static_cast<int>(s) - 1));
    if (rec) prev = rec->hash;
  }
  return sha256_hex(prev + "\n" + std::string(to_string(s)) + "\n" + settings);
}

std::string Pipeline::stage_hash(Stage s) const { return chain_hash(s, own_settings(s)); }

void Pipeline::write_artifact(StageRecord& rec, const std::string& rel, std::string_view content) {
  write_atomic(config_.out / rel, content);
  rec.artifacts.push_back({rel, sha256_hex(content)});
}

std::string Pipeline::read_artifact(const std::string& rel) const {
  auto text = slurp(config_.out / rel);
  if (!text) throw Error(ErrorKind::Io, "missing artifact " + (config_.out / rel).string());
  return *text;
}

void Pipeline::save_state() const { write_atomic(work_dir() / "state.json", state_to_json(state_)); }

void Pipeline::write_diagnostics_log() const {
  std::string log;
  for (const auto& r : state_.stages)
    for (const auto& d : r.diagnostics) log += "[" + std::string(to_string(r.stage)) + "] " + d + "\n";
  write_atomic(work_dir() / "diagnostics.log", log);
}

std::optional<std::string> Pipeline::artifact_problem(const StageRecord& rec) const {
  for (const auto& a : rec.artifacts) {
    const auto text = slurp(config_.out / a.path);
    if (!text) return a.path + " is missing";
    if (sha256_hex(*text) != a.sha256) return a.path + " was modified";
    try {
      const fs::path p(a.path);
      if (a.path == kRepoJson) repo_from_json(*text);
      else if (a.path == kGraphJson) graph_from_json(*text);
      else if (a.path == kSummaries) summaries_from_jsonl(*text);
      else if (a.path == kEntries) entries_from_json(*text);
      else if (a.path == kTraces) traces_from_json(*text);
      else if (a.path == kGroups) plan_from_json(*text);
      else if (a.path == kDiagramJson) diagram_from_json(*text);
      else if (p.extension() == ".mmd") parse_mermaid(*text);
      else if (a.path == kReadmeOut) {
        const auto problems = readme_problems(*text, entries_from_json(read_artifact(kEntries)));
        if (!problems.empty()) return a.path + ": " + problems.front();
      }
    } catch (const Error& e) {
      return a.path + ": " + e.what();
    }
  }
  return std::nullopt;
}

Pipeline::Step Pipeline::step(Stage s) {
  const auto name = std::string(to_string(s));
  const auto* rec = state_.record(s);
  if (!rec) return Step::Run;
  if (rec->hash != stage_hash(s)) {
    events_.push_back(name + ": settings changed since the checkpoint");
    return Step::Run;
  }
  if (auto problem = artifact_problem(*rec)) {
    events_.push_back(name + ": checkpoint unusable (" + *problem + ")");
    return Step::Run;
  }
  return Step::Skip;
}

void Pipeline::require_stage(Stage s, std::string_view command) const {
  if (!state_.record(s))
    throw Error(ErrorKind::Precondition, "no " + std::string(to_string(s)) + " checkpoint in " + config_.out.string() +
                                             "; run `archrecon " + std::string(command) + "` first");
}

void Pipeline::execute(Stage s, const std::function<void(StageRecord&)>& body) {
  static constexpr std::string_view kCommands[] = {"scan", "index", "summarize", "readme", "diagram"};
  const auto idx = static_cast<std::size_t>(s);
  if (idx > 0) require_stage(static_cast<Stage>(idx - 1), kCommands[idx - 1]);
  state_.stages.resize(idx);
  save_state();

  StageRecord rec;
  rec.stage = s;
  rec.hash = stage_hash(s);
  try {
    body(rec);
  } catch (const Error& e) {
    throw Error(e.kind(), "[" + std::string(kCommands[idx]) + "] " + e.what());
  }
  state_.stages.push_back(std::move(rec));
  save_state();
  write_diagnostics_log();
  events_.push_back(std::string(to_string(s)) + ": ran");
}

void Pipeline::scan() {
  execute(Stage::Scanned, [&](StageRecord& rec) {
    if (config_.repo.empty()) throw Error(ErrorKind::Config, "no repository path given");
    const auto repo = scan_repo(config_.repo, config_.scan);
    write_artifact(rec, kRepoJson, repo_to_json(repo));
    rec.diagnostics = repo.diagnostics;
  });
}

void Pipeline::index() {
  execute(Stage::Indexed, [&](StageRecord& rec) {
    const auto repo = repo_from_json(read_artifact(kRepoJson));
    const auto graph = build_reference_graph(repo, config_.scan.threads);
    write_artifact(rec, kGraphJson, graph_to_json(graph));
    rec.diagnostics = graph.diagnostics;
  });
}

void Pipeline::summarize() {
  execute(Stage::Summarized, [&](StageRecord& rec) {
    const auto repo = repo_from_json(read_artifact(kRepoJson));
    const auto graph = graph_from_json(read_artifact(kGraphJson));
    auto run = summarize_repo(repo, graph, gateway());
    write_artifact(rec, kSummaries, summaries_to_jsonl(run.summaries));
    rec.diagnostics = std::move(run.diagnostics);
  });
}

void Pipeline::readme() {
  execute(Stage::ReadmeDone, [&](StageRecord& rec) {
    const auto repo = repo_from_json(read_artifact(kRepoJson));
    const auto graph = graph_from_json(read_artifact(kGraphJson));
    const auto summaries = summaries_from_jsonl(read_artifact(kSummaries));
    auto& gw = gateway();
    const auto entries =
        find_entry_points(repo, graph, config_.nominate_entries ? &gw : nullptr, &summaries, &rec.diagnostics);
    std::vector<Trace> traces;
    for (const auto& e : entries) traces.push_back(trace_downstream(e, graph, config_.trace_depth));
    write_artifact(rec, kEntries, entries_to_json(entries));
    write_artifact(rec, kTraces, traces_to_json(traces));

    ReadmeOptions options;
    options.repo_name = config_.repo_name.empty() ? repo.root_name : config_.repo_name;
    options.graph = &graph;
    const auto doc = generate_readme(summaries, traces, signals_ ? &*signals_ : nullptr, gw, options, &rec.diagnostics);
    write_artifact(rec, kReadmeOut, doc.text);
  });
}

GroupPlan Pipeline::group() {
  require_stage(Stage::Scanned, "scan");
  const auto repo = repo_from_json(read_artifact(kRepoJson));
  GroupPlan plan;
  if (config_.group_by_summary && state_.record(Stage::Summarized)) {
    const auto summaries = summaries_from_jsonl(read_artifact(kSummaries));
    const auto graph = graph_from_json(read_artifact(kGraphJson));
    const auto weights = partial_weights(summaries, &graph);
    plan = plan_groups(repo, budget(), config_.overlap_rate, &weights);
  } else {
    plan = plan_groups(repo, budget(), config_.overlap_rate);
  }
  write_atomic(config_.out / kGroups, plan_to_json(plan));
  return plan;
}

void Pipeline::diagrams(bool reuse_groups) {
  execute(Stage::DiagramsDone, [&](StageRecord& rec) {
    const auto repo = repo_from_json(read_artifact(kRepoJson));
    std::optional<GroupPlan> plan;
    if (reuse_groups) {
      if (auto text = slurp(config_.out / kGroups)) {
        try {
          plan = plan_from_json(*text);
          if (!plan_covers(*plan, repo)) {
            rec.diagnostics.push_back("groups.json no longer matches the scanned files; planning again");
            plan.reset();
          }
        } catch (const Error& e) {
          rec.diagnostics.push_back(std::string("ignoring groups.json (") + e.what() + ")");
        }
      }
    }
    if (!plan) plan = group();
    write_artifact(rec, kGroups, plan_to_json(*plan));
    rec.hash = chain_hash(Stage::DiagramsDone, diagram_settings(plan->budget, plan->overlap_rate));

    const auto graph = graph_from_json(read_artifact(kGraphJson));
    const auto summaries = summaries_from_jsonl(read_artifact(kSummaries));
    const auto doc = readme_from_text(read_artifact(kReadmeOut));
    std::error_code ec;
    fs::remove_all(config_.out / kPartialsDir, ec);
    const auto parts = generate_partials(*plan, summaries, doc, gateway(), &graph, {}, &rec.diagnostics);
    for (const auto& part : parts) write_artifact(rec, partial_name(part.group_index), to_mermaid(part.diagram));

    const auto merged = merge_diagrams(parts);
    for (const auto& p : diagram_problems(merged)) rec.diagnostics.push_back("merged diagram: " + p);
    write_artifact(rec, kDiagramOut, to_mermaid(merged));
    if (config_.emit_json) write_artifact(rec, kDiagramJson, diagram_to_json(merged));
    else fs::remove(config_.out / kDiagramJson, ec);
  });
}

void Pipeline::run() {
  const std::function<void()> stages[] = {[&] { scan(); }, [&] { index(); }, [&] { summarize(); },
                                          [&] { readme(); }, [&] { diagrams(); }};
  bool reuse = config_.resume;
  for (const auto s : kAllStages) {
    if (reuse && step(s) == Step::Skip) {
      events_.push_back(std::string(to_string(s)) + ": skipped");
      continue;
    }
    reuse = false;
    stages[static_cast<int>(s)]();
  }
}

}  // namespace archrecon
