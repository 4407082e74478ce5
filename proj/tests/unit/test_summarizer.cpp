#include <algorithm>
#include <map>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/prompt.hpp"
#include "archrecon/summarizer.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace archrecon;

namespace {

RepoModel make_repo(testutil::TempDir& dir, const std::map<std::string, std::string>& files) {
  for (const auto& [path, text] : files) testutil::write_file(dir / path, text);
  return scan_repo(dir.path());
}

GatewayConfig no_wait(int attempts = 5) {
  GatewayConfig c;
  c.max_attempts = attempts;
  c.sleeper = [](std::chrono::milliseconds) {};
  return c;
}

// Replies per file path; paths in `failing` always raise a transient error.
class ScriptedBackend : public Backend {
public:
  std::map<std::string, std::string> replies;
  std::set<std::string> failing;

  std::string id() const override { return "scripted"; }
  std::uint64_t context_tokens() const override { return 128000; }
  std::string complete(const LlmRequest& req) override {
    const auto sections = prompt::parse_sections(req.user_content);
    const auto* file = prompt::find_section(sections, "FILE");
    REQUIRE(file != nullptr);
    if (failing.count(file->arg)) throw TransientError("scripted outage");
    const auto it = replies.find(file->arg);
    return it == replies.end() ? "RELATED FILES:\n=== SUMMARY ===\nGeneric.\n" : it->second;
  }
};

const std::map<std::string, std::string> kCallPair = {
    {"a.py", "\"\"\"Helpers.\"\"\"\n\ndef helper():\n    return 1\n\ndef _hidden():\n    return 2\n"},
    {"b.py", "from a import helper\n\n\ndef run():\n    return helper()\n"},
    {"c.py", "# Standalone.\nVALUE = 3\n"},
};

}  // namespace

TEST_CASE("isolated file has no related files") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  Gateway gw(std::make_shared<MockBackend>());
  const auto s = summarize_file(*repo.find("c.py"), graph, gw);
  CHECK(s.related_files.empty());
  CHECK(s.summary.find("Standalone.") != std::string::npos);
}

TEST_CASE("caller lists the callee as related") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  Gateway gw(std::make_shared<MockBackend>());
  const auto b = summarize_file(*repo.find("b.py"), graph, gw);
  CHECK(std::find(b.related_files.begin(), b.related_files.end(), "a.py") != b.related_files.end());
  CHECK(b.exported_symbols == std::vector<std::string>{"run"});
  const auto a = summarize_file(*repo.find("a.py"), graph, gw);
  CHECK(a.exported_symbols == std::vector<std::string>{"helper"});
  CHECK(a.summary == "Helpers. Exports: helper.");
}

TEST_CASE("request carries symbols, edges and candidates") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  const auto req = summary_request(*repo.find("b.py"), graph, 128000);
  CHECK(prompt::task_tag(req.system_prompt) == std::string(prompt::kSummarizeFile));
  const auto sections = prompt::parse_sections(req.user_content);
  const auto* edges = prompt::find_section(sections, "EDGES");
  REQUIRE(edges != nullptr);
  CHECK(edges->body.find("out Call b.py::run -> a.py::helper") != std::string::npos);
  const auto* cands = prompt::find_section(sections, "CANDIDATES");
  REQUIRE(cands != nullptr);
  CHECK(prompt::list_items(cands->body) == std::vector<std::string>{"a.py"});
  CHECK(prompt::find_section(sections, "FILE")->arg == "b.py");
}

TEST_CASE("unknown related names are dropped with a diagnostic") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  auto backend = std::make_shared<ScriptedBackend>();
  backend->replies["b.py"] =
      "RELATED FILES:\n- `a.py`\n- ghost.py\n- b.py\n- a.py\n=== SUMMARY ===\nRuns helpers.\n";
  Gateway gw(backend, no_wait());
  std::vector<std::string> diags;
  const auto s = summarize_file(*repo.find("b.py"), graph, gw, {}, &diags);
  CHECK(s.related_files == std::vector<std::string>{"a.py"});
  CHECK(s.summary == "Runs helpers.");
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("ghost.py") != std::string::npos);
}

TEST_CASE("related files are capped") {
  testutil::TempDir dir("sum");
  std::map<std::string, std::string> files;
  std::string reply = "RELATED FILES:\n";
  for (int i = 0; i < 12; ++i) {
    files["m" + std::to_string(i) + ".py"] = "X = " + std::to_string(i) + "\n";
    reply += "- m" + std::to_string(i) + ".py\n";
  }
  reply += "=== SUMMARY ===\nHub.\n";
  files["hub.py"] = "Y = 0\n";
  const auto repo = make_repo(dir, files);
  const auto graph = build_reference_graph(repo, 1);
  auto backend = std::make_shared<ScriptedBackend>();
  backend->replies["hub.py"] = reply;
  Gateway gw(backend, no_wait());
  const auto s = summarize_file(*repo.find("hub.py"), graph, gw);
  CHECK(s.related_files.size() == 8);
  CHECK(s.related_files.front() == "m0.py");
}

TEST_CASE("reply without the delimiter is taken whole") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  auto backend = std::make_shared<ScriptedBackend>();
  backend->replies["c.py"] = "Just a summary.";
  Gateway gw(backend, no_wait());
  std::vector<std::string> diags;
  const auto s = summarize_file(*repo.find("c.py"), graph, gw, {}, &diags);
  CHECK(s.summary == "Just a summary.");
  CHECK(s.related_files.empty());
  CHECK(diags.size() == 1);
}

TEST_CASE("long summaries are capped at the token limit") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  auto backend = std::make_shared<ScriptedBackend>();
  std::string words;
  for (int i = 0; i < 2000; ++i) words += "word ";
  backend->replies["c.py"] = "RELATED FILES:\n=== SUMMARY ===\n" + words;
  Gateway gw(backend, no_wait());
  const auto s = summarize_file(*repo.find("c.py"), graph, gw);
  CHECK(token_estimate(s.summary) <= 300);
  CHECK(s.summary.size() > 1000);
}

TEST_CASE("unknown file is rejected") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  Gateway gw(std::make_shared<MockBackend>());
  SourceFile ghost{"ghost.py", Language::Python, "x = 1\n", 2};
  CHECK_THROWS_AS(summarize_file(ghost, graph, gw), Error);
}

TEST_CASE("repository summaries follow canonical order and are deterministic") {
  testutil::TempDir dir("sum");
  const auto repo = make_repo(dir, kCallPair);
  const auto graph = build_reference_graph(repo, 1);
  Gateway gw1(std::make_shared<MockBackend>(), no_wait());
  const auto run1 = summarize_repo(repo, graph, gw1);
  std::vector<std::string> paths;
  for (const auto& s : run1.summaries) paths.push_back(s.path);
  CHECK(paths == std::vector<std::string>{"a.py", "b.py", "c.py"});
  CHECK(run1.failures == 0);

  GatewayConfig c = no_wait();
  c.concurrency = 1;
  Gateway gw2(std::make_shared<MockBackend>(), c);
  CHECK(summarize_repo(repo, graph, gw2).summaries == run1.summaries);

  const auto w = summary_weights(run1.summaries);
  CHECK(w.at("a.py") == token_estimate(run1.summaries[0].summary));
}

TEST_CASE("unparseable file is summarized from raw content") {
  testutil::TempDir dir("sum");
  auto files = kCallPair;
  files["broken.py"] = "def (((( class ]]] :::: \n" + std::string(200, '}') + "\n";
  const auto repo = make_repo(dir, files);
  const auto graph = build_reference_graph(repo, 1);
  Gateway gw(std::make_shared<MockBackend>(), no_wait());
  const auto run = summarize_repo(repo, graph, gw);
  const auto it = std::find_if(run.summaries.begin(), run.summaries.end(),
                               [](const FileSummary& s) { return s.path == "broken.py"; });
  REQUIRE(it != run.summaries.end());
  CHECK_FALSE(it->summary.empty());
  const bool noted = std::any_of(run.diagnostics.begin(), run.diagnostics.end(), [](const std::string& d) {
    return d.rfind("broken.py: summarized from raw content", 0) == 0;
  });
  CHECK(noted);
}

TEST_CASE("failed files fall back until the failure share is exceeded") {
  testutil::TempDir dir("sum");
  std::map<std::string, std::string> files;
  for (int i = 0; i < 10; ++i) files["f" + std::to_string(i) + ".py"] = "# File " + std::to_string(i) + ".\n";
  const auto repo = make_repo(dir, files);
  const auto graph = build_reference_graph(repo, 1);

  auto backend = std::make_shared<ScriptedBackend>();
  backend->failing = {"f1.py", "f2.py"};
  Gateway gw(backend, no_wait(1));
  const auto run = summarize_repo(repo, graph, gw);
  CHECK(run.failures == 2);
  CHECK(run.summaries[1].summary == "File 1.");
  CHECK(run.summaries[0].summary == "Generic.");

  backend->failing.insert("f3.py");
  Gateway gw3(backend, no_wait(1));
  try {
    summarize_repo(repo, graph, gw3);
    FAIL("expected TooManyFailures");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyFailures);
  }
}

TEST_CASE("head and tail truncation") {
  std::string text;
  for (int i = 0; i < 1000; ++i) text += "line " + std::to_string(i) + "\n";
  CHECK(truncate_head_tail(text, 100000) == text);
  const auto cut = truncate_head_tail(text, 200);
  CHECK(token_estimate(cut) <= 200 + 16);
  CHECK(cut.rfind("line 0\n", 0) == 0);
  CHECK(cut.find("line 999\n") != std::string::npos);
  CHECK(cut.find("[truncated") != std::string::npos);
  CHECK(cut.find("line 500\n") == std::string::npos);

  // Multibyte content is never split mid-sequence.
  std::string wide;
  for (int i = 0; i < 500; ++i) wide += "\xc3\xa9\xe2\x82\xac";
  const auto w = truncate_head_tail(wide, 50);
  CHECK(w.find("[truncated") != std::string::npos);
  const auto head = w.substr(0, w.find('\n'));
  CHECK(head.size() % 5 == 0);
}

TEST_CASE("oversized files are truncated into the request") {
  testutil::TempDir dir("sum");
  std::string big = "# Big module.\n";
  for (int i = 0; i < 5000; ++i) big += "X" + std::to_string(i) + " = " + std::to_string(i) + "\n";
  const auto repo = make_repo(dir, {{"big.py", big}});
  const auto graph = build_reference_graph(repo, 1);
  const auto req = summary_request(*repo.find("big.py"), graph, 4000);
  CHECK(token_estimate(req.system_prompt) + token_estimate(req.user_content) + 1024 <= 4000);
  Gateway gw(std::make_shared<MockBackend>(4000), no_wait());
  CHECK(summarize_file(*repo.find("big.py"), graph, gw).summary.rfind("Big module.", 0) == 0);
}

TEST_CASE("jsonl round trip and validation") {
  std::vector<FileSummary> in = {{"a.py", "Line one.\nLine \"two\".", {"b.py"}, {"f"}},
                                 {"b.py", "", {}, {}}};
  const auto text = summaries_to_jsonl(in);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(summaries_from_jsonl(text) == in);
  CHECK_THROWS_AS(summaries_from_jsonl("{\"version\":2,\"path\":\"a\"}\n"), Error);
  CHECK_THROWS_AS(summaries_from_jsonl(
                      "{\"version\":1,\"path\":\"a\",\"summary\":\"\",\"related_files\":[\"a\"],"
                      "\"exported_symbols\":[]}\n"),
                  Error);
  CHECK_THROWS_AS(summaries_from_jsonl("not json\n"), Error);
}
