#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/prompt.hpp"
#include "archrecon/readme.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace archrecon;

namespace {

RepoModel make_repo(testutil::TempDir& dir, const std::map<std::string, std::string>& files) {
  for (const auto& [path, text] : files) testutil::write_file(dir / path, text);
  return scan_repo(dir.path());
}

std::vector<std::pair<std::string, EntryKind>> summary_of(const std::vector<EntryPoint>& es) {
  std::vector<std::pair<std::string, EntryKind>> out;
  for (const auto& e : es) out.emplace_back(e.file, e.kind);
  return out;
}

// Graph with File nodes for each file and Function nodes "file::name".
struct GraphBuilder {
  ReferenceGraph g;
  GraphBuilder& file(const std::string& path) {
    g.nodes[path] = RefNode{path, Granularity::File, path, path};
    return *this;
  }
  GraphBuilder& fn(const std::string& path, const std::string& name) {
    if (!g.nodes.count(path)) file(path);
    const auto id = path + "::" + name;
    g.nodes[id] = RefNode{id, Granularity::Function, name, path};
    return *this;
  }
  GraphBuilder& edge(const std::string& a, const std::string& b, EdgeKind k = EdgeKind::Call) {
    g.edges.insert(RefEdge{a, b, k});
    return *this;
  }
};

// Independent oracle: enumerate every simple path up to max_depth edges over
// Call/Import edges and rank them by the trace ordering.
std::vector<std::string> oracle_trace(const ReferenceGraph& g, const std::string& file, unsigned max_depth) {
  struct Path {
    std::vector<std::string> nodes;
    std::size_t calls = 0;
  };
  std::vector<Path> all;
  std::vector<Path> stack;
  for (const auto& [id, n] : g.nodes)
    if (n.file == file) stack.push_back({{id}, 0});
  while (!stack.empty()) {
    auto p = stack.back();
    stack.pop_back();
    all.push_back(p);
    if (p.nodes.size() > max_depth) continue;
    for (const auto& [id, n] : g.nodes) {
      if (std::find(p.nodes.begin(), p.nodes.end(), id) != p.nodes.end()) continue;
      const bool call = g.edges.count({p.nodes.back(), id, EdgeKind::Call}) > 0;
      const bool imp = g.edges.count({p.nodes.back(), id, EdgeKind::Import}) > 0;
      if (!call && !imp) continue;
      auto q = p;
      q.nodes.push_back(id);
      q.calls += call;
      stack.push_back(q);
    }
  }
  auto files = [&](const Path& p) {
    std::set<std::string> fs;
    for (const auto& n : p.nodes) fs.insert(g.nodes.at(n).file);
    return fs.size();
  };
  const auto best = std::min_element(all.begin(), all.end(), [&](const Path& a, const Path& b) {
    if (files(a) != files(b)) return files(a) > files(b);
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
    if (a.calls != b.calls) return a.calls > b.calls;
    return a.nodes < b.nodes;
  });
  return best->nodes;
}

EntryPoint entry(const std::string& file) { return EntryPoint{file, EntryKind::MainFunction, "test"}; }

class ScriptedBackend : public Backend {
public:
  std::vector<std::string> replies;  // consumed in order; last one repeats
  std::vector<LlmRequest> seen;
  std::uint64_t context = 128000;

  std::string id() const override { return "scripted"; }
  std::uint64_t context_tokens() const override { return context; }
  std::string complete(const LlmRequest& req) override {
    seen.push_back(req);
    const auto i = std::min(seen.size() - 1, replies.size() - 1);
    return replies[i];
  }
};

std::vector<FileSummary> summaries_for(const std::vector<std::string>& paths) {
  std::vector<FileSummary> out;
  for (const auto& p : paths) out.push_back({p, "Summary of " + p + ".", {}, {}});
  return out;
}

const std::string kValid =
    "# r\n\n## Architecture\n\nx\n\n## Key Modules\n\nx\n\n## Primary Workflows\n\nx\n\n"
    "## Entry Points\n\n- `main.py`: start\n";

}  // namespace

TEST_CASE("one main function gives one MainFunction entry") {
  testutil::TempDir dir("rd");
  const auto repo = make_repo(dir, {{"tool.c", "int helper(void) { return 1; }\nint main(void) { return helper(); }\n"},
                                    {"lib.c", "int lib(void) { return 2; }\n"}});
  const auto graph = build_reference_graph(repo, 1);
  const auto es = find_entry_points(repo, graph);
  REQUIRE(es.size() == 1);
  CHECK(es[0].file == "tool.c");
  CHECK(es[0].kind == EntryKind::MainFunction);
  CHECK_FALSE(es[0].evidence.empty());
}

TEST_CASE("library-only repository has no entries and says so") {
  testutil::TempDir dir("rd");
  const auto repo = make_repo(dir, {{"pkg/core.py", "def f():\n    return 1\n"},
                                    {"pkg/util.py", "from pkg.core import f\n\ndef g():\n    return f()\n"}});
  const auto graph = build_reference_graph(repo, 1);
  std::vector<std::string> diags;
  CHECK(find_entry_points(repo, graph, nullptr, nullptr, &diags).empty());
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("no entry points") != std::string::npos);
}

TEST_CASE("manifest declarations outrank main constructs") {
  testutil::TempDir dir("rd");
  const auto repo = make_repo(dir, {{"package.json", R"({"name": "t", "bin": {"tool": "./bin/tool.js"}})"},
                                    {"bin/tool.js", "const run = require('../lib/run');\nrun();\n"},
                                    {"lib/run.js", "module.exports = function () { return 1; };\n"},
                                    {"app.py", "def main():\n    pass\n\nif __name__ == \"__main__\":\n    main()\n"}});
  const auto graph = build_reference_graph(repo, 1);
  const auto es = find_entry_points(repo, graph);
  CHECK(summary_of(es) == std::vector<std::pair<std::string, EntryKind>>{
                              {"bin/tool.js", EntryKind::ManifestDeclared}, {"app.py", EntryKind::MainFunction}});
  CHECK(es[0].evidence.find("bin.tool") != std::string::npos);
}

TEST_CASE("detectors across languages and manifests") {
  testutil::TempDir dir("rd");
  const auto repo = make_repo(
      dir, {{"go/cmd/srv/main.go", "package main\n\nfunc main() {\n}\n"},
            {"go/lib/lib.go", "package lib\n\nfunc main() {}\n"},
            {"java/App.java", "class App {\n  public static void main(String[] args) {}\n}\n"},
            {"rs/Cargo.toml", "[package]\nname = \"rs\"\nversion = \"0.1.0\"\n"},
            {"rs/src/main.rs", "fn main() {}\n"},
            {"py/pyproject.toml", "[project]\nname = \"p\"\n[project.scripts]\nptool = \"ptool.cli:run\"\n"},
            {"py/src/ptool/cli.py", "def run():\n    pass\n"},
            {"cfg/setup.cfg", "[options.entry_points]\nconsole_scripts =\n    ctool = ctool.main:go\n"},
            {"cfg/ctool/main.py", "def go():\n    pass\n"},
            {"native/CMakeLists.txt", "add_executable(nat src/nat.cpp src/util.cpp)\n"},
            {"native/src/nat.cpp", "int run() { return 0; }\n"},
            {"native/src/util.cpp", "int util() { return 0; }\n"},
            {"web/server.js", "const http = require('http');\nconst app = http.createServer(() => {});\napp.listen(8080);\n"},
            {"scripts/tool.py", "#!/usr/bin/env python3\nprint('hi')\n"},
            {"scripts/args.py", "import argparse\nparser = argparse.ArgumentParser()\n"},
            {"scripts/quiet.py", "def listen(x):\n    return x\n"}});
  const auto graph = build_reference_graph(repo, 1);
  std::vector<std::string> diags;
  const auto es = find_entry_points(repo, graph, nullptr, nullptr, &diags);
  CHECK(summary_of(es) == std::vector<std::pair<std::string, EntryKind>>{
                              {"cfg/ctool/main.py", EntryKind::ManifestDeclared},
                              {"native/src/nat.cpp", EntryKind::ManifestDeclared},
                              {"py/src/ptool/cli.py", EntryKind::ManifestDeclared},
                              {"rs/src/main.rs", EntryKind::ManifestDeclared},
                              {"go/cmd/srv/main.go", EntryKind::MainFunction},
                              {"java/App.java", EntryKind::MainFunction},
                              {"web/server.js", EntryKind::ServerBootstrap},
                              {"scripts/args.py", EntryKind::CliBinary},
                              {"scripts/tool.py", EntryKind::CliBinary}});
  for (const auto& e : es) CHECK(e.evidence.find(e.file) == std::string::npos);
}

TEST_CASE("polyglot fixture entries") {
  const auto repo = scan_repo(testutil::fixture("polyglot"));
  const auto graph = build_reference_graph(repo, 1);
  const auto es = find_entry_points(repo, graph);
  std::set<std::string> files;
  for (const auto& e : es) files.insert(e.file);
  CHECK(files.count("gosvc/cmd/ledgerd/main.go"));
  CHECK(files.count("javalib/src/main/java/com/shop/app/WalletApp.java"));
  CHECK(files.count("native/main.cpp"));
  CHECK(files.count("pyshop/cli.py"));
  CHECK_FALSE(files.count("gosvc/internal/ledger/server.go"));
  for (const auto& e : es) {
    const auto t = trace_downstream(e, graph);
    CHECK(trace_is_valid(t, graph));
  }
}

TEST_CASE("backend nominations are validated against repository paths") {
  testutil::TempDir dir("rd");
  const auto repo = make_repo(dir, {{"run.py", "def go():\n    pass\n"}, {"lib.py", "X = 1\n"}});
  const auto graph = build_reference_graph(repo, 1);
  Gateway mock(std::make_shared<MockBackend>());
  const auto es = find_entry_points(repo, graph, &mock);
  REQUIRE(es.size() == 1);
  CHECK(es[0].file == "run.py");
  CHECK(es[0].kind == EntryKind::LlmNominated);
  CHECK(es[0].evidence.rfind("backend: ", 0) == 0);

  auto scripted = std::make_shared<ScriptedBackend>();
  scripted->replies = {"- `lib.py`: job runner\nghost.py: imaginary\n"};
  Gateway gw(scripted);
  std::vector<std::string> diags;
  const auto es2 = find_entry_points(repo, graph, &gw, nullptr, &diags);
  REQUIRE(es2.size() == 1);
  CHECK(es2[0].file == "lib.py");
  CHECK(es2[0].evidence == "backend: job runner");
  CHECK(std::any_of(diags.begin(), diags.end(), [](const std::string& d) { return d.find("ghost.py") != std::string::npos; }));
}

TEST_CASE("trace follows a three-file chain") {
  GraphBuilder b;
  b.fn("main.py", "main").fn("f.py", "f").fn("g.py", "g");
  b.edge("main.py::main", "f.py::f").edge("f.py::f", "g.py::g");
  b.edge("main.py", "f.py", EdgeKind::Import).edge("f.py", "g.py", EdgeKind::Import);
  const auto t = trace_downstream(entry("main.py"), b.g);
  CHECK(t.path_nodes == std::vector<std::string>{"main.py::main", "f.py::f", "g.py::g"});
  CHECK(trace_is_valid(t, b.g));
}

TEST_CASE("entry without outgoing edges traces to itself") {
  GraphBuilder b;
  b.file("solo.py").fn("other.py", "x").edge("other.py::x", "solo.py");
  const auto t = trace_downstream(entry("solo.py"), b.g);
  CHECK(t.path_nodes == std::vector<std::string>{"solo.py"});
  CHECK_THROWS_AS(trace_downstream(entry("ghost.py"), b.g), Error);
}

TEST_CASE("diamond ties break lexicographically") {
  GraphBuilder b;
  for (auto f : {"a", "b", "c", "d"}) b.file(f);
  b.edge("a", "b", EdgeKind::Import).edge("a", "c", EdgeKind::Import);
  b.edge("b", "d", EdgeKind::Import).edge("c", "d", EdgeKind::Import);
  const auto t = trace_downstream(entry("a"), b.g);
  CHECK(t.path_nodes == std::vector<std::string>{"a", "b", "d"});
  CHECK(t.path_nodes == oracle_trace(b.g, "a", 6));
}

TEST_CASE("depth limit caps the path") {
  GraphBuilder b;
  for (int i = 0; i < 10; ++i) b.file("f" + std::to_string(i));
  for (int i = 0; i + 1 < 10; ++i) b.edge("f" + std::to_string(i), "f" + std::to_string(i + 1), EdgeKind::Import);
  CHECK(trace_downstream(entry("f0"), b.g).path_nodes.size() == 7);
  CHECK(trace_downstream(entry("f0"), b.g, 2).path_nodes.size() == 3);
}

TEST_CASE("property: traces match the brute-force oracle and are valid") {
  std::mt19937 rng(4242);
  for (int round = 0; round < 250; ++round) {
    GraphBuilder b;
    const int files = 2 + static_cast<int>(rng() % 4);
    std::vector<std::string> ids;
    for (int f = 0; f < files; ++f) {
      const auto path = "m" + std::to_string(f) + ".py";
      b.file(path);
      ids.push_back(path);
      const int fns = static_cast<int>(rng() % 3);
      for (int k = 0; k < fns; ++k) {
        b.fn(path, "f" + std::to_string(k));
        ids.push_back(path + "::f" + std::to_string(k));
      }
    }
    const int edges = static_cast<int>(rng() % 14);
    for (int e = 0; e < edges; ++e) {
      const auto& x = ids[rng() % ids.size()];
      const auto& y = ids[rng() % ids.size()];
      if (x == y) continue;
      const auto r = rng() % 3;
      b.edge(x, y, r == 0 ? EdgeKind::Call : r == 1 ? EdgeKind::Import : EdgeKind::Inheritance);
    }
    const unsigned depth = 1 + rng() % 5;
    const auto t = trace_downstream(entry("m0.py"), b.g, depth);
    CHECK(trace_is_valid(t, b.g));
    CHECK(t.path_nodes.size() <= depth + 1);
    CHECK(t.path_nodes == oracle_trace(b.g, "m0.py", depth));
  }
}

TEST_CASE("README from the mock lists every entry once") {
  testutil::TempDir dir("rd");
  const auto repo = make_repo(
      dir, {{"cmd/main.go", "package main\n\nimport \"x/core\"\n\nfunc main() {\n\tcore.Run()\n}\n"},
            {"core/run.go", "package core\n\nfunc Run() {}\n"},
            {"tools/cli.py", "import sys\n\ndef go():\n    pass\n\nif __name__ == \"__main__\":\n    go()\n"}});
  const auto graph = build_reference_graph(repo, 1);
  Gateway gw(std::make_shared<MockBackend>());
  const auto run = summarize_repo(repo, graph, gw);
  const auto es = find_entry_points(repo, graph);
  REQUIRE(es.size() == 2);
  std::vector<Trace> traces;
  for (const auto& e : es) traces.push_back(trace_downstream(e, graph));
  ReadmeOptions opt;
  opt.repo_name = "demo";
  opt.graph = &graph;
  const auto doc = generate_readme(run.summaries, traces, nullptr, gw, opt);
  CHECK(readme_problems(doc.text, es).empty());
  for (const auto s : kReadmeSections)
    CHECK(std::find(doc.sections.begin(), doc.sections.end(), std::string(s)) != doc.sections.end());
  CHECK(doc.text.find("`cmd/main.go` (MainFunction)") != std::string::npos);
  CHECK(doc.text.find("`tools/cli.py` (MainFunction)") != std::string::npos);

  // Empty signals are the same as none, byte for byte.
  CrossRepoSignals empty;
  CHECK(generate_readme(run.summaries, traces, &empty, gw, opt).text == doc.text);
  CHECK(generate_readme(run.summaries, traces, &empty, gw, opt).sections == doc.sections);
}

TEST_CASE("signals render an API table by descending QPS") {
  CrossRepoSignals s;
  s.repos.push_back({"billing", std::string("Billing service.\nHandles invoices."),
                     {{"/invoice", "POST", {"shop"}, 2.5}, {"/price", "GET", {"shop", "cart"}, 10.0}}});
  s.repos.push_back({"auth", std::nullopt, {{"/login", "POST", {}, 7.0}}});
  const auto text = render_signals(s);
  const auto p10 = text.find("| 10.0 |");
  const auto p7 = text.find("| 7.0 |");
  const auto p25 = text.find("| 2.5 |");
  REQUIRE(p10 != std::string::npos);
  REQUIRE(p7 != std::string::npos);
  REQUIRE(p25 != std::string::npos);
  CHECK(p10 < p7);
  CHECK(p7 < p25);
  CHECK(text.find("| billing | GET | /price | shop, cart | 10.0 |") != std::string::npos);
  CHECK(text.find("#### billing") != std::string::npos);
  CHECK(text.find("#### auth") == std::string::npos);
  CHECK(render_signals(CrossRepoSignals{}).empty());

  auto backend = std::make_shared<ScriptedBackend>();
  backend->replies = {kValid};
  Gateway gw(backend);
  generate_readme(summaries_for({"main.py"}), {Trace{entry("main.py"), {"main.py"}}}, &s, gw);
  const auto sections = prompt::parse_sections(backend->seen.at(0).user_content);
  const auto* cross = prompt::find_section(sections, "CROSS-REPOSITORY CONTEXT");
  REQUIRE(cross != nullptr);
  CHECK(cross->body.find("| 10.0 |") < cross->body.find("| 2.5 |"));
  // Traces precede summaries in the model content.
  const auto& user = backend->seen.at(0).user_content;
  CHECK(user.find("<<<TRACES>>>") < user.find("<<<SUMMARIES>>>"));
}

TEST_CASE("README preconditions and repair") {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->replies = {"# r\n\n## Architecture\n\nonly this\n", kValid};
  Gateway gw(backend);
  CHECK_THROWS_AS(generate_readme({}, {}, nullptr, gw), Error);

  std::vector<std::string> diags;
  const std::vector<Trace> traces = {Trace{entry("main.py"), {"main.py"}}};
  const auto doc = generate_readme(summaries_for({"main.py"}), traces, nullptr, gw, {}, &diags);
  CHECK(doc.text == kValid);
  REQUIRE(backend->seen.size() == 2);
  const auto repair = prompt::find_section(prompt::parse_sections(backend->seen[1].user_content), "REPAIR");
  REQUIRE(repair != nullptr);
  CHECK(repair->body.find("missing section 'Key Modules'") != std::string::npos);
  CHECK(diags.size() == 1);

  auto stubborn = std::make_shared<ScriptedBackend>();
  stubborn->replies = {"no headings at all"};
  Gateway gw2(stubborn);
  try {
    generate_readme(summaries_for({"main.py"}), traces, nullptr, gw2);
    FAIL("expected SectionValidationFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SectionValidationFailure);
  }
  CHECK(stubborn->seen.size() == 2);
}

TEST_CASE("summaries are evicted lowest fan-in first") {
  GraphBuilder b;
  for (auto f : {"hub.py", "leaf1.py", "leaf2.py", "main.py"}) b.file(f);
  b.edge("leaf1.py", "hub.py", EdgeKind::Import).edge("leaf2.py", "hub.py", EdgeKind::Import);
  b.edge("main.py", "leaf1.py", EdgeKind::Import);
  std::vector<FileSummary> sums;
  for (auto f : {"hub.py", "leaf1.py", "leaf2.py", "main.py"})
    sums.push_back({f, std::string(f) + " " + std::string(2000, 'x'), {}, {}});

  auto backend = std::make_shared<ScriptedBackend>();
  backend->replies = {kValid};
  backend->context = 4096 + 64 + 1500;  // room for two of the ~500-token summaries
  Gateway gw(backend);
  ReadmeOptions opt;
  opt.graph = &b.g;
  std::vector<std::string> diags;
  generate_readme(sums, {Trace{entry("main.py"), {"main.py"}}}, nullptr, gw, opt, &diags);
  const auto body = prompt::find_section(prompt::parse_sections(backend->seen.at(0).user_content), "SUMMARIES")->body;
  CHECK(body.find("- hub.py:") != std::string::npos);
  CHECK(body.find("- leaf2.py:") == std::string::npos);
  CHECK(body.find("- main.py:") == std::string::npos);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("evicted") != std::string::npos);
}

TEST_CASE("entry section counting respects path boundaries") {
  const std::vector<EntryPoint> es = {entry("cli.py"), entry("pkg/cli.py")};
  const std::string base = "## Architecture\n## Key Modules\n## Primary Workflows\n";
  CHECK(readme_problems(base + "## Entry Points\n- `cli.py` top\n- `pkg/cli.py` nested.\n", es).empty());
  CHECK(readme_problems(base + "## Entry Points\n- cli.py.\n- pkg/cli.py\n## Other\ncli.py\n", es).empty());
  CHECK(readme_problems(base + "## Entry Points\n- cli.py and again cli.py\n- pkg/cli.py\n", es).size() == 1);
  CHECK(readme_problems(base + "## Entry Points\n- pkg/cli.py\n- cli.pyc\n", es).size() == 1);
  CHECK(readme_problems("## Entry Points\n- cli.py\n- pkg/cli.py\n", es).size() == 3);
  CHECK(readme_problems(base + "### entry points:\n- cli.py\n- pkg/cli.py\n", es).empty());
}

TEST_CASE("signals, entries and traces serialize") {
  const auto s = signals_from_json(R"({"version": 1, "repos": [
      {"name": "a", "doc_text": "Docs.", "apis": [{"endpoint": "/x", "method": "GET", "callers": ["b"], "qps": 2.5}]},
      {"name": "b"}]})");
  REQUIRE(s.repos.size() == 2);
  CHECK(s.repos[0].apis[0].qps == 2.5);
  CHECK(signals_from_json(signals_to_json(s)) == s);
  CHECK(signals_from_json(R"({"version": 1, "repos": []})").empty());
  CHECK(signals_from_json(R"({"version": 1})").empty());
  CHECK_THROWS_AS(signals_from_json(R"({"repos": []})"), Error);
  CHECK_THROWS_AS(signals_from_json(R"({"version": 1, "repos": [{"name": "a"}, {"name": "a"}]})"), Error);
  CHECK_THROWS_AS(signals_from_json(
                      R"({"version": 1, "repos": [{"name": "a", "apis": [{"endpoint": "/", "qps": -1}]}]})"),
                  Error);

  const std::vector<EntryPoint> es = {{"a.py", EntryKind::CliBinary, "why"}, {"b.go", EntryKind::ManifestDeclared, ""}};
  CHECK(entries_from_json(entries_to_json(es)) == es);
  const std::vector<Trace> ts = {{es[0], {"a.py", "a.py::f"}}};
  CHECK(traces_from_json(traces_to_json(ts)) == ts);
  CHECK_THROWS_AS(entries_from_json(R"({"version": 1, "entries": [{"file": "a", "kind": "Nope", "evidence": ""}]})"),
                  Error);
}
