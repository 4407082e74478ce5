#include <random>
#include <set>

#include "archrecon/diagram.hpp"
#include "archrecon/error.hpp"
#include "diagram_gen.hpp"
#include "doctest.h"

using namespace archrecon;

namespace {

std::set<std::string> ids_of(const ArchDiagram& d) {
  std::set<std::string> out;
  for (const auto& [id, n] : d.nodes) out.insert(id);
  return out;
}

}  // namespace

TEST_CASE("normalize_id") {
  CHECK(normalize_id("Auth Service") == "auth_service");
  CHECK(normalize_id("  api//v2--handlers ") == "api_v2_handlers");
  CHECK(normalize_id("src/core.py") == "src_core_py");
  CHECK(normalize_id("End") == "end_");
  CHECK(normalize_id("end_") == "end_");
  CHECK(normalize_id("数据").rfind("n_", 0) == 0);
  CHECK(normalize_id("数据") != normalize_id("模型"));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto raw = testutil::random_label(rng);
    const auto once = normalize_id(raw);
    CHECK(normalize_id(once) == once);
  }
}

TEST_CASE("empty diagram serializes to the bare header") {
  CHECK(to_mermaid(ArchDiagram{}) == "flowchart TD\n");
  CHECK(parse_mermaid("flowchart TD\n") == ArchDiagram{});
}

TEST_CASE("one layer with a call edge") {
  ArchDiagram d;
  d.add_layer("core", "Core");
  d.add_node("b", "B", "core");
  d.add_node("a", "A", "core");
  d.add_edge("a", "b", LinkKind::Call);
  CHECK(to_mermaid(d) ==
        "flowchart TD\n"
        "  subgraph core[\"Core\"]\n"
        "    a[\"A\"]\n"
        "    b[\"B\"]\n"
        "  end\n"
        "  a --> b\n");
}

TEST_CASE("edge kinds, labels, file nodes and subviews") {
  ArchDiagram inner;
  inner.add_layer("steps", "Steps");
  inner.add_node("load", "Load", "steps");
  inner.add_node("emit", "Emit", "steps");
  inner.add_edge("load", "emit", LinkKind::Data);

  ArchDiagram d;
  d.add_layer("app", "App");
  d.add_node("main", "main.py", "app", NodeKind::File);
  d.add_node("pipeline", "Pipeline", "app", NodeKind::Subview);
  d.add_node("cache", "Cache", "app", NodeKind::Subview);
  d.subviews["pipeline"] = inner;
  d.add_edge("main", "pipeline", LinkKind::Dependency, "runs");
  d.add_edge("main", "pipeline", LinkKind::Call);
  d.add_edge("pipeline", "cache", LinkKind::Data, "a|b");
  const auto text = to_mermaid(d);
  CHECK(text ==
        "flowchart TD\n"
        "  subgraph app[\"App\"]\n"
        "    cache[\"Cache\"]:::subview\n"
        "    main[\"main.py\"]:::file\n"
        "    subgraph pipeline[\"Pipeline\"]\n"
        "      subgraph steps[\"Steps\"]\n"
        "        emit[\"Emit\"]\n"
        "        load[\"Load\"]\n"
        "      end\n"
        "      load -.-> emit\n"
        "    end\n"
        "  end\n"
        "  main --> pipeline\n"
        "  main ==>|runs| pipeline\n"
        "  pipeline -.->|a#124;b| cache\n");
  CHECK(parse_mermaid(text) == d);
}

TEST_CASE("parser tolerates hand-written variations") {
  std::vector<std::string> diags;
  const auto d = parse_mermaid(
      "Here is the diagram:\n"
      "```mermaid\n"
      "graph LR\n"
      "  %% comment\n"
      "  classDef hot fill:#f00\n"
      "  subgraph Backend [Backend Services]\n"
      "    direction TB\n"
      "    API(Public API) --> DB[(Main DB)];\n"
      "    API -- reads --> Cache{Cache}\n"
      "  end\n"
      "  Web[Web UI] -.-> API & Cache\n"
      "  Web ==>\n"
      "  Orphan\n"
      "```\n",
      &diags);
  CHECK(diagram_problems(d).empty());
  CHECK(ids_of(d) == std::set<std::string>{"api", "cache", "db", "orphan", "web"});
  CHECK(d.nodes.at("api").label == "Public API");
  CHECK(d.nodes.at("db").label == "Main DB");
  CHECK(d.nodes.at("api").layer_id == "backend");
  CHECK(d.nodes.at("web").layer_id == "default");
  CHECK(d.nodes.at("orphan").layer_id == "default");
  REQUIRE(d.layers.size() == 2);
  CHECK(d.layers[0] == Layer{"backend", "Backend Services"});
  CHECK(d.layers[1].id == "default");
  CHECK(d.edges.count({"api", "db", LinkKind::Call}));
  CHECK(d.edges.at({"api", "cache", LinkKind::Call}) == "reads");
  CHECK(d.edges.count({"web", "api", LinkKind::Data}));
  CHECK(d.edges.count({"web", "cache", LinkKind::Data}));
  CHECK(d.edges.size() == 4);
  // Prose before the header, the classDef and the dangling arrow.
  CHECK(diags.size() == 3);
}

TEST_CASE("edge to an undeclared node declares it with its id as label") {
  const auto d = parse_mermaid("flowchart TD\n  subgraph l[\"L\"]\n    a[\"A\"]\n  end\n  a --> ghost\n");
  REQUIRE(d.nodes.count("ghost"));
  CHECK(d.nodes.at("ghost").label == "ghost");
  CHECK(d.nodes.at("ghost").layer_id == "default");
  CHECK(diagram_problems(d).empty());
}

TEST_CASE("later explicit declaration overrides an implicit one") {
  const auto d = parse_mermaid(
      "flowchart TD\n  a --> b\n  subgraph l[\"L\"]\n    b[\"Bee\"]:::file\n  end\n");
  CHECK(d.nodes.at("b").layer_id == "l");
  CHECK(d.nodes.at("b").label == "Bee");
  CHECK(d.nodes.at("b").kind == NodeKind::File);
  CHECK(d.nodes.at("a").layer_id == "default");
}

TEST_CASE("non-mermaid text is a syntax error") {
  CHECK_THROWS_AS(parse_mermaid("I could not produce a diagram."), Error);
  try {
    parse_mermaid("digraph { a -> b }");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MermaidSyntax);
  }
}

TEST_CASE("unclosed subgraph is closed at end of input") {
  std::vector<std::string> diags;
  const auto d = parse_mermaid("flowchart TD\nsubgraph x[\"X\"]\n  n1\n", &diags);
  CHECK(d.nodes.at("n1").layer_id == "x");
  CHECK(diags.size() == 1);
}

TEST_CASE("merge: disjoint parts") {
  ArchDiagram a, b;
  a.add_layer("l", "L");
  a.add_node("a", "A", "l");
  b.add_layer("l", "L");
  b.add_node("b", "B", "l");
  const auto m = merge_diagrams({{0, a}, {1, b}});
  CHECK(ids_of(m) == std::set<std::string>{"a", "b"});
  CHECK(m.edges.empty());
  CHECK(m.layers.size() == 1);
}

TEST_CASE("merge: layer conflict goes to the part with the higher degree") {
  ArchDiagram p1, p2;
  p1.add_layer("l1", "Services");
  p1.add_node("auth", "Auth", "l1");
  for (const char* peer : {"x", "y", "z"}) {
    p1.add_node(peer, peer, "l1");
    p1.add_edge(peer, "auth");
  }
  p2.add_layer("l2", "Infra");
  p2.add_node("auth", "Auth service", "l2");
  p2.add_node("w", "w", "l2");
  p2.add_edge("auth", "w", LinkKind::Dependency);

  for (auto order : {0, 1}) {
    std::vector<PartialDiagram> parts = {{0, p1}, {1, p2}};
    if (order) std::swap(parts[0], parts[1]);
    const auto m = merge_diagrams(parts);
    CHECK(m.nodes.at("auth").layer_id == "l1");
    CHECK(m.nodes.at("auth").label == "Auth service");
    CHECK(m.nodes.size() == 5);
    CHECK(m.edges.size() == 4);
    CHECK(diagram_problems(m).empty());
  }
}

TEST_CASE("merge: degree tie goes to the lower group index, label tie to the first part") {
  ArchDiagram p1, p2;
  p1.add_layer("l1", "L1");
  p1.add_node("n", "abc", "l1");
  p2.add_layer("l2", "L2");
  p2.add_node("n", "xyz", "l2");
  const auto m = merge_diagrams({{5, p2}, {3, p1}});
  CHECK(m.nodes.at("n").layer_id == "l1");
  CHECK(m.nodes.at("n").label == "xyz");
  CHECK(m.layers.front().id == "l2");
}

TEST_CASE("merge: subviews merge recursively") {
  ArchDiagram s1, s2;
  s1.add_layer("s", "S");
  s1.add_node("p", "P", "s");
  s2.add_layer("s", "S");
  s2.add_node("q", "Q", "s");
  ArchDiagram a, b;
  a.add_layer("l", "L");
  a.add_node("v", "V", "l", NodeKind::Subview);
  a.subviews["v"] = s1;
  b.add_layer("l", "L");
  b.add_node("v", "V", "l", NodeKind::Module);
  b.add_node("v2", "V2", "l", NodeKind::Subview);
  b.subviews["v"] = s2;
  b.nodes["v"].kind = NodeKind::Subview;
  const auto m = merge_diagrams({{0, a}, {1, b}});
  REQUIRE(m.subviews.count("v"));
  CHECK(ids_of(*m.subviews.at("v")) == std::set<std::string>{"p", "q"});
  CHECK(diagram_problems(m).empty());
}

TEST_CASE("json round trip and validation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto d = testutil::random_diagram(rng);
    CHECK(diagram_from_json(diagram_to_json(d)) == d);
  }
  CHECK_THROWS_AS(diagram_from_json(R"({"version":1,"layers":[],"nodes":[{"id":"a","label":"a","layer":"nope","kind":"module"}],"edges":[]})"),
                  Error);
  CHECK_THROWS_AS(diagram_from_json(R"({"version":2,"layers":[],"nodes":[],"edges":[]})"), Error);
}

TEST_CASE("property: random diagrams round trip, merge idempotently, union ids") {
  std::mt19937_64 rng(2024);
  int with_subviews = 0, with_labels = 0;
  for (int i = 0; i < 300; ++i) {
    const auto d = testutil::random_diagram(rng);
    REQUIRE(diagram_problems(d).empty());
    with_subviews += !d.subviews.empty();
    for (const auto& [k, label] : d.edges) with_labels += !label.empty();
    const auto text = to_mermaid(d);
    std::vector<std::string> diags;
    const auto back = parse_mermaid(text, &diags);
    CHECK(back == d);
    CHECK(diags.empty());
    CHECK(text.back() == '\n');
    CHECK(text.substr(text.size() - 2) != "\n\n");

    CHECK(merge_diagrams({{0, d}, {1, d}}) == d);
    CHECK(merge_diagrams({{0, d}}) == d);

    const auto e = testutil::random_diagram(rng);
    const auto m = merge_diagrams({{0, d}, {1, e}});
    auto expect = ids_of(d);
    for (const auto& id : ids_of(e)) expect.insert(id);
    CHECK(ids_of(m) == expect);
    CHECK(diagram_problems(m).empty());
    CHECK(merge_diagrams({{0, m}, {1, m}}) == m);
    const auto swapped = merge_diagrams({{1, e}, {0, d}});
    CHECK(ids_of(swapped) == ids_of(m));
    std::set<LinkKey> ek, sk;
    for (const auto& [k, v] : m.edges) ek.insert(k);
    for (const auto& [k, v] : swapped.edges) sk.insert(k);
    CHECK(ek == sk);
  }
  // The generator must actually reach the nested and labelled cases.
  CHECK(with_subviews > 30);
  CHECK(with_labels > 100);
}
