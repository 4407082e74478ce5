#include <algorithm>
#include <functional>
#include <optional>
#include <random>

#include "archrecon/error.hpp"
#include "archrecon/repo_model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace archrecon;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::vector<std::string> paths(const RepoModel& repo) {
  std::vector<std::string> out;
  for (auto& f : repo.files) out.push_back(f.path);
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Precondition;
}

}  // namespace

TEST_CASE("token_estimate is the byte count over four, rounded up") {
  CHECK(token_estimate("") == 0);
  CHECK(token_estimate("abcdefgh") == 2);
  CHECK(token_estimate("abcdefghij") == 3);
  CHECK(token_estimate("a") == 1);
  std::string s;
  std::uint64_t prev = 0;
  for (int i = 0; i < 200; ++i) {
    s += static_cast<char>('a' + i % 26);
    CHECK(token_estimate(s) >= prev);
    prev = token_estimate(s);
  }
}

TEST_CASE("scan orders files depth-first with sorted siblings") {
  TempDir dir("scan");
  write_file(dir / "b.py", "x = 1\n");
  write_file(dir / "a/n.py", "y = 2\n");
  write_file(dir / "a/m.py", "z = 3\n");
  write_file(dir / "README.md", "# not source\n");
  auto repo = scan_repo(dir.path());
  CHECK(paths(repo) == std::vector<std::string>{"a/m.py", "a/n.py", "b.py"});
  CHECK(repo.files[0].language == Language::Python);
  CHECK(repo.total_tokens == 6);
}

TEST_CASE("empty and missing roots") {
  TempDir dir("empty");
  CHECK(kind_of([&] { scan_repo(dir.path()); }) == ErrorKind::EmptyRepo);
  CHECK(kind_of([&] { scan_repo(dir / "missing"); }) == ErrorKind::Io);
}

TEST_CASE("default excludes, binary files and language detection") {
  TempDir dir("excl");
  write_file(dir / "src/main.go", "package main\n");
  write_file(dir / "node_modules/lib/index.js", "module.exports = 1;\n");
  write_file(dir / ".git/hooks/x.py", "print(1)\n");
  write_file(dir / "build/gen.c", "int x;\n");
  write_file(dir / "src/blob.c", std::string("ab\0cd", 5));
  write_file(dir / "src/bad.py", "\xff\xfe bad utf8");
  write_file(dir / "conf/app.yaml", "a: 1\n");
  write_file(dir / "inc/x.hpp", "#pragma once\n");
  write_file(dir / "web/app.tsx", "export {};\n");
  auto repo = scan_repo(dir.path());
  CHECK(paths(repo) ==
        std::vector<std::string>{"conf/app.yaml", "inc/x.hpp", "src/main.go", "web/app.tsx"});
  CHECK(repo.find("conf/app.yaml")->language == Language::Yaml);
  CHECK(repo.find("inc/x.hpp")->language == Language::Cpp);
  CHECK(repo.find("web/app.tsx")->language == Language::TypeScript);
  CHECK(repo.diagnostics.size() == 2);
}

TEST_CASE("scan config from TOML and JSON") {
  auto toml = scan_config_from_toml(R"(
[scan]
include_extensions = [".py"]
exclude_globs = ["tests"]
token_counter = "words"
)");
  CHECK(toml.include_extensions == std::vector<std::string>{".py"});
  CHECK(toml.exclude_globs == std::vector<std::string>{"tests"});
  CHECK(toml.token_counter == "words");
  auto json = scan_config_from_json(R"({"include_extensions": [".go"], "exclude_globs": []})");
  CHECK(json.include_extensions == std::vector<std::string>{".go"});
  CHECK(json.exclude_globs.empty());
  CHECK_THROWS_AS(scan_config_from_json("{"), Error);
  CHECK_THROWS_AS(scan_config_from_toml("token_counter = \"nope\""), Error);

  TempDir dir("cfg");
  write_file(dir / "a.py", "a\n");
  write_file(dir / "tests/t.py", "t\n");
  write_file(dir / "b.go", "package b\n");
  auto repo = scan_repo(dir.path(), toml);
  CHECK(paths(repo) == std::vector<std::string>{"a.py"});
}

TEST_CASE("path_excluded matches whole paths and components") {
  CHECK(path_excluded("a/node_modules/x.js", {"node_modules"}));
  CHECK(path_excluded("dist/app.min.js", {"*.min.js"}));
  CHECK(path_excluded("gen/x_pb.py", {"gen/*_pb.py"}));
  CHECK_FALSE(path_excluded("src/app.js", {"node_modules", "*.min.js"}));
}

TEST_CASE("1000-file tree: totals match an independent sum") {
  TempDir dir("big");
  std::mt19937 rng(3);
  std::uint64_t expect = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string rel = "d" + std::to_string(i % 17) + "/s" + std::to_string(i % 5) + "/f" +
                            std::to_string(i) + ".py";
    std::string body(static_cast<std::size_t>(rng() % 300), 'x');
    write_file(dir / rel, body);
    expect += (body.size() + 3) / 4;
  }
  auto repo = scan_repo(dir.path());
  CHECK(repo.files.size() == 1000);
  CHECK(repo.total_tokens == expect);
  std::uint64_t sum = 0;
  for (auto& f : repo.files) sum += f.token_count;
  CHECK(sum == repo.total_tokens);
}

TEST_CASE("property: order is independent of creation order and rescans are identical") {
  std::vector<std::string> rels = {"z.py", "a/b/c.py", "a/a.py", "m/x.go", "m/y/z.go", "B.py", "a/b.py"};
  std::mt19937 rng(11);
  std::optional<RepoModel> first;
  for (int round = 0; round < 8; ++round) {
    std::shuffle(rels.begin(), rels.end(), rng);
    TempDir dir("perm");
    for (auto& r : rels) write_file(dir / r, "content of " + r + "\n");
    auto repo = scan_repo(dir.path());
    repo.root_name.clear();
    if (!first) {
      first = repo;
    } else {
      CHECK(repo == *first);
    }
    auto again = scan_repo(dir.path());
    again.root_name.clear();
    CHECK(repo_to_json(again) == repo_to_json(repo));
  }
  CHECK(paths(*first) ==
        std::vector<std::string>{"B.py", "a/a.py", "a/b/c.py", "a/b.py", "m/x.go", "m/y/z.go", "z.py"});
}

TEST_CASE("property: splitting a file costs at most one token per split") {
  std::mt19937 rng(5);
  for (int round = 0; round < 500; ++round) {
    std::string text(rng() % 500, 'q');
    const auto cut = text.empty() ? 0 : rng() % text.size();
    const auto whole = token_estimate(text);
    const auto parts = token_estimate(text.substr(0, cut)) + token_estimate(text.substr(cut));
    CHECK(parts + 1 >= whole);
    CHECK(parts >= whole);
  }
}

TEST_CASE("repo JSON round trip and validation") {
  TempDir dir("json");
  write_file(dir / "pkg/a.py", "import b\n");
  write_file(dir / "package.json", R"({"name": "x"})");
  auto repo = scan_repo(dir.path());
  CHECK(repo.manifests.size() == 1);
  CHECK(repo_from_json(repo_to_json(repo)) == repo);
  auto text = repo_to_json(repo);
  auto bad = text;
  bad.replace(bad.find("\"total_tokens\": 3"), 17, "\"total_tokens\": 4");
  CHECK_THROWS_AS(repo_from_json(bad), Error);
  CHECK_THROWS_AS(repo_from_json("[]"), Error);
}
