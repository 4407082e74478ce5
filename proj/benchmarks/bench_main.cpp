#include <benchmark/benchmark.h>

#include <random>

#include "archrecon/diagram.hpp"
#include "archrecon/gateway.hpp"
#include "archrecon/grouper.hpp"
#include "archrecon/ref_index.hpp"
#include "archrecon/summarizer.hpp"
#include "diagram_gen.hpp"
#include "synth_repo.hpp"
#include "test_util.hpp"

using namespace archrecon;

namespace {

RepoModel random_repo(std::size_t n) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> size(20, 4000);
  RepoModel repo;
  for (std::size_t i = 0; i < n; ++i) {
    SourceFile f;
    f.path = "src/f" + std::to_string(i) + ".py";
    f.token_count = size(rng);
    repo.total_tokens += f.token_count;
    repo.files.push_back(std::move(f));
  }
  return repo;
}

// One synthetic repository per size, scanned once and kept for the process.
const RepoModel& synthetic(std::size_t files) {
  static std::map<std::size_t, std::pair<std::unique_ptr<testutil::TempDir>, RepoModel>> cache;
  auto it = cache.find(files);
  if (it == cache.end()) {
    auto dir = std::make_unique<testutil::TempDir>("bench");
    testutil::write_synthetic_repo(dir->path(), files, 3);
    auto repo = scan_repo(dir->path());
    it = cache.emplace(files, std::make_pair(std::move(dir), std::move(repo))).first;
  }
  return it->second.second;
}

void BM_PlanGroups(benchmark::State& state) {
  const auto repo = random_repo(static_cast<std::size_t>(state.range(0)));
  const auto budget = std::max<std::uint64_t>(repo.total_tokens / 16, 64000);
  for (auto _ : state) benchmark::DoNotOptimize(plan_groups(repo, budget));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PlanGroups)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BuildReferenceGraph(benchmark::State& state) {
  const auto& repo = synthetic(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_reference_graph(repo));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildReferenceGraph)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MermaidRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto d = testutil::random_diagram(rng, 2, 64);
  for (auto _ : state) benchmark::DoNotOptimize(parse_mermaid(to_mermaid(d)));
}
BENCHMARK(BM_MermaidRoundTrip);

void BM_MergeDiagrams(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::vector<PartialDiagram> parts;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i)
    parts.push_back({i, testutil::random_diagram(rng, 2, 64)});
  for (auto _ : state) benchmark::DoNotOptimize(merge_diagrams(parts));
}
BENCHMARK(BM_MergeDiagrams)->Arg(2)->Arg(16);

void BM_SummarizeMock(benchmark::State& state) {
  const auto& repo = synthetic(static_cast<std::size_t>(state.range(0)));
  const auto graph = build_reference_graph(repo);
  Gateway gateway(std::make_shared<MockBackend>());
  for (auto _ : state) benchmark::DoNotOptimize(summarize_repo(repo, graph, gateway));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SummarizeMock)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
