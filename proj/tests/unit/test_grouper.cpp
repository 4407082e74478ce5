#include <algorithm>
#include <cstdint>
#include <numeric>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "archrecon/error.hpp"
#include "archrecon/grouper.hpp"
#include "doctest.h"
#include "group_oracle.hpp"

using namespace archrecon;
using oracle::Frac;
using oracle::oracle_windows;
using oracle::sum_of;

namespace {

using Files = std::vector<std::pair<std::string, std::uint64_t>>;

Files equal_files(std::size_t n, std::uint64_t w = 1) {
  Files out;
  for (std::size_t i = 1; i <= n; ++i) out.emplace_back("f" + std::to_string(i), w);
  return out;
}

struct OraclePlan {
  std::size_t g;
  std::vector<std::vector<std::string>> windows;
};

OraclePlan oracle_plan(const Files& files, std::uint64_t budget, Frac r) {
  std::uint64_t total = 0;
  for (auto& f : files) total += f.second;
  std::size_t g = std::max<std::uint64_t>(1, (total + budget - 1) / budget);
  for (; g <= files.size(); ++g) {
    auto w = oracle_windows(files, g, r);
    bool ok = true;
    for (auto& names : w) ok = ok && sum_of(files, names) <= budget;
    if (ok) return {g, w};
  }
  return {0, {}};
}

void check_against_oracle(const Files& files, std::uint64_t budget) {
  const auto plan = plan_groups(files, budget, 0.10);
  const auto expect = oracle_plan(files, budget, Frac(1, 10));
  REQUIRE(expect.g != 0);
  REQUIRE(plan.group_count == expect.g);
  REQUIRE(plan.groups.size() == expect.g);
  for (std::size_t k = 0; k < expect.g; ++k) CHECK(plan.groups[k].files == expect.windows[k]);
}

std::map<std::string, std::size_t> positions(const Files& files) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < files.size(); ++i) pos[files[i].first] = i;
  return pos;
}

void check_invariants(const Files& files, const GroupPlan& plan) {
  const auto pos = positions(files);
  std::set<std::string> covered;
  for (std::size_t k = 0; k < plan.groups.size(); ++k) {
    const auto& g = plan.groups[k];
    REQUIRE_FALSE(g.files.empty());
    CHECK(g.index == k);
    CHECK(g.token_sum <= plan.budget);
    CHECK(g.token_sum == sum_of(files, g.files));
    for (std::size_t i = 1; i < g.files.size(); ++i)
      CHECK(pos.at(g.files[i]) == pos.at(g.files[i - 1]) + 1);
    covered.insert(g.files.begin(), g.files.end());
    if (k > 0) {
      const auto& prev = plan.groups[k - 1].files;
      const auto& ov = g.overlap_with_prev;
      REQUIRE(ov.size() <= prev.size());
      REQUIRE(ov.size() <= g.files.size());
      CHECK(std::equal(ov.begin(), ov.end(), prev.end() - static_cast<long>(ov.size())));
      CHECK(std::equal(ov.begin(), ov.end(), g.files.begin()));
    } else {
      CHECK(g.overlap_with_prev.empty());
    }
  }
  CHECK(covered.size() == files.size());
}

}  // namespace

TEST_CASE("budget above total gives one group without overlap") {
  Files files = {{"a", 60000}, {"b", 40000}};
  auto plan = plan_groups(files, 128000);
  CHECK(plan.group_count == 1);
  CHECK(plan.total_tokens == 100000);
  REQUIRE(plan.groups.size() == 1);
  CHECK(plan.groups[0].files == std::vector<std::string>{"a", "b"});
  CHECK(plan.groups[0].overlap_with_prev.empty());
  CHECK_FALSE(plan.incremented);
}

TEST_CASE("190 equal files in two windows overlap by ten files") {
  auto files = equal_files(190);
  auto plan = plan_groups(files, 100);
  REQUIRE(plan.group_count == 2);
  CHECK_FALSE(plan.incremented);
  CHECK(plan.groups[0].files.front() == "f1");
  CHECK(plan.groups[0].files.back() == "f100");
  CHECK(plan.groups[1].files.front() == "f91");
  CHECK(plan.groups[1].files.back() == "f190");
  CHECK(plan.groups[1].overlap_with_prev.size() == 10);
  check_against_oracle(files, 100);
}

TEST_CASE("300 equal files force an increment to four groups") {
  auto files = equal_files(300);
  auto plan = plan_groups(files, 100);
  CHECK(plan.base_group_count == 3);
  CHECK(plan.group_count == 4);
  CHECK(plan.incremented);
  check_invariants(files, plan);
  for (std::size_t k = 1; k < plan.groups.size(); ++k) {
    const double ratio = static_cast<double>(plan.groups[k].overlap_with_prev.size()) /
                         static_cast<double>(plan.groups[k].files.size());
    CHECK(ratio >= 0.05);
    CHECK(ratio <= 0.15);
  }
  check_against_oracle(files, 100);
  // Values frozen from the oracle.
  CHECK(plan.groups[0].files.size() == 82);
  CHECK(plan.groups[1].files.size() == 83);
  CHECK(plan.groups[1].overlap_with_prev.size() == 10);
}

TEST_CASE("mixed sizes agree with the brute-force oracle") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 60; ++round) {
    std::uniform_int_distribution<int> count(1, 40);
    std::uniform_int_distribution<std::uint64_t> size(0, 30);
    Files files;
    const int n = count(rng);
    std::uint64_t wmax = 1;
    for (int i = 0; i < n; ++i) {
      files.emplace_back("f" + std::to_string(i), size(rng));
      wmax = std::max(wmax, files.back().second);
    }
    std::uniform_int_distribution<std::uint64_t> budget(wmax, wmax * 6);
    const auto m = budget(rng);
    const auto expect = oracle_plan(files, m, Frac(1, 10));
    if (expect.g == 0) {
      CHECK_THROWS_AS(plan_groups(files, m), Error);
      continue;
    }
    check_against_oracle(files, m);
  }
}

TEST_CASE("zero-token inputs form one group") {
  Files files = {{"a", 0}, {"b", 0}, {"c", 0}};
  auto plan = plan_groups(files, 10);
  REQUIRE(plan.group_count == 1);
  CHECK(plan.groups[0].files.size() == 3);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(plan_groups(Files{{"a", 5}, {"big", 101}}, 100), Error);
  try {
    plan_groups(Files{{"a", 5}, {"big", 101}}, 100);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingleFileOverflow);
  }
  try {
    plan_groups(Files{{"a", 100}, {"b", 100}}, 100);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
  }
  CHECK_THROWS_AS(plan_groups(equal_files(3), 10, 0.6), Error);
  CHECK_THROWS_AS(plan_groups(Files{}, 10), Error);
}

TEST_CASE("group_variance") {
  GroupPlan plan;
  plan.groups.resize(2);
  plan.groups[0].token_sum = 90;
  plan.groups[1].token_sum = 110;
  CHECK(group_variance(plan) == 100.0);
  plan.groups[1].token_sum = 90;
  CHECK(group_variance(plan) == 0.0);
  CHECK_THROWS_AS(group_variance(GroupPlan{}), Error);
}

TEST_CASE("adaptive plan is no less uniform than the fixed-size baseline") {
  auto files = equal_files(190);
  const auto adaptive = plan_groups(files, 100);
  const auto fixed = plan_fixed_size(files, 100);
  CHECK(fixed.groups.size() == 2);
  CHECK(fixed.groups.back().token_sum == 90);
  CHECK(group_variance(adaptive) <= group_variance(fixed));
}

TEST_CASE("weights override source token counts") {
  RepoModel repo;
  for (int i = 0; i < 4; ++i) repo.files.push_back({"f" + std::to_string(i), Language::Python, "", 1000});
  repo.total_tokens = 4000;
  TokenWeights w = {{"f0", 10}, {"f1", 10}, {"f2", 10}, {"f3", 10}};
  auto plan = plan_groups(repo, 100, 0.10, &w);
  CHECK(plan.total_tokens == 40);
  CHECK(plan.group_count == 1);
}

TEST_CASE("plan JSON round trip") {
  auto plan = plan_groups(equal_files(300), 100);
  CHECK(plan_from_json(plan_to_json(plan)) == plan);
  CHECK_THROWS_AS(plan_from_json("{\"version\":1}"), Error);
}

// Property: coverage, contiguity, budget, overlap shape and no micro-tail
// over log-uniform file sizes. Each group covers a full window of S tokens
// and exceeds it by less than two files, so min >= S and max < S + 2*wmax;
// with budget >= 8*wmax, S stays above 2*wmax even after increments, which
// is what rules out a tail below half the mean.
TEST_CASE("property: invariants over random size distributions") {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> count(2, 400);
  std::uniform_real_distribution<double> log_size(0.0, std::log(5000.0));
  int multi_group = 0;
  for (int round = 0; round < 400; ++round) {
    Files files;
    const int n = count(rng);
    std::uint64_t wmax = 1;
    std::uint64_t total = 0;
    for (int i = 0; i < n; ++i) {
      const auto w = static_cast<std::uint64_t>(std::exp(log_size(rng)));
      files.emplace_back("f" + std::to_string(i), w);
      wmax = std::max(wmax, w);
      total += w;
    }
    std::uniform_int_distribution<std::uint64_t> budget(8 * wmax, 8 * wmax + total / 2);
    const auto m = budget(rng);
    const auto plan = plan_groups(files, m);
    check_invariants(files, plan);
    CHECK(plan.base_group_count == std::max<std::uint64_t>(1, (total + m - 1) / m));
    if (!plan.incremented) CHECK(plan.group_count == plan.base_group_count);
    if (plan.incremented) {
      // Minimality: one group fewer breaks the budget.
      auto fewer = oracle_windows(files, plan.group_count - 1, Frac(1, 10));
      bool violated = false;
      for (auto& names : fewer) violated = violated || sum_of(files, names) > m;
      CHECK(violated);
    }
    if (plan.groups.size() >= 2) {
      ++multi_group;
      double mean = 0;
      std::uint64_t min = UINT64_MAX;
      for (auto& g : plan.groups) {
        mean += static_cast<double>(g.token_sum);
        min = std::min(min, g.token_sum);
      }
      mean /= static_cast<double>(plan.groups.size());
      CHECK(static_cast<double>(min) >= 0.5 * mean);
    }
  }
  CHECK(multi_group > 100);
}

// Equal-token inputs: rounding to whole files moves the overlap by at most
// one file, so windows of >= 25 files keep the share within [0.05, 0.15].
TEST_CASE("property: overlap share for equal-token files") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> count(100, 2000);
  for (int round = 0; round < 200; ++round) {
    const auto n = count(rng);
    std::uniform_int_distribution<std::uint64_t> budget(60, n);
    const auto m = budget(rng);
    const auto files = equal_files(n, 3);
    const auto plan = plan_groups(files, m * 3);
    check_invariants(files, plan);
    for (std::size_t k = 1; k < plan.groups.size(); ++k) {
      const double ratio = static_cast<double>(plan.groups[k].overlap_with_prev.size()) /
                           static_cast<double>(plan.groups[k].files.size());
      CHECK(ratio >= 0.05);
      CHECK(ratio <= 0.15);
    }
  }
}
