#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/repo_model.hpp"

namespace archrecon {

struct Group {
  std::size_t index = 0;
  std::vector<std::string> files;  // contiguous run of the canonical file order
  std::uint64_t token_sum = 0;
  std::vector<std::string> overlap_with_prev;

  bool operator==(const Group&) const = default;
};

struct GroupPlan {
  std::vector<Group> groups;
  std::size_t group_count = 0;       // G
  std::uint64_t budget = 0;          // M
  std::uint64_t total_tokens = 0;    // T
  double overlap_rate = 0.10;
  std::size_t base_group_count = 0;  // ceil(T / M), before any increment
  bool incremented = false;          // G was raised to respect the budget

  bool operator==(const GroupPlan&) const = default;
};

using TokenWeights = std::map<std::string, std::uint64_t, std::less<>>;

inline constexpr double kDefaultOverlapRate = 0.10;

// Splits the file sequence into G overlapping windows of near-equal token
// mass. `weights` overrides per-file token counts (e.g. summary tokens).
// Throws Error{SingleFileOverflow} when one file exceeds the budget and
// Error{NonConvergence} when no G up to the file count fits the budget.
GroupPlan plan_groups(const RepoModel& repo, std::uint64_t budget,
                      double overlap_rate = kDefaultOverlapRate,
                      const TokenWeights* weights = nullptr);

// Same algorithm over an explicit (path, tokens) sequence.
GroupPlan plan_groups(const std::vector<std::pair<std::string, std::uint64_t>>& files,
                      std::uint64_t budget, double overlap_rate = kDefaultOverlapRate);

// Greedy fill up to the budget without overlap; the baseline the adaptive
// plan is compared against.
GroupPlan plan_fixed_size(const std::vector<std::pair<std::string, std::uint64_t>>& files,
                          std::uint64_t budget);

// Population variance of the group token sums. Requires a non-empty plan.
double group_variance(const GroupPlan& plan);

std::string plan_to_json(const GroupPlan& plan);
GroupPlan plan_from_json(std::string_view text);

}  // namespace archrecon
