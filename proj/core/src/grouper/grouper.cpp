#include "archrecon/grouper.hpp"

#include <algorithm>
#include <cmath>

#include "archrecon/error.hpp"
#include "detail/json_util.hpp"

namespace archrecon {

namespace {

using i128 = __int128;

// Overlap rates are handled as p / kRateDenominator so that group bounds
// are exact integers.
constexpr std::int64_t kRateDenominator = 10000;

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Assigns files to G windows. Window k spans [(q-p)kT, (q-p)kT + qT) in
// units scaled by D = (q-p)G + p, i.e. S = qT / D with stride (1-r)S. A file
// joins every window its half-open token interval intersects; zero-token
// files join windows containing their position.
std::vector<Group> assign(const std::vector<std::pair<std::string, std::uint64_t>>& files,
                          std::uint64_t total, std::size_t g, std::int64_t p) {
  const i128 q = kRateDenominator;
  const i128 d = (q - p) * static_cast<i128>(g) + p;
  const i128 t = total;
  const i128 stride = (q - p) * t;
  const i128 last = static_cast<i128>(g) - 1;
  std::vector<Group> groups(g);
  for (std::size_t k = 0; k < g; ++k) groups[k].index = k;
  i128 cum = 0;
  for (const auto& [path, w] : files) {
    i128 k_lo = 0;
    i128 k_hi = 0;
    if (t > 0) {
      const i128 lo = cum * d;
      const i128 hi = (cum + w) * d;
      // end_k > lo  <=>  k > (lo - qT) / stride
      k_lo = floor_div(lo - q * t, stride) + 1;
      if (w > 0) {
        // start_k < hi
        k_hi = floor_div(hi - 1, stride);
      } else {
        // start_k <= lo; the final window is closed at T.
        k_hi = floor_div(lo, stride);
        if (lo == t * d) k_lo = std::min(k_lo, last);
      }
    }
    cum += w;
    k_lo = std::max<i128>(k_lo, 0);
    k_hi = std::min(k_hi, last);
    for (i128 k = k_lo; k <= k_hi; ++k) {
      auto& grp = groups[static_cast<std::size_t>(k)];
      grp.files.push_back(path);
      grp.token_sum += w;
    }
  }
  // Windows are contiguous, so the shared run is the previous window's tail
  // starting at this window's first file.
  for (std::size_t k = 1; k < g; ++k) {
    const auto& prev = groups[k - 1].files;
    const auto& cur = groups[k].files;
    if (cur.empty()) continue;
    auto it = std::find(prev.begin(), prev.end(), cur.front());
    groups[k].overlap_with_prev.assign(it, prev.end());
  }
  return groups;
}

}  // namespace

GroupPlan plan_groups(const std::vector<std::pair<std::string, std::uint64_t>>& files,
                      std::uint64_t budget, double overlap_rate) {
  if (budget == 0) throw Error(ErrorKind::Precondition, "budget must be positive");
  if (!(overlap_rate >= 0.0 && overlap_rate <= 0.5))
    throw Error(ErrorKind::Precondition, "overlap rate must lie in [0, 0.5]");
  if (files.empty()) throw Error(ErrorKind::Precondition, "no files to group");

  std::uint64_t total = 0;
  for (const auto& [path, w] : files) {
    if (w > budget)
      throw Error(ErrorKind::SingleFileOverflow,
                  path + " has " + std::to_string(w) + " tokens, over the budget of " +
                      std::to_string(budget));
    total += w;
  }

  GroupPlan plan;
  plan.budget = budget;
  plan.total_tokens = total;
  plan.overlap_rate = overlap_rate;
  plan.base_group_count = std::max<std::uint64_t>(1, (total + budget - 1) / budget);
  const auto p = static_cast<std::int64_t>(std::llround(overlap_rate * kRateDenominator));

  for (std::size_t g = plan.base_group_count; g <= std::max(files.size(), plan.base_group_count); ++g) {
    auto groups = assign(files, total, g, p);
    const bool fits = std::all_of(groups.begin(), groups.end(),
                                  [&](const Group& gr) { return gr.token_sum <= budget; });
    if (fits) {
      plan.groups = std::move(groups);
      plan.group_count = g;
      plan.incremented = g != plan.base_group_count;
      return plan;
    }
  }
  throw Error(ErrorKind::NonConvergence,
              "no group count up to " + std::to_string(files.size()) +
                  " keeps every group within " + std::to_string(budget) + " tokens");
}

GroupPlan plan_groups(const RepoModel& repo, std::uint64_t budget, double overlap_rate,
                      const TokenWeights* weights) {
  std::vector<std::pair<std::string, std::uint64_t>> files;
  files.reserve(repo.files.size());
  for (const auto& f : repo.files) {
    std::uint64_t w = f.token_count;
    if (weights)
      if (auto it = weights->find(f.path); it != weights->end()) w = it->second;
    files.emplace_back(f.path, w);
  }
  return plan_groups(files, budget, overlap_rate);
}

GroupPlan plan_fixed_size(const std::vector<std::pair<std::string, std::uint64_t>>& files,
                          std::uint64_t budget) {
  if (budget == 0) throw Error(ErrorKind::Precondition, "budget must be positive");
  GroupPlan plan;
  plan.budget = budget;
  plan.overlap_rate = 0.0;
  for (const auto& [path, w] : files) {
    if (w > budget)
      throw Error(ErrorKind::SingleFileOverflow, path + " exceeds the budget");
    if (plan.groups.empty() || plan.groups.back().token_sum + w > budget) {
      plan.groups.emplace_back();
      plan.groups.back().index = plan.groups.size() - 1;
    }
    plan.groups.back().files.push_back(path);
    plan.groups.back().token_sum += w;
    plan.total_tokens += w;
  }
  plan.group_count = plan.groups.size();
  plan.base_group_count = plan.group_count;
  return plan;
}

double group_variance(const GroupPlan& plan) {
  if (plan.groups.empty()) throw Error(ErrorKind::Precondition, "plan has no groups");
  // n^2 * var = n * sum(x^2) - (sum x)^2, evaluated exactly.
  const i128 n = static_cast<i128>(plan.groups.size());
  i128 sum = 0;
  i128 sq = 0;
  for (const auto& g : plan.groups) {
    sum += g.token_sum;
    sq += static_cast<i128>(g.token_sum) * g.token_sum;
  }
  const i128 num = n * sq - sum * sum;
  return static_cast<double>(num) / static_cast<double>(n * n);
}

std::string plan_to_json(const GroupPlan& plan) {
  using detail::json;
  json groups = json::array();
  for (const auto& g : plan.groups)
    groups.push_back({{"index", g.index},
                      {"files", g.files},
                      {"token_sum", g.token_sum},
                      {"overlap_with_prev", g.overlap_with_prev}});
  json doc = {{"version", 1},
              {"group_count", plan.group_count},
              {"budget", plan.budget},
              {"total_tokens", plan.total_tokens},
              {"overlap_rate", plan.overlap_rate},
              {"base_group_count", plan.base_group_count},
              {"incremented", plan.incremented},
              {"groups", groups}};
  return doc.dump(1);
}

GroupPlan plan_from_json(std::string_view text) {
  using detail::json;
  using detail::require;
  constexpr std::string_view what = "groups.json";
  const auto doc = detail::parse_json(text, what);
  GroupPlan plan;
  plan.group_count = require<std::size_t>(doc, "group_count", what);
  plan.budget = require<std::uint64_t>(doc, "budget", what);
  plan.total_tokens = require<std::uint64_t>(doc, "total_tokens", what);
  plan.overlap_rate = require<double>(doc, "overlap_rate", what);
  plan.base_group_count = require<std::size_t>(doc, "base_group_count", what);
  plan.incremented = require<bool>(doc, "incremented", what);
  for (const auto& g : require<json>(doc, "groups", what)) {
    Group group;
    group.index = require<std::size_t>(g, "index", what);
    group.files = require<std::vector<std::string>>(g, "files", what);
    group.token_sum = require<std::uint64_t>(g, "token_sum", what);
    group.overlap_with_prev = require<std::vector<std::string>>(g, "overlap_with_prev", what);
    plan.groups.push_back(std::move(group));
  }
  if (plan.groups.size() != plan.group_count)
    throw Error(ErrorKind::SchemaViolation, "groups.json: group_count does not match groups");
  return plan;
}

}  // namespace archrecon
