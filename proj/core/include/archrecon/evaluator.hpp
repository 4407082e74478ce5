#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archrecon/diagram.hpp"

namespace archrecon {

enum class Category { Layers, Nodes, Edges };

inline constexpr std::array<Category, 3> kCategories = {Category::Layers, Category::Nodes,
                                                        Category::Edges};

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view name);

// Exact non-negative fraction, always reduced.
class Ratio {
public:
  Ratio() = default;
  Ratio(std::uint64_t num, std::uint64_t den);

  std::uint64_t num() const { return num_; }
  std::uint64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Ratio operator*(const Ratio& a, const Ratio& b);
  friend Ratio operator+(const Ratio& a, const Ratio& b);
  friend Ratio operator/(const Ratio& a, const Ratio& b);
  friend bool operator==(const Ratio&, const Ratio&) = default;
  friend bool operator<(const Ratio& a, const Ratio& b);

private:
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

struct Verdict {
  std::string element;
  bool correct = false;

  bool operator==(const Verdict&) const = default;
};

struct AnnotationSection {
  std::vector<Verdict> verdicts;
  std::vector<std::string> omissions;

  bool operator==(const AnnotationSection&) const = default;
};

struct AnnotationTable {
  std::string repo_id;
  std::map<Category, AnnotationSection> sections;

  bool operator==(const AnnotationTable&) const = default;
};

struct CategoryScore {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  Ratio precision;
  Ratio recall;
  Ratio f1;

  bool operator==(const CategoryScore&) const = default;
};

// Precision is 1 with no predictions, recall is 1 with nothing to find, F1
// is 0 when both are 0.
CategoryScore score_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

struct ScoreReport {
  std::string repo_id;
  std::map<Category, CategoryScore> per_category;
  CategoryScore aggregate;  // micro-average over summed counts
  std::optional<Ratio> restoration;
  std::optional<Ratio> weighted_f1;

  Ratio aggregate_f1() const { return aggregate.f1; }
  bool operator==(const ScoreReport&) const = default;
};

// Throws Error{MalformedTable} for duplicate or overlapping elements and
// Error{InvalidRestoration} unless restoration is one of 0, 10, ..., 100.
void validate_table(const AnnotationTable& table);
ScoreReport score(const AnnotationTable& table, std::optional<int> restoration = std::nullopt);

struct PairedStats {
  std::size_t n = 0;
  double mean_diff = 0;
  double sd_diff = 0;
  double t_statistic = 0;
  double effect_size = 0;  // Cohen's d on the differences
  double ci_low = 0;
  double ci_high = 0;
  double p_value = 0;      // two-sided
};

// Paired t-test on a - b. Throws Error{LengthMismatch} for unequal or
// too-short inputs and Error{DegenerateVariance} when all differences are
// identical.
PairedStats paired_compare(const std::vector<double>& a, const std::vector<double>& b);

// Strict automatic annotation: layers and nodes match by normalized id,
// edges by their (src, dst) pair regardless of kind.
AnnotationTable diff_against_reference(const ArchDiagram& generated, const ArchDiagram& reference);

AnnotationTable table_from_json(std::string_view text);
std::string table_to_json(const AnnotationTable& table);
// Columns: category, element, verdict; verdict is true/false (also
// correct/incorrect, yes/no, 1/0) or "omission". A header row is optional.
AnnotationTable table_from_csv(std::string_view text, std::string repo_id = {});
std::string table_to_csv(const AnnotationTable& table);

std::string report_to_json(const ScoreReport& report);
std::string report_to_text(const ScoreReport& report);

// Score vectors for `compare`: a JSON array of numbers, an array of score
// reports (weighted F1 when present, else aggregate F1), an object with a
// "scores" array, or one number per line.
std::vector<double> scores_from_text(std::string_view text);

std::string stats_to_json(const PairedStats& stats);

}  // namespace archrecon
