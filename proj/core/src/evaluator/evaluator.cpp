#include "archrecon/evaluator.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "archrecon/error.hpp"
#include "detail/json_util.hpp"
#include "detail/text.hpp"

namespace archrecon {

using detail::json;

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Layers: return "layers";
    case Category::Nodes: return "nodes";
    case Category::Edges: return "edges";
  }
  return "nodes";
}

std::optional<Category> category_from_string(std::string_view name) {
  for (auto c : kCategories)
    if (detail::iequals(name, to_string(c))) return c;
  return std::nullopt;
}

namespace {

using u128 = unsigned __int128;

Ratio reduce(u128 num, u128 den) {
  if (den == 0) throw Error(ErrorKind::Precondition, "ratio with zero denominator");
  u128 a = num, b = den;
  while (b) {
    const auto t = a % b;
    a = b;
    b = t;
  }
  num /= a;
  den /= a;
  constexpr u128 limit = ~std::uint64_t{0};
  if (num > limit || den > limit) throw Error(ErrorKind::Precondition, "ratio overflow");
  return Ratio(static_cast<std::uint64_t>(num), static_cast<std::uint64_t>(den));
}

}  // namespace

Ratio::Ratio(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
  if (den == 0) throw Error(ErrorKind::Precondition, "ratio with zero denominator");
  const auto g = std::gcd(num, den);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Ratio operator*(const Ratio& a, const Ratio& b) {
  return reduce(u128(a.num_) * b.num_, u128(a.den_) * b.den_);
}

Ratio operator+(const Ratio& a, const Ratio& b) {
  return reduce(u128(a.num_) * b.den_ + u128(b.num_) * a.den_, u128(a.den_) * b.den_);
}

Ratio operator/(const Ratio& a, const Ratio& b) {
  return reduce(u128(a.num_) * b.den_, u128(a.den_) * b.num_);
}

bool operator<(const Ratio& a, const Ratio& b) {
  return u128(a.num_) * b.den_ < u128(b.num_) * a.den_;
}

CategoryScore score_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  CategoryScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = tp + fp > 0 ? Ratio(tp, tp + fp) : Ratio(1, 1);
  s.recall = tp + fn > 0 ? Ratio(tp, tp + fn) : Ratio(1, 1);
  const auto sum = s.precision + s.recall;
  s.f1 = sum.num() == 0 ? Ratio(0, 1) : Ratio(2, 1) * s.precision * s.recall / sum;
  return s;
}

void validate_table(const AnnotationTable& table) {
  for (const auto& [cat, section] : table.sections) {
    std::set<std::string_view> seen;
    for (const auto& v : section.verdicts)
      if (!seen.insert(v.element).second)
        throw Error(ErrorKind::MalformedTable, std::string(to_string(cat)) +
                                                   ": duplicate element '" + v.element + "'");
    std::set<std::string_view> omitted;
    for (const auto& o : section.omissions) {
      if (seen.count(o))
        throw Error(ErrorKind::MalformedTable,
                    std::string(to_string(cat)) + ": '" + o + "' is both judged and omitted");
      if (!omitted.insert(o).second)
        throw Error(ErrorKind::MalformedTable,
                    std::string(to_string(cat)) + ": duplicate omission '" + o + "'");
    }
  }
}

ScoreReport score(const AnnotationTable& table, std::optional<int> restoration) {
  if (restoration && (*restoration < 0 || *restoration > 100 || *restoration % 10 != 0))
    throw Error(ErrorKind::InvalidRestoration,
                "restoration must be a multiple of 10 in [0, 100], got " +
                    std::to_string(*restoration));
  validate_table(table);
  ScoreReport r;
  r.repo_id = table.repo_id;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (auto cat : kCategories) {
    std::uint64_t ctp = 0, cfp = 0, cfn = 0;
    if (auto it = table.sections.find(cat); it != table.sections.end()) {
      for (const auto& v : it->second.verdicts) (v.correct ? ctp : cfp) += 1;
      cfn = it->second.omissions.size();
    }
    r.per_category[cat] = score_counts(ctp, cfp, cfn);
    tp += ctp;
    fp += cfp;
    fn += cfn;
  }
  r.aggregate = score_counts(tp, fp, fn);
  if (restoration) {
    r.restoration = Ratio(static_cast<std::uint64_t>(*restoration), 100);
    r.weighted_f1 = *r.restoration * r.aggregate.f1;
  }
  return r;
}

PairedStats paired_compare(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::LengthMismatch, "score vectors differ in length (" +
                                               std::to_string(a.size()) + " vs " +
                                               std::to_string(b.size()) + ")");
  if (a.size() < 2)
    throw Error(ErrorKind::LengthMismatch, "paired comparison needs at least two pairs");
  const auto n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x == d[0]; }))
    throw Error(ErrorKind::DegenerateVariance, "all paired differences are identical");

  PairedStats s;
  s.n = n;
  const double nn = static_cast<double>(n);
  s.mean_diff = std::accumulate(d.begin(), d.end(), 0.0) / nn;
  double ss = 0;
  for (double x : d) ss += (x - s.mean_diff) * (x - s.mean_diff);
  s.sd_diff = std::sqrt(ss / (nn - 1));
  const double se = s.sd_diff / std::sqrt(nn);
  s.t_statistic = s.mean_diff / se;
  s.effect_size = s.mean_diff / s.sd_diff;

  boost::math::students_t dist(nn - 1);
  s.p_value = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(s.t_statistic)));
  s.p_value = std::min(1.0, s.p_value);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  s.ci_low = s.mean_diff - q * se;
  s.ci_high = s.mean_diff + q * se;
  return s;
}

AnnotationTable diff_against_reference(const ArchDiagram& generated, const ArchDiagram& reference) {
  auto section = [](const std::vector<std::string>& gen, const std::vector<std::string>& ref) {
    AnnotationSection s;
    const std::set<std::string> ref_set(ref.begin(), ref.end());
    const std::set<std::string> gen_set(gen.begin(), gen.end());
    std::set<std::string> done;
    for (const auto& e : gen)
      if (done.insert(e).second) s.verdicts.push_back({e, ref_set.count(e) > 0});
    done.clear();
    for (const auto& e : ref)
      if (!gen_set.count(e) && done.insert(e).second) s.omissions.push_back(e);
    return s;
  };
  auto layers = [](const ArchDiagram& d) {
    std::vector<std::string> out;
    for (const auto& l : d.layers) out.push_back(normalize_id(l.id));
    return out;
  };
  auto nodes = [](const ArchDiagram& d) {
    std::vector<std::string> out;
    for (const auto& [id, n] : d.nodes) out.push_back(normalize_id(id));
    return out;
  };
  auto edges = [](const ArchDiagram& d) {
    std::vector<std::string> out;
    for (const auto& [k, label] : d.edges)
      out.push_back(normalize_id(k.src) + " -> " + normalize_id(k.dst));
    return out;
  };
  AnnotationTable t;
  t.sections[Category::Layers] = section(layers(generated), layers(reference));
  t.sections[Category::Nodes] = section(nodes(generated), nodes(reference));
  t.sections[Category::Edges] = section(edges(generated), edges(reference));
  return t;
}

// --- IO --------------------------------------------------------------------

namespace {

constexpr std::string_view kTable = "annotation table";

Category require_category(std::string_view name) {
  auto c = category_from_string(name);
  if (!c) throw Error(ErrorKind::MalformedTable, "unknown category '" + std::string(name) + "'");
  return *c;
}

std::optional<bool> parse_verdict(std::string_view v) {
  const auto s = detail::to_lower(detail::trim(v));
  if (s == "true" || s == "correct" || s == "yes" || s == "1" || s == "tp") return true;
  if (s == "false" || s == "incorrect" || s == "no" || s == "0" || s == "fp") return false;
  return std::nullopt;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::MalformedTable, "unterminated quote in CSV");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && detail::trim(s) == s) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json ratio_json(const Ratio& r) { return r.value(); }

json category_json(const CategoryScore& s) {
  return {{"tp", s.tp},
          {"fp", s.fp},
          {"fn", s.fn},
          {"precision", ratio_json(s.precision)},
          {"recall", ratio_json(s.recall)},
          {"f1", ratio_json(s.f1)},
          {"f1_exact", std::to_string(s.f1.num()) + "/" + std::to_string(s.f1.den())}};
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

AnnotationTable table_from_json(std::string_view text) {
  const auto j = detail::parse_json(text, kTable);
  if (!j.is_object()) throw Error(ErrorKind::MalformedTable, "annotation table must be an object");
  if (j.contains("version") && j.at("version") != 1)
    throw Error(ErrorKind::MalformedTable, "unsupported annotation table version");
  AnnotationTable t;
  try {
    t.repo_id = j.value("repo_id", std::string());
    const auto& sections = j.at("sections");
    if (!sections.is_object()) throw Error(ErrorKind::MalformedTable, "'sections' must be an object");
    for (const auto& [name, body] : sections.items()) {
      auto& s = t.sections[require_category(name)];
      for (const auto& v : body.value("verdicts", json::array())) {
        const auto& c = v.at("correct");
        bool correct;
        if (c.is_boolean()) correct = c.get<bool>();
        else if (auto p = parse_verdict(c.is_string() ? c.get<std::string>() : c.dump())) correct = *p;
        else throw Error(ErrorKind::MalformedTable, "bad verdict value " + c.dump());
        s.verdicts.push_back({v.at("element").get<std::string>(), correct});
      }
      for (const auto& o : body.value("omissions", json::array()))
        s.omissions.push_back(o.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedTable, std::string("annotation table: ") + e.what());
  }
  validate_table(t);
  return t;
}

std::string table_to_json(const AnnotationTable& table) {
  json j;
  j["version"] = 1;
  j["repo_id"] = table.repo_id;
  j["sections"] = json::object();
  for (const auto& [cat, s] : table.sections) {
    json body;
    body["verdicts"] = json::array();
    for (const auto& v : s.verdicts)
      body["verdicts"].push_back({{"element", v.element}, {"correct", v.correct}});
    body["omissions"] = s.omissions;
    j["sections"][std::string(to_string(cat))] = std::move(body);
  }
  return j.dump(2) + "\n";
}

AnnotationTable table_from_csv(std::string_view text, std::string repo_id) {
  AnnotationTable t;
  t.repo_id = std::move(repo_id);
  const auto rows = parse_csv(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && detail::trim(r[0]).empty()) continue;
    if (i == 0 && r.size() >= 1 && detail::iequals(detail::trim(r[0]), "category")) continue;
    if (r.size() != 3)
      throw Error(ErrorKind::MalformedTable, "CSV row " + std::to_string(i + 1) +
                                                 ": expected 3 columns, got " +
                                                 std::to_string(r.size()));
    auto& s = t.sections[require_category(detail::trim(r[0]))];
    const auto mark = detail::to_lower(detail::trim(r[2]));
    if (mark == "omission" || mark == "omitted" || mark == "fn") {
      s.omissions.push_back(r[1]);
    } else if (auto v = parse_verdict(mark)) {
      s.verdicts.push_back({r[1], *v});
    } else {
      throw Error(ErrorKind::MalformedTable,
                  "CSV row " + std::to_string(i + 1) + ": bad verdict '" + r[2] + "'");
    }
  }
  validate_table(t);
  return t;
}

std::string table_to_csv(const AnnotationTable& table) {
  std::string out = "category,element,verdict\n";
  for (const auto& [cat, s] : table.sections) {
    const std::string name(to_string(cat));
    for (const auto& v : s.verdicts)
      out += name + "," + csv_field(v.element) + "," + (v.correct ? "true" : "false") + "\n";
    for (const auto& o : s.omissions) out += name + "," + csv_field(o) + ",omission\n";
  }
  return out;
}

std::string report_to_json(const ScoreReport& r) {
  json j;
  j["version"] = 1;
  j["repo_id"] = r.repo_id;
  j["per_category"] = json::object();
  for (const auto& [cat, s] : r.per_category) j["per_category"][std::string(to_string(cat))] = category_json(s);
  j["aggregate"] = category_json(r.aggregate);
  j["aggregate_f1"] = ratio_json(r.aggregate.f1);
  j["restoration"] = r.restoration ? json(ratio_json(*r.restoration)) : json(nullptr);
  j["weighted_f1"] = r.weighted_f1 ? json(ratio_json(*r.weighted_f1)) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string report_to_text(const ScoreReport& r) {
  std::string out;
  if (!r.repo_id.empty()) out += "repo: " + r.repo_id + "\n";
  out += pad("category", 10) + pad("tp", 6, true) + pad("fp", 6, true) + pad("fn", 6, true) +
         pad("precision", 11, true) + pad("recall", 8, true) + pad("f1", 7, true) + "\n";
  auto line = [&](const std::string& name, const CategoryScore& s) {
    out += pad(name, 10) + pad(std::to_string(s.tp), 6, true) + pad(std::to_string(s.fp), 6, true) +
           pad(std::to_string(s.fn), 6, true) + pad(fixed3(s.precision.value()), 11, true) +
           pad(fixed3(s.recall.value()), 8, true) + pad(fixed3(s.f1.value()), 7, true) + "\n";
  };
  for (const auto& [cat, s] : r.per_category) line(std::string(to_string(cat)), s);
  line("aggregate", r.aggregate);
  if (r.restoration)
    out += "restoration " + fixed3(r.restoration->value()) + ", weighted F1 " +
           fixed3(r.weighted_f1->value()) + "\n";
  out += "(P = 1 with no predictions, R = 1 with no reference items)\n";
  return out;
}

std::vector<double> scores_from_text(std::string_view text) {
  const auto t = detail::trim(text);
  std::vector<double> out;
  if (!t.empty() && (t.front() == '[' || t.front() == '{')) {
    auto j = detail::parse_json(t, "score file");
    if (j.is_object()) {
      if (!j.contains("scores")) throw Error(ErrorKind::SchemaViolation, "score file: missing 'scores'");
      j = j.at("scores");
    }
    if (!j.is_array()) throw Error(ErrorKind::SchemaViolation, "score file: expected an array");
    for (const auto& v : j) {
      if (v.is_number()) {
        out.push_back(v.get<double>());
      } else if (v.is_object()) {
        const json* pick = nullptr;
        for (const char* key : {"weighted_f1", "aggregate_f1", "f1", "score"})
          if (v.contains(key) && v.at(key).is_number()) {
            pick = &v.at(key);
            break;
          }
        if (!pick) throw Error(ErrorKind::SchemaViolation, "score file: entry without a score");
        out.push_back(pick->get<double>());
      } else {
        throw Error(ErrorKind::SchemaViolation, "score file: unexpected entry " + v.dump());
      }
    }
    return out;
  }
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    try {
      std::size_t used = 0;
      const std::string s(line);
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw Error(ErrorKind::SchemaViolation, "score file: not a number: " + std::string(line));
    }
  }
  return out;
}

std::string stats_to_json(const PairedStats& s) {
  json j = {{"version", 1},
            {"n", s.n},
            {"mean_diff", s.mean_diff},
            {"sd_diff", s.sd_diff},
            {"t_statistic", s.t_statistic},
            {"effect_size", s.effect_size},
            {"ci_low", s.ci_low},
            {"ci_high", s.ci_high},
            {"p_value", s.p_value}};
  return j.dump(2) + "\n";
}

}  // namespace archrecon
