#include "detail/extractive.hpp"

#include "archrecon/repo_model.hpp"
#include "detail/text.hpp"

namespace archrecon::detail {

namespace {

std::string_view strip_prefix_chars(std::string_view s, std::string_view chars) {
  while (!s.empty() && chars.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  return detail::trim(s);
}

}  // namespace

std::string first_comment(std::string_view path, std::string_view content) {
  const auto lang = language_for_path(path);
  const bool hash = lang == Language::Python || lang == Language::Yaml || lang == Language::Other;
  const auto lines = detail::split_lines(content);
  std::vector<std::string> parts;
  bool in_block = false, in_doc = false;
  std::string_view doc_quote;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (in_doc) {
      const auto end = line.find(doc_quote);
      parts.emplace_back(detail::trim(line.substr(0, end)));
      if (end != std::string_view::npos) break;
      continue;
    }
    if (in_block) {
      const auto end = line.find("*/");
      parts.emplace_back(strip_prefix_chars(line.substr(0, end), "*"));
      if (end != std::string_view::npos) break;
      continue;
    }
    bool comment = false;
    if (hash && line.substr(0, 1) == "#" && !(i == 0 && line.substr(0, 2) == "#!")) {
      parts.emplace_back(strip_prefix_chars(line, "#"));
      comment = true;
    } else if (!hash && line.substr(0, 2) == "//") {
      parts.emplace_back(strip_prefix_chars(line, "/!"));
      comment = true;
    } else if (!hash && line.substr(0, 2) == "/*") {
      const auto body = line.substr(2);
      const auto end = body.find("*/");
      parts.emplace_back(strip_prefix_chars(body.substr(0, end), "*!"));
      if (end != std::string_view::npos) break;
      in_block = true;
      continue;
    } else if (lang == Language::Python &&
               (line.substr(0, 3) == "\"\"\"" || line.substr(0, 3) == "'''") && parts.empty()) {
      doc_quote = line.substr(0, 3);
      const auto rest = line.substr(3);
      const auto end = rest.find(doc_quote);
      parts.emplace_back(detail::trim(rest.substr(0, end)));
      if (end != std::string_view::npos) break;
      in_doc = true;
      continue;
    }
    if (!comment && !parts.empty()) break;
  }
  std::vector<std::string> kept;
  for (auto& p : parts)
    if (!p.empty()) kept.push_back(std::move(p));
  return detail::join(kept, " ");
}

std::string extractive_summary(std::string_view path, std::string_view content) {
  auto comment = first_comment(path, content);
  if (comment.size() > 600) comment = comment.substr(0, utf8_floor(comment, 600)) + "...";
  if (!comment.empty()) {
    if (comment.back() != '.') comment += '.';
    return comment;
  }
  return std::string(path) + ": " + std::string(to_string(language_for_path(path))) + " source, " +
         std::to_string(split_lines(content).size()) + " lines.";
}

}  // namespace archrecon::detail
