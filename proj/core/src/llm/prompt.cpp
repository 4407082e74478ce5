#include "archrecon/prompt.hpp"

#include "detail/text.hpp"

namespace archrecon::prompt {

std::string task_line(std::string_view tag) { return "[task:" + std::string(tag) + "]"; }

std::optional<std::string> task_tag(std::string_view system_prompt) {
  const auto nl = system_prompt.find('\n');
  const auto first = detail::trim(system_prompt.substr(0, nl));
  constexpr std::string_view open = "[task:";
  if (first.substr(0, open.size()) != open) return std::nullopt;
  const auto close = first.find(']');
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(detail::trim(first.substr(open.size(), close - open.size())));
}

std::string section(std::string_view name, std::string_view body, std::string_view arg) {
  std::string out = "<<<" + std::string(name);
  if (!arg.empty()) out += "|" + std::string(arg);
  out += ">>>\n";
  out += body;
  if (!body.empty() && body.back() != '\n') out += '\n';
  return out;
}

namespace {

// "<<<NAME>>>" or "<<<NAME|arg>>>"; NAME is upper-case letters, digits,
// spaces and '-'.
std::optional<Section> header(std::string_view line) {
  if (line.size() < 7 || line.substr(0, 3) != "<<<" || line.substr(line.size() - 3) != ">>>")
    return std::nullopt;
  const auto inner = line.substr(3, line.size() - 6);
  const auto bar = inner.find('|');
  const auto name = inner.substr(0, bar);
  if (name.empty()) return std::nullopt;
  for (char c : name)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == ' ' || c == '-'))
      return std::nullopt;
  Section s{std::string(name), {}, {}};
  if (bar != std::string_view::npos) s.arg = std::string(inner.substr(bar + 1));
  return s;
}

}  // namespace

std::vector<Section> parse_sections(std::string_view text) {
  std::vector<Section> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto h = header(line)) {
      out.push_back(std::move(*h));
    } else if (!out.empty()) {
      auto& body = out.back().body;
      body.append(text.substr(start, nl - start));
      body += '\n';
    }
    start = nl + 1;
  }
  for (auto& s : out)
    if (!s.body.empty() && s.body.back() == '\n') s.body.pop_back();
  return out;
}

const Section* find_section(const std::vector<Section>& sections, std::string_view name) {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<std::string> list_items(std::string_view body) {
  std::vector<std::string> out;
  for (auto line : detail::split_lines(body)) {
    line = detail::trim(line);
    if (line.substr(0, 2) == "- ") line = detail::trim(line.substr(2));
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

}  // namespace archrecon::prompt
