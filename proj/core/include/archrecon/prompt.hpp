#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Prompt layout shared by the pipeline stages and the mock backend. The
// system prompt starts with "[task:<tag>]"; the user content is a sequence
// of sections, each opened by a "<<<NAME>>>" or "<<<NAME|arg>>>" line.
namespace archrecon::prompt {

inline constexpr std::string_view kSummarizeFile = "summarize-file";
inline constexpr std::string_view kGenReadme = "gen-readme";
inline constexpr std::string_view kGenDiagram = "gen-diagram";
inline constexpr std::string_view kNominateEntries = "nominate-entries";

// Separates the related-file list from the summary in summarize-file output.
inline constexpr std::string_view kSummaryDelimiter = "=== SUMMARY ===";
inline constexpr std::string_view kRelatedHeader = "RELATED FILES:";

std::string task_line(std::string_view tag);
std::optional<std::string> task_tag(std::string_view system_prompt);

struct Section {
  std::string name;
  std::string arg;
  std::string body;  // without the trailing newline
};

std::string section(std::string_view name, std::string_view body, std::string_view arg = {});
std::vector<Section> parse_sections(std::string_view text);
const Section* find_section(const std::vector<Section>& sections, std::string_view name);

// Non-empty trimmed lines of a section body with a leading "- " removed.
std::vector<std::string> list_items(std::string_view body);

}  // namespace archrecon::prompt
