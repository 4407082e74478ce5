#pragma once

#include <string>
#include <string_view>

namespace archrecon::detail {

// First contiguous comment block (or Python docstring) in the file, joined
// into one line. Comment syntax follows the path's language.
std::string first_comment(std::string_view path, std::string_view content);

// The comment block, or a one-line description when the file has none.
std::string extractive_summary(std::string_view path, std::string_view content);

}  // namespace archrecon::detail
