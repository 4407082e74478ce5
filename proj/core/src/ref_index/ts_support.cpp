#include "ts_support.hpp"

#include <stdexcept>

extern "C" {
const TSLanguage* tree_sitter_c();
const TSLanguage* tree_sitter_cpp();
const TSLanguage* tree_sitter_go();
const TSLanguage* tree_sitter_java();
const TSLanguage* tree_sitter_javascript();
const TSLanguage* tree_sitter_python();
const TSLanguage* tree_sitter_rust();
const TSLanguage* tree_sitter_typescript();
}

namespace archrecon::ts {

const TSLanguage* grammar_for(Language lang) {
  switch (lang) {
    case Language::C: return tree_sitter_c();
    case Language::Cpp: return tree_sitter_cpp();
    case Language::Go: return tree_sitter_go();
    case Language::Java: return tree_sitter_java();
    case Language::JavaScript: return tree_sitter_javascript();
    case Language::Python: return tree_sitter_python();
    case Language::Rust: return tree_sitter_rust();
    case Language::TypeScript: return tree_sitter_typescript();
    case Language::Yaml:
    case Language::Other: return nullptr;
  }
  return nullptr;
}

Parser::Parser(const TSLanguage* language) : parser_(ts_parser_new()) {
  if (!parser_ || !ts_parser_set_language(parser_, language)) {
    if (parser_) ts_parser_delete(parser_);
    throw std::runtime_error("tree-sitter rejected the grammar (ABI mismatch)");
  }
}

Parser::~Parser() { ts_parser_delete(parser_); }

TreePtr Parser::parse(std::string_view source) {
  return TreePtr(ts_parser_parse_string(parser_, nullptr, source.data(),
                                        static_cast<uint32_t>(source.size())));
}

}  // namespace archrecon::ts
