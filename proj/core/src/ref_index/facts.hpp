#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "archrecon/ref_index.hpp"
#include "archrecon/repo_model.hpp"
#include "ts_support.hpp"

namespace archrecon::refs {

// A declared class or function. `owner` is the enclosing class name for
// methods and empty for free functions and classes.
struct SymbolDecl {
  std::string name;
  std::string owner;
  Granularity granularity = Granularity::Function;
};

// A call (or constructor use) made from inside a declared symbol.
struct CallSite {
  std::string from;       // node id of the enclosing symbol
  std::string name;       // callee identifier
  std::string qualifier;  // receiver/scope text, empty for bare calls
  bool on_self = false;   // self./this./receiver-variable call
  // Declared or constructed type of a local receiver, e.g. "Cart" or
  // "ledger.Server"; empty when unknown.
  std::string receiver_type;
};

using LocalTypes = std::map<std::string, std::string>;

// Fills receiver_type for calls[first..] whose qualifier is a typed local.
inline void apply_local_types(std::vector<CallSite>& calls, std::size_t first,
                              const LocalTypes& locals) {
  if (locals.empty()) return;
  for (std::size_t i = first; i < calls.size(); ++i) {
    auto& c = calls[i];
    if (c.on_self || c.qualifier.empty()) continue;
    if (auto it = locals.find(c.qualifier); it != locals.end()) c.receiver_type = it->second;
  }
}

struct BaseRef {
  std::string from;  // class node id
  std::string name;
  std::string qualifier;
};

enum class ImportStyle {
  PythonModule,   // import a.b [as x]
  PythonFrom,     // from a.b import x, y   (level = leading dots)
  JavaClass,      // import a.b.C; / import static a.b.C.m;
  JavaWildcard,   // import a.b.*;
  GoPackage,      // import [alias] "a/b"
  CInclude,       // #include "x.h"
  CSystemInclude, // #include <x.h>
  EcmaModule,     // import ... from './x' / require('./x')
  RustMod,        // mod x;
  RustUse,        // use crate::a::b::{c, d as e};
};

struct ImportDecl {
  ImportStyle style = ImportStyle::PythonModule;
  std::string spec;
  int level = 0;
  // Local binding for the whole module (alias / namespace import).
  std::string alias;
  // Imported member names and their local aliases.
  std::vector<std::pair<std::string, std::string>> names;
  bool wildcard = false;
};

struct FileFacts {
  std::string path;
  Language language = Language::Other;
  bool parsed = false;
  std::vector<SymbolDecl> symbols;
  std::vector<CallSite> calls;
  std::vector<BaseRef> bases;
  std::vector<ImportDecl> imports;
  std::string package;  // Go package / Java package clause
  std::vector<std::string> diagnostics;
};

inline std::string symbol_id(const std::string& path, const std::string& owner,
                             const std::string& name) {
  return owner.empty() ? path + "::" + name : path + "::" + owner + "::" + name;
}

FileFacts extract_python(const SourceFile& file, const ts::Node& root);
FileFacts extract_java(const SourceFile& file, const ts::Node& root);
FileFacts extract_go(const SourceFile& file, const ts::Node& root);
FileFacts extract_cfamily(const SourceFile& file, const ts::Node& root);
FileFacts extract_ecmascript(const SourceFile& file, const ts::Node& root);
FileFacts extract_rust(const SourceFile& file, const ts::Node& root);

// Parses one file and dispatches to its language extractor.
FileFacts extract_facts(const SourceFile& file);

// Cross-file phase: binds imports, calls and bases into a graph.
ReferenceGraph resolve(const RepoModel& repo, const std::vector<FileFacts>& facts);

// Last segment of a dotted / scoped / slashed name.
std::string last_segment(std::string_view qualified);

}  // namespace archrecon::refs
