#include <cctype>

#include "facts.hpp"

namespace archrecon::refs {

namespace {

std::pair<std::string, std::string> rust_type_name(ts::Node t) {
  if (t.is("generic_type")) t = t.field("type");
  if (t.is("type_identifier")) return {std::string(t.text()), ""};
  if (t.is("scoped_type_identifier"))
    return {std::string(t.field("name").text()), std::string(t.field("path").text())};
  return {};
}

std::string rust_type_text(ts::Node t) {
  while (t.is("reference_type") || t.is("pointer_type")) t = t.field("type");
  auto [name, path] = rust_type_name(t);
  if (name.empty()) return {};
  return path.empty() ? name : path + "::" + name;
}

// Annotated bindings plus `let x = T::new(..)` and `let x = T { .. }`.
LocalTypes local_types(const ts::Node& fn) {
  LocalTypes out;
  ts::visit(fn, [&](const ts::Node& n) {
    if (!n.is("let_declaration") && !n.is("parameter")) return true;
    auto pattern = n.field("pattern");
    if (!pattern.is("identifier")) return true;
    auto t = rust_type_text(n.field("type"));
    if (t.empty() && n.is("let_declaration")) {
      auto value = n.field("value");
      if (value.is("call_expression") && value.field("function").is("scoped_identifier")) {
        auto path = value.field("function").field("path");
        const auto last = last_segment(path.text());
        if (path && !last.empty() && std::isupper(static_cast<unsigned char>(last.front())))
          t = std::string(path.text());
      } else if (value.is("struct_expression")) {
        t = rust_type_text(value.field("name"));
      }
    }
    if (!t.empty()) out[std::string(pattern.text())] = t;
    return true;
  });
  return out;
}

class RustExtractor {
public:
  RustExtractor(const SourceFile& file, FileFacts& facts) : file_(file), facts_(facts) {}

  void run(const ts::Node& root) { items(root); }

private:
  void items(const ts::Node& container) {
    for (auto& n : container.named_children()) {
      if (n.is("mod_item")) {
        if (auto body = n.field("body")) {
          items(body);
        } else {
          ImportDecl d;
          d.style = ImportStyle::RustMod;
          d.spec = std::string(n.field("name").text());
          facts_.imports.push_back(std::move(d));
        }
      } else if (n.is("use_declaration")) {
        use_tree(n.field("argument"), "");
      } else if (n.is("struct_item") || n.is("enum_item") || n.is("union_item") ||
                 n.is("type_item")) {
        facts_.symbols.push_back({std::string(n.field("name").text()), "", Granularity::Class});
      } else if (n.is("trait_item")) {
        trait_item(n);
      } else if (n.is("impl_item")) {
        impl_item(n);
      } else if (n.is("function_item")) {
        const auto name = std::string(n.field("name").text());
        facts_.symbols.push_back({name, "", Granularity::Function});
        collect_calls(n.field("body"), symbol_id(file_.path, "", name), local_types(n));
      }
    }
  }

  void add_use(const std::string& path, const std::string& alias, bool wildcard) {
    ImportDecl d;
    d.style = ImportStyle::RustUse;
    d.spec = path;
    d.alias = alias;
    d.wildcard = wildcard;
    facts_.imports.push_back(std::move(d));
  }

  static std::string join_path(const std::string& prefix, std::string_view tail) {
    return prefix.empty() ? std::string(tail) : prefix + "::" + std::string(tail);
  }

  void use_tree(const ts::Node& n, const std::string& prefix) {
    if (!n) return;
    if (n.is("identifier") || n.is("scoped_identifier") || n.is("crate") || n.is("super")) {
      const auto path = join_path(prefix, n.text());
      add_use(path, last_segment(path), false);
    } else if (n.is("self")) {
      add_use(prefix, last_segment(prefix), false);
    } else if (n.is("use_as_clause")) {
      add_use(join_path(prefix, n.field("path").text()), std::string(n.field("alias").text()),
              false);
    } else if (n.is("scoped_use_list")) {
      const auto path = n.field("path") ? join_path(prefix, n.field("path").text()) : prefix;
      use_tree(n.field("list"), path);
    } else if (n.is("use_list")) {
      for (auto& c : n.named_children()) use_tree(c, prefix);
    } else if (n.is("use_wildcard")) {
      auto kids = n.named_children();
      const auto path = kids.empty() ? prefix : join_path(prefix, kids.front().text());
      add_use(path, "", true);
    }
  }

  void trait_item(const ts::Node& n) {
    const auto name = std::string(n.field("name").text());
    const auto id = symbol_id(file_.path, "", name);
    facts_.symbols.push_back({name, "", Granularity::Class});
    if (auto bounds = n.field("bounds")) {
      for (auto& b : bounds.named_children()) {
        auto [base, qual] = rust_type_name(b);
        if (!base.empty()) facts_.bases.push_back({id, base, qual});
      }
    }
    if (auto body = n.field("body")) methods(body, name);
  }

  void impl_item(const ts::Node& n) {
    const auto owner = rust_type_name(n.field("type")).first;
    if (owner.empty()) return;
    if (auto trait = n.field("trait")) {
      auto [base, qual] = rust_type_name(trait);
      if (!base.empty()) facts_.bases.push_back({symbol_id(file_.path, "", owner), base, qual});
    }
    if (auto body = n.field("body")) methods(body, owner);
  }

  void methods(const ts::Node& body, const std::string& owner) {
    for (auto& m : body.named_children()) {
      if (!m.is("function_item")) continue;
      const auto name = std::string(m.field("name").text());
      facts_.symbols.push_back({name, owner, Granularity::Function});
      collect_calls(m.field("body"), symbol_id(file_.path, owner, name), local_types(m));
    }
  }

  void collect_calls(const ts::Node& body, const std::string& from, const LocalTypes& locals) {
    if (!body) return;
    const auto first = facts_.calls.size();
    ts::visit(body, [&](const ts::Node& n) {
      if (!n.is("call_expression")) return true;
      auto fn = n.field("function");
      if (fn.is("generic_function")) fn = fn.field("function");
      if (fn.is("identifier")) {
        facts_.calls.push_back({from, std::string(fn.text()), "", false});
      } else if (fn.is("field_expression")) {
        auto value = fn.field("value");
        facts_.calls.push_back({from, std::string(fn.field("field").text()),
                                std::string(value.text()), value.is("self")});
      } else if (fn.is("scoped_identifier")) {
        auto path = fn.field("path");
        facts_.calls.push_back({from, std::string(fn.field("name").text()),
                                path ? std::string(path.text()) : std::string(), false});
      }
      return true;
    });
    apply_local_types(facts_.calls, first, locals);
  }

  const SourceFile& file_;
  FileFacts& facts_;
};

}  // namespace

FileFacts extract_rust(const SourceFile& file, const ts::Node& root) {
  FileFacts facts;
  RustExtractor(file, facts).run(root);
  return facts;
}

}  // namespace archrecon::refs
