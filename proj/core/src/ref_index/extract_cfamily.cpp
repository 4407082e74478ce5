#include "facts.hpp"

namespace archrecon::refs {

namespace {

// Splits "a::b::c" into ("c", "a::b").
std::pair<std::string, std::string> split_scoped(std::string_view text) {
  const auto pos = text.rfind("::");
  if (pos == std::string_view::npos) return {std::string(text), ""};
  return {std::string(text.substr(pos + 2)), std::string(text.substr(0, pos))};
}

std::string strip_template_args(std::string_view text) {
  std::string out;
  int depth = 0;
  for (char c : text) {
    if (c == '<') ++depth;
    else if (c == '>') --depth;
    else if (depth == 0) out += c;
  }
  return out;
}

std::string declared_name(ts::Node d) {
  while (d && !d.is("identifier")) {
    if (d.is("function_declarator") || d.is("array_declarator")) return {};
    auto inner = d.field("declarator");
    if (!inner) {
      // reference_declarator has no declarator field.
      auto kids = d.named_children();
      if (kids.empty()) return {};
      inner = kids.back();
    }
    d = inner;
  }
  return d ? std::string(d.text()) : std::string();
}

// Declared types of parameters and locals, with "::" written as ".".
LocalTypes local_types(const ts::Node& fn) {
  LocalTypes out;
  ts::visit(fn, [&](const ts::Node& n) {
    if (!n.is("declaration") && !n.is("parameter_declaration") &&
        !n.is("optional_parameter_declaration"))
      return true;
    auto type = n.field("type");
    if (type.is("template_type")) type = type.field("name");
    if (!type.is("type_identifier") && !type.is("qualified_identifier")) return true;
    auto t = strip_template_args(type.text());
    for (std::size_t pos; (pos = t.find("::")) != std::string::npos;) t.replace(pos, 2, ".");
    if (n.is("declaration")) {
      for (auto& d : n.named_children()) {
        if (d == type) continue;
        if (auto name = declared_name(d); !name.empty()) out[name] = t;
      }
    } else if (auto name = declared_name(n.field("declarator")); !name.empty()) {
      out[name] = t;
    }
    return true;
  });
  return out;
}

class CFamilyExtractor {
public:
  CFamilyExtractor(const SourceFile& file, FileFacts& facts) : file_(file), facts_(facts) {}

  void run(const ts::Node& root) {
    ts::visit(root, [&](const ts::Node& n) {
      if (n.is("preproc_include")) {
        include(n);
        return false;
      }
      return true;
    });
    scope(root);
  }

private:
  void include(const ts::Node& n) {
    auto path = n.field("path");
    ImportDecl d;
    auto text = path.text();
    if (path.is("system_lib_string")) {
      d.style = ImportStyle::CSystemInclude;
    } else if (path.is("string_literal")) {
      d.style = ImportStyle::CInclude;
    } else {
      return;
    }
    if (text.size() >= 2) text = text.substr(1, text.size() - 2);
    d.spec = std::string(text);
    facts_.imports.push_back(std::move(d));
  }

  // Declarations at namespace scope, looking through namespaces, extern "C"
  // blocks, templates and preprocessor conditionals.
  void scope(const ts::Node& container) {
    for (auto& n : container.named_children()) declaration(n);
  }

  void declaration(const ts::Node& n) {
    if (n.is("namespace_definition") || n.is("linkage_specification")) {
      if (auto body = n.field("body")) scope(body);
    } else if (n.is("declaration_list") || n.is("preproc_if") || n.is("preproc_ifdef") ||
               n.is("preproc_else") || n.is("preproc_elif") || n.is("template_declaration")) {
      scope(n);
    } else if (n.is("class_specifier") || n.is("struct_specifier")) {
      record(n, "");
    } else if (n.is("type_definition")) {
      auto type = n.field("type");
      if ((type.is("struct_specifier") || type.is("class_specifier")) && type.field("body")) {
        std::string alias;
        if (auto decl = n.field("declarator")) alias = std::string(decl.text());
        record(type, alias);
      }
    } else if (n.is("declaration")) {
      auto type = n.field("type");
      if ((type.is("class_specifier") || type.is("struct_specifier")) && type.field("body"))
        record(type, "");
    } else if (n.is("function_definition")) {
      function(n, "");
    }
  }

  void record(const ts::Node& n, const std::string& alias) {
    auto body = n.field("body");
    if (!body) return;
    std::string cls;
    if (auto name = n.field("name")) cls = split_scoped(strip_template_args(name.text())).first;
    if (cls.empty()) cls = alias;
    if (cls.empty()) return;
    const auto cls_id = symbol_id(file_.path, "", cls);
    facts_.symbols.push_back({cls, "", Granularity::Class});

    if (auto bases = n.first_named_child_of("base_class_clause")) {
      for (auto& b : bases.named_children()) {
        if (b.is("access_specifier")) continue;
        auto [name, qual] = split_scoped(strip_template_args(b.text()));
        if (!name.empty()) facts_.bases.push_back({cls_id, name, qual});
      }
    }
    for (auto m : body.named_children()) {
      if (m.is("template_declaration")) {
        if (auto inner = m.first_named_child_of("function_definition")) m = inner;
      }
      if (m.is("function_definition")) {
        function(m, cls);
      } else if (m.is("field_declaration")) {
        // Default member initializers may call functions.
        if (auto value = m.field("default_value")) collect_calls(value, cls_id);
      }
    }
  }

  static ts::Node function_declarator(ts::Node d) {
    while (d && !d.is("function_declarator")) {
      auto inner = d.field("declarator");
      if (!inner) return {};
      d = inner;
    }
    return d;
  }

  void function(const ts::Node& n, const std::string& enclosing) {
    auto fd = function_declarator(n.field("declarator"));
    if (!fd) return;
    auto name_node = fd.field("declarator");
    if (!name_node) return;
    auto [name, scope] = split_scoped(strip_template_args(name_node.text()));
    std::string owner = enclosing;
    if (owner.empty() && !scope.empty()) owner = split_scoped(scope).first;
    if (name.empty()) return;
    facts_.symbols.push_back({name, owner, Granularity::Function});
    collect_calls(n.field("body"), symbol_id(file_.path, owner, name), local_types(n));
  }

  void collect_calls(const ts::Node& body, const std::string& from, const LocalTypes& locals = {}) {
    if (!body) return;
    const auto first = facts_.calls.size();
    ts::visit(body, [&](const ts::Node& n) {
      if (n.is("call_expression")) {
        auto fn = n.field("function");
        if (fn.is("template_function")) fn = fn.field("name");
        if (fn.is("identifier")) {
          facts_.calls.push_back({from, std::string(fn.text()), "", false});
        } else if (fn.is("field_expression")) {
          auto arg = fn.field("argument");
          auto field = fn.field("field");
          auto name = split_scoped(strip_template_args(field.text())).first;
          facts_.calls.push_back({from, name, std::string(arg.text()), arg.is("this")});
        } else if (fn.is("qualified_identifier")) {
          auto [name, qual] = split_scoped(strip_template_args(fn.text()));
          facts_.calls.push_back({from, name, qual, false});
        }
      } else if (n.is("new_expression")) {
        auto [name, qual] = split_scoped(strip_template_args(n.field("type").text()));
        if (!name.empty()) facts_.calls.push_back({from, name, qual, false});
      }
      return true;
    });
    apply_local_types(facts_.calls, first, locals);
  }

  const SourceFile& file_;
  FileFacts& facts_;
};

}  // namespace

FileFacts extract_cfamily(const SourceFile& file, const ts::Node& root) {
  FileFacts facts;
  CFamilyExtractor(file, facts).run(root);
  return facts;
}

}  // namespace archrecon::refs
