#include "facts.hpp"

namespace archrecon::refs {

namespace {

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'' || s.front() == '`'))
    s = s.substr(1, s.size() - 2);
  return std::string(s);
}

bool is_function_value(const ts::Node& v) {
  return v.is("arrow_function") || v.is("function_expression") || v.is("function") ||
         v.is("generator_function");
}

// Name of a type annotation or constructor expression, e.g. "Cart" or "ns.Cart".
std::string type_text(ts::Node t) {
  if (t.is("type_annotation")) {
    auto kids = t.named_children();
    if (kids.empty()) return {};
    t = kids.front();
  }
  if (t.is("generic_type")) t = t.field("name");
  if (t.is("type_identifier") || t.is("identifier") || t.is("nested_type_identifier") ||
      t.is("member_expression"))
    return std::string(t.text());
  return {};
}

LocalTypes local_types(const ts::Node& scope) {
  LocalTypes out;
  ts::visit(scope, [&](const ts::Node& n) {
    if (n.is("variable_declarator")) {
      auto name = n.field("name");
      if (!name.is("identifier")) return true;
      auto t = type_text(n.field("type"));
      if (auto value = n.field("value"); t.empty() && value.is("new_expression"))
        t = type_text(value.field("constructor"));
      if (!t.empty()) out[std::string(name.text())] = t;
    } else if (n.is("required_parameter") || n.is("optional_parameter")) {
      auto name = n.field("pattern");
      auto t = type_text(n.field("type"));
      if (name.is("identifier") && !t.empty()) out[std::string(name.text())] = t;
    }
    return true;
  });
  return out;
}

// Field types reachable as `this.x` inside a class body.
LocalTypes field_types(const ts::Node& body) {
  LocalTypes out;
  for (auto& m : body.named_children()) {
    if (m.is("public_field_definition") || m.is("field_definition")) {
      auto name = m.field("name") ? m.field("name") : m.field("property");
      auto t = type_text(m.field("type"));
      if (auto value = m.field("value"); t.empty() && value.is("new_expression"))
        t = type_text(value.field("constructor"));
      if (name && !t.empty()) out["this." + std::string(name.text())] = t;
    } else if (m.is("method_definition") && m.field("name").text() == "constructor") {
      // Parameter properties: constructor(private api: ApiClient)
      if (auto params = m.field("parameters"))
        for (auto& p : params.named_children()) {
          bool property = false;
          for (auto& c : p.children())
            if (c.is("accessibility_modifier") || c.is("readonly")) property = true;
          auto t = type_text(p.field("type"));
          if (property && p.field("pattern").is("identifier") && !t.empty())
            out["this." + std::string(p.field("pattern").text())] = t;
        }
      ts::visit(m.field("body"), [&](const ts::Node& n) {
        if (!n.is("assignment_expression")) return true;
        auto left = n.field("left");
        auto right = n.field("right");
        if (left.is("member_expression") && left.field("object").is("this") && right.is("new_expression"))
          if (auto t = type_text(right.field("constructor")); !t.empty()) out[std::string(left.text())] = t;
        return true;
      });
    }
  }
  return out;
}

class EcmaExtractor {
public:
  EcmaExtractor(const SourceFile& file, FileFacts& facts) : file_(file), facts_(facts) {}

  void run(const ts::Node& root) {
    ts::visit(root, [&](const ts::Node& n) {
      if (n.is("import_statement")) {
        import_statement(n);
        return false;
      }
      if (n.is("export_statement") && n.field("source")) {
        ImportDecl d;
        d.style = ImportStyle::EcmaModule;
        d.spec = unquote(n.field("source").text());
        facts_.imports.push_back(std::move(d));
      }
      if (n.is("call_expression")) dynamic_import(n);
      return true;
    });
    for (auto& n : root.named_children()) top_level(n);
  }

private:
  void import_statement(const ts::Node& n) {
    ImportDecl d;
    d.style = ImportStyle::EcmaModule;
    d.spec = unquote(n.field("source").text());
    if (auto clause = n.first_named_child_of("import_clause")) {
      for (auto& c : clause.named_children()) {
        if (c.is("identifier")) {
          d.alias = std::string(c.text());
        } else if (c.is("namespace_import")) {
          if (auto id = c.first_named_child_of("identifier")) d.alias = std::string(id.text());
        } else if (c.is("named_imports")) {
          for (auto& spec : c.named_children()) {
            if (!spec.is("import_specifier")) continue;
            const auto name = std::string(spec.field("name").text());
            const auto alias = spec.field("alias") ? std::string(spec.field("alias").text()) : name;
            d.names.emplace_back(name, alias);
          }
        }
      }
    }
    if (!d.spec.empty()) facts_.imports.push_back(std::move(d));
  }

  // require('x') and import('x').
  void dynamic_import(const ts::Node& call) {
    auto fn = call.field("function");
    if (!(fn.is("identifier") && fn.text() == "require") && !fn.is("import")) return;
    auto args = call.field("arguments");
    if (!args) return;
    auto kids = args.named_children();
    if (kids.empty() || !kids.front().is("string")) return;
    ImportDecl d;
    d.style = ImportStyle::EcmaModule;
    d.spec = unquote(kids.front().text());
    auto parent = call.parent();
    if (parent.is("variable_declarator")) {
      auto name = parent.field("name");
      if (name.is("identifier")) {
        d.alias = std::string(name.text());
      } else if (name.is("object_pattern")) {
        for (auto& p : name.named_children()) {
          if (p.is("shorthand_property_identifier_pattern")) {
            d.names.emplace_back(std::string(p.text()), std::string(p.text()));
          } else if (p.is("pair_pattern")) {
            d.names.emplace_back(std::string(p.field("key").text()),
                                 std::string(p.field("value").text()));
          }
        }
      }
    }
    facts_.imports.push_back(std::move(d));
  }

  void top_level(ts::Node n) {
    if (n.is("export_statement")) {
      auto decl = n.field("declaration");
      if (!decl) return;
      n = decl;
    }
    if (n.is("class_declaration") || n.is("abstract_class_declaration")) {
      class_declaration(n);
    } else if (n.is("interface_declaration")) {
      interface_declaration(n);
    } else if (n.is("function_declaration") || n.is("generator_function_declaration")) {
      const auto name = std::string(n.field("name").text());
      facts_.symbols.push_back({name, "", Granularity::Function});
      collect_calls(n.field("body"), symbol_id(file_.path, "", name), local_types(n));
    } else if (n.is("lexical_declaration") || n.is("variable_declaration")) {
      for (auto& d : n.named_children()) {
        if (!d.is("variable_declarator")) continue;
        auto name = d.field("name");
        auto value = d.field("value");
        if (name.is("identifier") && value && is_function_value(value)) {
          facts_.symbols.push_back({std::string(name.text()), "", Granularity::Function});
          collect_calls(value.field("body"),
                        symbol_id(file_.path, "", std::string(name.text())), local_types(value));
        }
      }
    }
  }

  void add_base(const std::string& cls_id, const ts::Node& t) {
    if (t.is("identifier") || t.is("type_identifier")) {
      facts_.bases.push_back({cls_id, std::string(t.text()), ""});
    } else if (t.is("member_expression")) {
      facts_.bases.push_back({cls_id, std::string(t.field("property").text()),
                              std::string(t.field("object").text())});
    } else if (t.is("generic_type")) {
      if (auto name = t.field("name")) add_base(cls_id, name);
    } else if (t.is("nested_type_identifier")) {
      facts_.bases.push_back({cls_id, std::string(t.field("name").text()),
                              std::string(t.field("module").text())});
    }
  }

  void class_declaration(const ts::Node& n) {
    auto name_node = n.field("name");
    if (!name_node) return;
    const auto cls = std::string(name_node.text());
    const auto cls_id = symbol_id(file_.path, "", cls);
    facts_.symbols.push_back({cls, "", Granularity::Class});
    if (auto heritage = n.first_named_child_of("class_heritage")) {
      for (auto& h : heritage.named_children()) {
        if (h.is("extends_clause")) {
          add_base(cls_id, h.field("value"));
        } else if (h.is("implements_clause")) {
          for (auto& t : h.named_children()) add_base(cls_id, t);
        } else {
          add_base(cls_id, h);
        }
      }
    }
    auto body = n.field("body");
    if (!body) return;
    const auto fields = field_types(body);
    auto with_fields = [&](const ts::Node& scope) {
      auto locals = local_types(scope);
      locals.insert(fields.begin(), fields.end());
      return locals;
    };
    for (auto& m : body.named_children()) {
      if (m.is("method_definition")) {
        const auto name = std::string(m.field("name").text());
        facts_.symbols.push_back({name, cls, Granularity::Function});
        collect_calls(m.field("body"), symbol_id(file_.path, cls, name), with_fields(m));
      } else if (m.is("public_field_definition") || m.is("field_definition")) {
        auto name = m.field("name") ? m.field("name") : m.field("property");
        auto value = m.field("value");
        if (name && value && is_function_value(value)) {
          facts_.symbols.push_back({std::string(name.text()), cls, Granularity::Function});
          collect_calls(value.field("body"), symbol_id(file_.path, cls, std::string(name.text())),
                        with_fields(value));
        } else if (value) {
          collect_calls(value, cls_id);
        }
      }
    }
  }

  void interface_declaration(const ts::Node& n) {
    const auto name = std::string(n.field("name").text());
    const auto id = symbol_id(file_.path, "", name);
    facts_.symbols.push_back({name, "", Granularity::Class});
    if (auto ext = n.first_named_child_of("extends_type_clause"))
      for (auto& t : ext.named_children()) add_base(id, t);
  }

  void collect_calls(const ts::Node& body, const std::string& from, const LocalTypes& locals = {}) {
    if (!body) return;
    const auto first = facts_.calls.size();
    ts::visit(body, [&](const ts::Node& n) {
      if (n.is("call_expression")) {
        auto fn = n.field("function");
        if (fn.is("identifier")) {
          if (fn.text() != "require") facts_.calls.push_back({from, std::string(fn.text()), "", false});
        } else if (fn.is("member_expression")) {
          auto obj = fn.field("object");
          facts_.calls.push_back({from, std::string(fn.field("property").text()),
                                  std::string(obj.text()), obj.is("this")});
        }
      } else if (n.is("new_expression")) {
        auto ctor = n.field("constructor");
        if (ctor.is("identifier")) {
          facts_.calls.push_back({from, std::string(ctor.text()), "", false});
        } else if (ctor.is("member_expression")) {
          facts_.calls.push_back({from, std::string(ctor.field("property").text()),
                                  std::string(ctor.field("object").text()), false});
        }
      }
      return true;
    });
    apply_local_types(facts_.calls, first, locals);
  }

  const SourceFile& file_;
  FileFacts& facts_;
};

}  // namespace

FileFacts extract_ecmascript(const SourceFile& file, const ts::Node& root) {
  FileFacts facts;
  EcmaExtractor(file, facts).run(root);
  return facts;
}

}  // namespace archrecon::refs
