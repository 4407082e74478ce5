#include <cctype>

#include "facts.hpp"

namespace archrecon::refs {

namespace {

bool dotted_name_text(std::string_view t) {
  if (t.empty()) return false;
  for (char c : t)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  return true;
}

// Annotated parameters and `x = SomeClass(...)` assignments inside `scope`.
LocalTypes local_types(const ts::Node& scope) {
  LocalTypes out;
  auto put = [&](const ts::Node& name, std::string_view type) {
    if (name.is("identifier") && dotted_name_text(type)) out[std::string(name.text())] = std::string(type);
  };
  ts::visit(scope, [&](const ts::Node& n) {
    if (!(n == scope) && (n.is("function_definition") || n.is("class_definition"))) return false;
    if (n.is("typed_parameter")) {
      if (auto id = n.first_named_child_of("identifier")) put(id, n.field("type").text());
    } else if (n.is("typed_default_parameter")) {
      put(n.field("name"), n.field("type").text());
    } else if (n.is("assignment")) {
      auto left = n.field("left");
      if (auto type = n.field("type")) {
        put(left, type.text());
      } else if (auto right = n.field("right"); right.is("call")) {
        const auto callee = right.field("function").text();
        const auto last = last_segment(callee);
        if (!last.empty() && std::isupper(static_cast<unsigned char>(last.front()))) put(left, callee);
      }
    }
    return true;
  });
  return out;
}

// `self.x = SomeClass(...)` anywhere in a class body, keyed "self.x".
LocalTypes attribute_types(const ts::Node& body) {
  LocalTypes out;
  ts::visit(body, [&](const ts::Node& n) {
    if (n.is("class_definition")) return false;
    if (!n.is("assignment")) return true;
    auto left = n.field("left");
    auto right = n.field("right");
    if (!left.is("attribute") || left.field("object").text() != "self" || !right.is("call")) return true;
    const auto callee = right.field("function").text();
    const auto last = last_segment(callee);
    if (!last.empty() && std::isupper(static_cast<unsigned char>(last.front())) && dotted_name_text(callee))
      out[std::string(left.text())] = std::string(callee);
    return true;
  });
  return out;
}

class PythonExtractor {
public:
  PythonExtractor(const SourceFile& file, FileFacts& facts) : file_(file), facts_(facts) {}

  void run(const ts::Node& root) {
    ts::visit(root, [&](const ts::Node& n) {
      if (n.is("import_statement")) {
        import_statement(n);
        return false;
      }
      if (n.is("import_from_statement")) {
        from_import(n);
        return false;
      }
      return true;
    });
    for (auto& child : root.named_children()) top_level(child);
  }

private:
  void top_level(ts::Node n) {
    if (n.is("decorated_definition")) n = n.field("definition");
    if (n.is("class_definition")) {
      class_definition(n);
    } else if (n.is("function_definition")) {
      const auto name = std::string(n.field("name").text());
      facts_.symbols.push_back({name, "", Granularity::Function});
      collect_calls(n.field("body"), symbol_id(file_.path, "", name), local_types(n));
    }
  }

  void class_definition(const ts::Node& n) {
    const auto cls = std::string(n.field("name").text());
    const auto cls_id = symbol_id(file_.path, "", cls);
    facts_.symbols.push_back({cls, "", Granularity::Class});
    if (auto supers = n.field("superclasses")) {
      for (auto& s : supers.named_children()) {
        if (s.is("identifier")) {
          facts_.bases.push_back({cls_id, std::string(s.text()), ""});
        } else if (s.is("attribute")) {
          facts_.bases.push_back({cls_id, std::string(s.field("attribute").text()),
                                  std::string(s.field("object").text())});
        }
      }
    }
    auto body = n.field("body");
    if (!body) return;
    const auto attrs = attribute_types(body);
    for (auto member : body.named_children()) {
      if (member.is("decorated_definition")) member = member.field("definition");
      if (member.is("function_definition")) {
        const auto name = std::string(member.field("name").text());
        facts_.symbols.push_back({name, cls, Granularity::Function});
        auto locals = local_types(member);
        locals.insert(attrs.begin(), attrs.end());
        collect_calls(member.field("body"), symbol_id(file_.path, cls, name), locals);
      } else if (!member.is("class_definition")) {
        collect_calls(member, cls_id, {});
      }
    }
  }

  void collect_calls(const ts::Node& body, const std::string& from, const LocalTypes& locals) {
    if (!body) return;
    const auto first = facts_.calls.size();
    ts::visit(body, [&](const ts::Node& n) {
      if (n.is("class_definition")) return false;
      if (!n.is("call")) return true;
      auto fn = n.field("function");
      if (fn.is("identifier")) {
        facts_.calls.push_back({from, std::string(fn.text()), "", false});
      } else if (fn.is("attribute")) {
        const auto object = std::string(fn.field("object").text());
        facts_.calls.push_back({from, std::string(fn.field("attribute").text()), object,
                                object == "self" || object == "cls"});
      }
      return true;
    });
    apply_local_types(facts_.calls, first, locals);
  }

  void import_statement(const ts::Node& n) {
    for (auto& c : n.named_children()) {
      ImportDecl d;
      d.style = ImportStyle::PythonModule;
      if (c.is("dotted_name")) {
        d.spec = std::string(c.text());
      } else if (c.is("aliased_import")) {
        d.spec = std::string(c.field("name").text());
        d.alias = std::string(c.field("alias").text());
      } else {
        continue;
      }
      facts_.imports.push_back(std::move(d));
    }
  }

  void from_import(const ts::Node& n) {
    ImportDecl d;
    d.style = ImportStyle::PythonFrom;
    auto module = n.field("module_name");
    if (module.is("relative_import")) {
      if (auto prefix = module.first_named_child_of("import_prefix"))
        d.level = static_cast<int>(prefix.text().size());
      if (auto dotted = module.first_named_child_of("dotted_name")) d.spec = std::string(dotted.text());
    } else if (module) {
      d.spec = std::string(module.text());
    }
    for (auto& c : n.named_children()) {
      if (c.is("wildcard_import")) d.wildcard = true;
    }
    // `name` is a repeated field; walk children and skip the module itself.
    for (auto& c : n.named_children()) {
      if (c == module) continue;
      if (c.is("dotted_name")) {
        d.names.emplace_back(std::string(c.text()), std::string(c.text()));
      } else if (c.is("aliased_import")) {
        d.names.emplace_back(std::string(c.field("name").text()),
                             std::string(c.field("alias").text()));
      }
    }
    facts_.imports.push_back(std::move(d));
  }

  const SourceFile& file_;
  FileFacts& facts_;
};

}  // namespace

FileFacts extract_python(const SourceFile& file, const ts::Node& root) {
  FileFacts facts;
  PythonExtractor(file, facts).run(root);
  return facts;
}

}  // namespace archrecon::refs
