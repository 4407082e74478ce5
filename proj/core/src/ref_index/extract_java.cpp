#include "facts.hpp"

namespace archrecon::refs {

namespace {

bool is_type_declaration(const ts::Node& n) {
  return n.is("class_declaration") || n.is("interface_declaration") ||
         n.is("enum_declaration") || n.is("record_declaration") ||
         n.is("annotation_type_declaration");
}

// (name, qualifier) for a type reference such as Foo, a.b.Foo or Foo<T>.
std::pair<std::string, std::string> type_name(ts::Node t) {
  if (t.is("generic_type")) {
    auto kids = t.named_children();
    if (kids.empty()) return {};
    t = kids.front();
  }
  if (t.is("type_identifier")) return {std::string(t.text()), ""};
  if (t.is("scoped_type_identifier")) {
    auto kids = t.named_children();
    if (kids.empty()) return {};
    const auto full = std::string(t.text());
    const auto name = std::string(kids.back().text());
    const auto dot = full.rfind('.');
    return {name, dot == std::string::npos ? "" : full.substr(0, dot)};
  }
  return {};
}

class JavaExtractor {
public:
  JavaExtractor(const SourceFile& file, FileFacts& facts) : file_(file), facts_(facts) {}

  void run(const ts::Node& root) {
    for (auto& n : root.named_children()) {
      if (n.is("package_declaration")) {
        for (auto& c : n.named_children())
          if (c.is("scoped_identifier") || c.is("identifier")) facts_.package = std::string(c.text());
      } else if (n.is("import_declaration")) {
        import_declaration(n);
      } else if (is_type_declaration(n)) {
        type_declaration(n);
      }
    }
  }

private:
  void import_declaration(const ts::Node& n) {
    ImportDecl d;
    d.style = ImportStyle::JavaClass;
    for (auto& c : n.children()) {
      if (c.is("scoped_identifier") || c.is("identifier")) d.spec = std::string(c.text());
      if (c.is("asterisk")) d.wildcard = true;
      if (c.is("static")) d.level = 1;
    }
    if (d.wildcard) d.style = ImportStyle::JavaWildcard;
    if (!d.spec.empty()) facts_.imports.push_back(std::move(d));
  }

  void type_declaration(const ts::Node& n) {
    const auto cls = std::string(n.field("name").text());
    const auto cls_id = symbol_id(file_.path, "", cls);
    facts_.symbols.push_back({cls, "", Granularity::Class});

    auto add_base = [&](const ts::Node& t) {
      auto [name, qual] = type_name(t);
      if (!name.empty()) facts_.bases.push_back({cls_id, name, qual});
    };
    auto add_list = [&](const ts::Node& holder) {
      if (!holder) return;
      for (auto& c : holder.named_children()) {
        if (c.is("type_list")) {
          for (auto& t : c.named_children()) add_base(t);
        } else {
          add_base(c);
        }
      }
    };
    if (auto sup = n.field("superclass")) add_list(sup);
    add_list(n.field("interfaces"));
    add_list(n.first_named_child_of("extends_interfaces"));

    auto body = n.field("body");
    if (!body) return;
    members(body, cls, cls_id);
  }

  // Declared types of fields, parameters and locals under `scope`.
  static void declared_types(const ts::Node& scope, LocalTypes& out, bool fields_only) {
    ts::visit(scope, [&](const ts::Node& n) {
      const bool field = n.is("field_declaration");
      if (fields_only && !field) return n == scope || n.is("class_body");
      if (field || n.is("local_variable_declaration") || n.is("formal_parameter")) {
        auto [type, qual] = type_name(n.field("type"));
        if (type.empty()) return true;
        const auto full = qual.empty() ? type : qual + "." + type;
        if (n.is("formal_parameter")) {
          if (auto name = n.field("name")) out[std::string(name.text())] = full;
        } else {
          for (auto& d : n.named_children())
            if (d.is("variable_declarator"))
              if (auto name = d.field("name")) out[std::string(name.text())] = full;
        }
      }
      return !field;
    });
  }

  void members(const ts::Node& body, const std::string& cls, const std::string& cls_id) {
    LocalTypes fields;
    declared_types(body, fields, true);
    for (auto& m : body.named_children()) {
      if (m.is("method_declaration") || m.is("constructor_declaration") ||
          m.is("compact_constructor_declaration")) {
        const auto name = m.field("name") ? std::string(m.field("name").text()) : cls;
        facts_.symbols.push_back({name, cls, Granularity::Function});
        LocalTypes locals = fields;
        declared_types(m, locals, false);
        collect_calls(m.field("body"), symbol_id(file_.path, cls, name), locals);
      } else if (m.is("enum_body_declarations")) {
        members(m, cls, cls_id);
      } else {
        // Field initializers, static blocks and nested types.
        collect_calls(m, cls_id, fields);
      }
    }
  }

  void collect_calls(const ts::Node& body, const std::string& from, const LocalTypes& locals) {
    if (!body) return;
    const auto first = facts_.calls.size();
    ts::visit(body, [&](const ts::Node& n) {
      if (n.is("method_invocation")) {
        const auto name = std::string(n.field("name").text());
        auto object = n.field("object");
        const auto qual = object ? std::string(object.text()) : std::string();
        facts_.calls.push_back({from, name, qual, object.is("this")});
      } else if (n.is("object_creation_expression")) {
        auto [name, qual] = type_name(n.field("type"));
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

FileFacts extract_java(const SourceFile& file, const ts::Node& root) {
  FileFacts facts;
  JavaExtractor(file, facts).run(root);
  return facts;
}

}  // namespace archrecon::refs
