#include "facts.hpp"

namespace archrecon::refs {

namespace {

std::pair<std::string, std::string> go_type_name(ts::Node t) {
  while (t.is("pointer_type") || t.is("generic_type")) {
    auto kids = t.named_children();
    if (kids.empty()) return {};
    t = t.is("generic_type") && t.field("type") ? t.field("type") : kids.front();
  }
  if (t.is("type_identifier")) return {std::string(t.text()), ""};
  if (t.is("qualified_type"))
    return {std::string(t.field("name").text()), std::string(t.field("package").text())};
  return {};
}

std::string string_content(const ts::Node& lit) {
  auto text = lit.text();
  if (text.size() >= 2 && (text.front() == '"' || text.front() == '`'))
    text = text.substr(1, text.size() - 2);
  return std::string(text);
}

std::string qualified(const std::pair<std::string, std::string>& t) {
  if (t.first.empty()) return {};
  return t.second.empty() ? t.first : t.second + "." + t.first;
}

// Type of `&T{}`, `T{}` or `new(T)`; empty otherwise.
std::string constructed_type(ts::Node v) {
  if (v.is("unary_expression")) v = v.field("operand");
  if (v.is("composite_literal")) return qualified(go_type_name(v.field("type")));
  if (v.is("call_expression") && v.field("function").text() == "new") {
    auto args = v.field("arguments").named_children();
    if (!args.empty()) return qualified(go_type_name(args.front()));
  }
  return {};
}

LocalTypes local_types(const ts::Node& fn) {
  LocalTypes out;
  ts::visit(fn, [&](const ts::Node& n) {
    if (n.is("parameter_declaration") || n.is("var_spec")) {
      auto type = qualified(go_type_name(n.field("type")));
      std::vector<ts::Node> values;
      if (auto v = n.field("value")) values = v.named_children();
      std::size_t i = 0;
      for (auto& c : n.named_children()) {
        if (!c.is("identifier")) continue;
        auto t = type.empty() && i < values.size() ? constructed_type(values[i]) : type;
        if (!t.empty()) out[std::string(c.text())] = t;
        ++i;
      }
    } else if (n.is("short_var_declaration")) {
      auto left = n.field("left").named_children();
      auto right = n.field("right").named_children();
      for (std::size_t i = 0; i < left.size() && i < right.size(); ++i) {
        if (!left[i].is("identifier")) continue;
        if (auto t = constructed_type(right[i]); !t.empty()) out[std::string(left[i].text())] = t;
      }
    }
    return true;
  });
  return out;
}

class GoExtractor {
public:
  GoExtractor(const SourceFile& file, FileFacts& facts) : file_(file), facts_(facts) {}

  void run(const ts::Node& root) {
    for (auto& n : root.named_children()) {
      if (n.is("package_clause")) {
        if (auto id = n.first_named_child_of("package_identifier")) facts_.package = std::string(id.text());
      } else if (n.is("import_declaration")) {
        ts::visit(n, [&](const ts::Node& c) {
          if (!c.is("import_spec")) return true;
          import_spec(c);
          return false;
        });
      } else if (n.is("type_declaration")) {
        for (auto& spec : n.named_children())
          if (spec.is("type_spec") || spec.is("type_alias")) type_spec(spec);
      } else if (n.is("function_declaration")) {
        const auto name = std::string(n.field("name").text());
        facts_.symbols.push_back({name, "", Granularity::Function});
        collect_calls(n.field("body"), symbol_id(file_.path, "", name), "", local_types(n));
      } else if (n.is("method_declaration")) {
        method(n);
      }
    }
  }

private:
  void import_spec(const ts::Node& spec) {
    ImportDecl d;
    d.style = ImportStyle::GoPackage;
    d.spec = string_content(spec.field("path"));
    if (auto name = spec.field("name")) d.alias = std::string(name.text());
    if (!d.spec.empty()) facts_.imports.push_back(std::move(d));
  }

  void type_spec(const ts::Node& spec) {
    const auto name = std::string(spec.field("name").text());
    const auto id = symbol_id(file_.path, "", name);
    facts_.symbols.push_back({name, "", Granularity::Class});
    auto type = spec.field("type");
    if (type.is("struct_type")) {
      auto fields = type.first_named_child_of("field_declaration_list");
      if (!fields) return;
      for (auto& f : fields.named_children()) {
        if (!f.is("field_declaration") || f.field("name")) continue;
        auto [base, qual] = go_type_name(f.field("type"));
        if (!base.empty()) facts_.bases.push_back({id, base, qual});
      }
    } else if (type.is("interface_type")) {
      for (auto& e : type.named_children()) {
        if (!e.is("type_elem") && !e.is("constraint_elem")) continue;
        for (auto& t : e.named_children()) {
          auto [base, qual] = go_type_name(t);
          if (!base.empty()) facts_.bases.push_back({id, base, qual});
        }
      }
    }
  }

  void method(const ts::Node& n) {
    const auto name = std::string(n.field("name").text());
    std::string owner;
    std::string receiver_var;
    if (auto recv = n.field("receiver")) {
      if (auto param = recv.first_named_child_of("parameter_declaration")) {
        owner = go_type_name(param.field("type")).first;
        if (auto var = param.field("name")) receiver_var = std::string(var.text());
      }
    }
    facts_.symbols.push_back({name, owner, Granularity::Function});
    auto locals = local_types(n);
    locals.erase(receiver_var);
    collect_calls(n.field("body"), symbol_id(file_.path, owner, name), receiver_var, locals);
  }

  void collect_calls(const ts::Node& body, const std::string& from, const std::string& self,
                     const LocalTypes& locals) {
    if (!body) return;
    const auto first = facts_.calls.size();
    ts::visit(body, [&](const ts::Node& n) {
      if (!n.is("call_expression")) return true;
      auto fn = n.field("function");
      if (fn.is("identifier")) {
        facts_.calls.push_back({from, std::string(fn.text()), "", false});
      } else if (fn.is("selector_expression")) {
        const auto operand = std::string(fn.field("operand").text());
        facts_.calls.push_back({from, std::string(fn.field("field").text()), operand,
                                !self.empty() && operand == self});
      }
      return true;
    });
    apply_local_types(facts_.calls, first, locals);
  }

  const SourceFile& file_;
  FileFacts& facts_;
};

}  // namespace

FileFacts extract_go(const SourceFile& file, const ts::Node& root) {
  FileFacts facts;
  GoExtractor(file, facts).run(root);
  return facts;
}

}  // namespace archrecon::refs
