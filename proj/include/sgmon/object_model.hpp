#pragma once

// Typed schema for scene graphs: object classes with attributes, a single
// inheritance hierarchy, relationship types and function symbols.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sgmon/error.hpp"
#include "sgmon/lexer.hpp"
#include "sgmon/value.hpp"

namespace sgmon {

struct AttributeDecl {
  std::string name;
  BaseType type = BaseType::Real;

  friend bool operator==(const AttributeDecl&, const AttributeDecl&) = default;
};

struct ClassDecl {
  std::string name;
  std::optional<std::string> parent;
  bool is_abstract = false;
  std::vector<AttributeDecl> attributes;  // own attributes only

  friend bool operator==(const ClassDecl&, const ClassDecl&) = default;
};

struct RelationshipType {
  std::string name;
  std::string source;
  std::string target;

  friend bool operator==(const RelationshipType&,
                         const RelationshipType&) = default;
  friend auto operator<=>(const RelationshipType&,
                          const RelationshipType&) = default;
};

/// A function parameter is either a pattern node or a value of a base type.
struct FunctionParam {
  bool is_node = true;
  BaseType type = BaseType::Real;

  friend bool operator==(const FunctionParam&, const FunctionParam&) = default;
};

struct FunctionSymbol {
  std::string name;
  std::vector<FunctionParam> params;
  BaseType result = BaseType::Real;

  friend bool operator==(const FunctionSymbol&,
                         const FunctionSymbol&) = default;
};

enum class Comparison { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* to_string(Comparison op) {
  switch (op) {
    case Comparison::Eq: return "==";
    case Comparison::Ne: return "!=";
    case Comparison::Lt: return "<";
    case Comparison::Le: return "<=";
    case Comparison::Gt: return ">";
    case Comparison::Ge: return ">=";
  }
  return "?";
}

inline bool is_ordering(Comparison op) {
  return op != Comparison::Eq && op != Comparison::Ne;
}

class ObjectModel {
 public:
  ObjectModel() = default;

  /// Validates and indexes the declarations. Throws Error(Schema).
  static ObjectModel build(std::vector<ClassDecl> classes,
                           std::vector<RelationshipType> relationships,
                           std::vector<FunctionSymbol> functions) {
    ObjectModel om;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const auto& cls = classes[i];
      if (!om.class_index_.emplace(cls.name, i).second) {
        throw Error(ErrorKind::Schema, "duplicate class '" + cls.name + "'");
      }
    }
    om.classes_ = std::move(classes);

    for (const auto& cls : om.classes_) {
      if (cls.parent && !om.class_index_.count(*cls.parent)) {
        throw Error(ErrorKind::Schema, "class '" + cls.name +
                                           "' extends undeclared class '" +
                                           *cls.parent + "'");
      }
    }
    // Acyclic: every chain must terminate within |C| steps.
    for (const auto& cls : om.classes_) {
      const ClassDecl* cur = &cls;
      std::size_t steps = 0;
      while (cur->parent) {
        if (++steps > om.classes_.size()) {
          throw Error(ErrorKind::Schema,
                      "inheritance cycle through class '" + cls.name + "'");
        }
        cur = &om.classes_[om.class_index_.at(*cur->parent)];
      }
    }
    for (const auto& cls : om.classes_) {
      std::set<std::string> seen;
      for (const auto& attr : om.attributes_of(cls.name)) {
        if (!seen.insert(attr.name).second) {
          throw Error(ErrorKind::Schema, "duplicate attribute '" + attr.name +
                                             "' in class '" + cls.name + "'");
        }
      }
    }

    std::set<RelationshipType> seen_rel;
    for (const auto& rel : relationships) {
      for (const auto* end : {&rel.source, &rel.target}) {
        if (!om.class_index_.count(*end)) {
          throw Error(ErrorKind::Schema, "relationship '" + rel.name +
                                             "' references undeclared class '" +
                                             *end + "'");
        }
      }
      if (!seen_rel.insert(rel).second) {
        throw Error(ErrorKind::Schema, "duplicate relationship '" + rel.name +
                                           ": " + rel.source + " -> " +
                                           rel.target + "'");
      }
    }
    om.relationships_ = std::move(relationships);

    std::set<std::string> seen_fn;
    for (const auto& fn : functions) {
      if (!seen_fn.insert(fn.name).second) {
        throw Error(ErrorKind::Schema, "duplicate function '" + fn.name + "'");
      }
    }
    om.functions_ = std::move(functions);
    return om;
  }

  const std::vector<ClassDecl>& classes() const { return classes_; }
  const std::vector<RelationshipType>& relationships() const {
    return relationships_;
  }
  const std::vector<FunctionSymbol>& functions() const { return functions_; }

  static constexpr BaseType base_types[] = {BaseType::Real, BaseType::Int,
                                            BaseType::Bool, BaseType::String,
                                            BaseType::Vec2};
  static constexpr Comparison predicate_symbols[] = {
      Comparison::Eq, Comparison::Ne, Comparison::Lt,
      Comparison::Le, Comparison::Gt, Comparison::Ge};

  bool has_class(std::string_view name) const {
    return class_index_.find(std::string(name)) != class_index_.end();
  }

  const ClassDecl& find_class(std::string_view name) const {
    auto it = class_index_.find(std::string(name));
    if (it == class_index_.end()) {
      throw Error(ErrorKind::UnknownName,
                  "unknown class '" + std::string(name) + "'");
    }
    return classes_[it->second];
  }

  bool has_relationship(std::string_view name) const {
    return std::any_of(relationships_.begin(), relationships_.end(),
                       [&](const auto& r) { return r.name == name; });
  }

  /// Reflexive-transitive subclass test. Unknown names are never related.
  bool is_subclass(std::string_view sub, std::string_view super) const {
    if (!has_class(sub) || !has_class(super)) return false;
    const ClassDecl* cur = &find_class(sub);
    while (true) {
      if (cur->name == super) return true;
      if (!cur->parent) return false;
      cur = &find_class(*cur->parent);
    }
  }

  /// Inherited attributes first, root-most class first.
  std::vector<AttributeDecl> attributes_of(std::string_view cls) const {
    std::vector<const ClassDecl*> chain;
    const ClassDecl* cur = &find_class(cls);
    while (true) {
      chain.push_back(cur);
      if (!cur->parent) break;
      cur = &find_class(*cur->parent);
    }
    std::vector<AttributeDecl> out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      out.insert(out.end(), (*it)->attributes.begin(), (*it)->attributes.end());
    }
    return out;
  }

  std::optional<AttributeDecl> find_attribute(std::string_view cls,
                                              std::string_view attr) const {
    for (auto& a : attributes_of(cls)) {
      if (a.name == attr) return a;
    }
    return std::nullopt;
  }

  const FunctionSymbol* find_function(std::string_view name) const {
    for (const auto& fn : functions_) {
      if (fn.name == name) return &fn;
    }
    return nullptr;
  }

  /// True iff some declared (rel, S, T) has src ⊑ S and dst ⊑ T.
  bool is_relationship_allowed(std::string_view rel, std::string_view src,
                               std::string_view dst) const {
    if (!has_relationship(rel)) {
      throw Error(ErrorKind::UnknownName,
                  "unknown relationship '" + std::string(rel) + "'");
    }
    find_class(src);
    find_class(dst);
    for (const auto& r : relationships_) {
      if (r.name == rel && is_subclass(src, r.source) &&
          is_subclass(dst, r.target)) {
        return true;
      }
    }
    return false;
  }

  friend bool operator==(const ObjectModel& a, const ObjectModel& b) {
    return a.classes_ == b.classes_ && a.relationships_ == b.relationships_ &&
           a.functions_ == b.functions_;
  }

 private:
  std::vector<ClassDecl> classes_;
  std::map<std::string, std::size_t> class_index_;
  std::vector<RelationshipType> relationships_;
  std::vector<FunctionSymbol> functions_;
};

namespace detail {

inline BaseType expect_base_type(TokenStream& ts) {
  const Token& tok = ts.peek();
  if (tok.kind == TokenKind::Ident) {
    if (auto t = parse_base_type(tok.text)) {
      ts.next();
      return *t;
    }
    throw Error(ErrorKind::Schema, "unknown base type '" + tok.text + "'",
                tok.where);
  }
  ts.fail("expected a base type");
}

}  // namespace detail

/// Parses the line-oriented schema format (see docs/object_model.ebnf).
inline ObjectModel load_object_model(std::string_view schema_text) {
  using detail::TokenKind;
  detail::TokenStream ts(detail::tokenize(schema_text));
  std::vector<ClassDecl> classes;
  std::vector<RelationshipType> rels;
  std::vector<FunctionSymbol> fns;

  while (!ts.at_end()) {
    if (ts.is_keyword("abstract") || ts.is_keyword("class")) {
      ClassDecl cls;
      cls.is_abstract = ts.accept_keyword("abstract");
      ts.expect_keyword("class");
      cls.name = ts.expect_ident("class name").text;
      if (ts.accept_keyword("extends")) {
        cls.parent = ts.expect_ident("parent class name").text;
      }
      ts.expect_punct("{");
      while (!ts.accept_punct("}")) {
        AttributeDecl attr;
        attr.name = ts.expect_ident("attribute name or '}'").text;
        ts.expect_punct(":");
        attr.type = detail::expect_base_type(ts);
        ts.expect_punct(";");
        cls.attributes.push_back(std::move(attr));
      }
      ts.accept_punct(";");
      classes.push_back(std::move(cls));
    } else if (ts.accept_keyword("rel")) {
      RelationshipType rel;
      rel.name = ts.expect_ident("relationship name").text;
      ts.expect_punct(":");
      rel.source = ts.expect_ident("source class").text;
      ts.expect_punct("->");
      rel.target = ts.expect_ident("target class").text;
      ts.expect_punct(";");
      rels.push_back(std::move(rel));
    } else if (ts.accept_keyword("fn")) {
      FunctionSymbol fn;
      fn.name = ts.expect_ident("function name").text;
      ts.expect_punct("(");
      if (!ts.accept_punct(")")) {
        do {
          if (ts.accept_keyword("node")) {
            fn.params.push_back({true, BaseType::Real});
          } else {
            fn.params.push_back({false, detail::expect_base_type(ts)});
          }
        } while (ts.accept_punct(","));
        ts.expect_punct(")");
      }
      ts.expect_punct("->");
      fn.result = detail::expect_base_type(ts);
      ts.expect_punct(";");
      fns.push_back(std::move(fn));
    } else {
      ts.fail("expected 'class', 'abstract', 'rel' or 'fn'");
    }
  }
  return ObjectModel::build(std::move(classes), std::move(rels),
                            std::move(fns));
}

inline std::string serialize_object_model(const ObjectModel& om) {
  std::string out;
  for (const auto& cls : om.classes()) {
    if (cls.is_abstract) out += "abstract ";
    out += "class " + cls.name;
    if (cls.parent) out += " extends " + *cls.parent;
    if (cls.attributes.empty()) {
      out += " {}\n";
      continue;
    }
    out += " {\n";
    for (const auto& attr : cls.attributes) {
      out += "  " + attr.name + ": " + to_string(attr.type) + ";\n";
    }
    out += "}\n";
  }
  for (const auto& rel : om.relationships()) {
    out += "rel " + rel.name + ": " + rel.source + " -> " + rel.target + ";\n";
  }
  for (const auto& fn : om.functions()) {
    out += "fn " + fn.name + "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      if (i) out += ", ";
      out += fn.params[i].is_node ? "node" : to_string(fn.params[i].type);
    }
    out += ") -> ";
    out += to_string(fn.result);
    out += ";\n";
  }
  return out;
}

}  // namespace sgmon
