#pragma once

// Predicate expression trees used in the predicate set of an ASG.

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sgmon/error.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/value.hpp"

namespace sgmon {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  Value value;
};

/// A bare pattern-id, only valid as a node-kind function argument.
struct NodeRef {
  std::string node;
};

struct AttrRef {
  std::string node;
  std::string attribute;
};

struct Call {
  std::string function;
  std::vector<ExprPtr> args;
};

struct Compare {
  Comparison op = Comparison::Eq;
  ExprPtr lhs;
  ExprPtr rhs;
};

/// `value in (lo, hi]` and friends.
struct InInterval {
  ExprPtr value;
  ExprPtr lo;
  ExprPtr hi;
  bool lo_closed = false;
  bool hi_closed = true;
};

struct And {
  std::vector<ExprPtr> terms;
};

struct Expr {
  std::variant<Literal, NodeRef, AttrRef, Call, Compare, InInterval, And> node;
  SourceLocation where;  // not part of equality
};

template <typename T>
ExprPtr make_expr(T node, SourceLocation where = {}) {
  return std::make_shared<const Expr>(Expr{std::move(node), where});
}

bool equal(const ExprPtr& a, const ExprPtr& b);

namespace detail {

inline bool equal_node(const Literal& a, const Literal& b) {
  return a.value == b.value;
}
inline bool equal_node(const NodeRef& a, const NodeRef& b) {
  return a.node == b.node;
}
inline bool equal_node(const AttrRef& a, const AttrRef& b) {
  return a.node == b.node && a.attribute == b.attribute;
}
inline bool equal_node(const Call& a, const Call& b) {
  if (a.function != b.function || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal(a.args[i], b.args[i])) return false;
  }
  return true;
}
inline bool equal_node(const Compare& a, const Compare& b) {
  return a.op == b.op && equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs);
}
inline bool equal_node(const InInterval& a, const InInterval& b) {
  return a.lo_closed == b.lo_closed && a.hi_closed == b.hi_closed &&
         equal(a.value, b.value) && equal(a.lo, b.lo) && equal(a.hi, b.hi);
}
inline bool equal_node(const And& a, const And& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (!equal(a.terms[i], b.terms[i])) return false;
  }
  return true;
}

inline bool needs_parens(const ExprPtr& e) {
  return std::holds_alternative<Compare>(e->node) ||
         std::holds_alternative<InInterval>(e->node) ||
         std::holds_alternative<And>(e->node);
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& lhs) {
        using T = std::decay_t<decltype(lhs)>;
        return detail::equal_node(lhs, std::get<T>(b->node));
      },
      a->node);
}

inline std::string to_source(const Value& v) {
  struct {
    std::string operator()(double d) const { return format_real(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      return detail::quote(s);
    }
    std::string operator()(const Vec2& p) const {
      return "(" + format_real(p.x) + ", " + format_real(p.y) + ")";
    }
  } visitor;
  return std::visit(visitor, v);
}

/// Canonical DSL text for an expression; re-parses to an equal tree.
inline std::string to_source(const ExprPtr& e) {
  auto operand = [](const ExprPtr& sub) {
    return detail::needs_parens(sub) ? "(" + to_source(sub) + ")"
                                     : to_source(sub);
  };
  struct Visitor {
    decltype(operand)& wrap;
    std::string operator()(const Literal& n) const { return to_source(n.value); }
    std::string operator()(const NodeRef& n) const { return n.node; }
    std::string operator()(const AttrRef& n) const {
      return n.node + "." + n.attribute;
    }
    std::string operator()(const Call& n) const {
      std::string out = n.function + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += wrap(n.args[i]);
      }
      return out + ")";
    }
    std::string operator()(const Compare& n) const {
      return wrap(n.lhs) + " " + to_string(n.op) + " " + wrap(n.rhs);
    }
    std::string operator()(const InInterval& n) const {
      return wrap(n.value) + " in " + (n.lo_closed ? "[" : "(") + wrap(n.lo) +
             ", " + wrap(n.hi) + (n.hi_closed ? "]" : ")");
    }
    std::string operator()(const And& n) const {
      std::string out;
      for (std::size_t i = 0; i < n.terms.size(); ++i) {
        if (i) out += " && ";
        out += std::holds_alternative<And>(n.terms[i]->node)
                   ? "(" + to_source(n.terms[i]) + ")"
                   : to_source(n.terms[i]);
      }
      return out;
    }
  };
  return std::visit(Visitor{operand}, e->node);
}

/// One element of the predicate set D.
struct Predicate {
  ExprPtr expr;

  std::string text() const { return to_source(expr); }

  friend bool operator==(const Predicate& a, const Predicate& b) {
    return equal(a.expr, b.expr);
  }
};

}  // namespace sgmon
