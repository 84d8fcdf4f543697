#pragma once

// Static typing of predicate expressions against an object model and the
// pattern nodes of the enclosing ASG.

#include <map>
#include <optional>
#include <string>

#include "sgmon/error.hpp"
#include "sgmon/expr.hpp"
#include "sgmon/object_model.hpp"

namespace sgmon {

/// Functions the evaluator implements natively. A schema may declare only
/// these, and only with the signature listed here.
inline std::optional<FunctionSymbol> builtin_function(const std::string& name) {
  if (name == "dist") {
    return FunctionSymbol{"dist", {{true, BaseType::Real}, {true, BaseType::Real}},
                          BaseType::Real};
  }
  return std::nullopt;
}

namespace detail {

class TypeChecker {
 public:
  TypeChecker(const ObjectModel& om,
              const std::map<std::string, std::string>& pattern_nodes)
      : om_(om), nodes_(pattern_nodes) {}

  BaseType check(const ExprPtr& e) const {
    return std::visit([&](const auto& n) { return check_node(n, *e); }, e->node);
  }

 private:
  [[noreturn]] void fail(const Expr& at, const std::string& msg) const {
    throw Error(ErrorKind::Type, msg, at.where);
  }

  const std::string& class_of(const std::string& node, const Expr& at) const {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) {
      throw Error(ErrorKind::UnknownName, "undeclared pattern node '" + node + "'",
                  at.where);
    }
    return it->second;
  }

  BaseType check_node(const Literal& n, const Expr&) const {
    return type_of(n.value);
  }

  BaseType check_node(const NodeRef& n, const Expr& at) const {
    class_of(n.node, at);
    fail(at, "pattern node '" + n.node + "' used as a value");
  }

  BaseType check_node(const AttrRef& n, const Expr& at) const {
    const auto& cls = class_of(n.node, at);
    auto attr = om_.find_attribute(cls, n.attribute);
    if (!attr) {
      fail(at, "class '" + cls + "' of node '" + n.node +
                   "' has no attribute '" + n.attribute + "'");
    }
    return attr->type;
  }

  BaseType check_node(const Call& n, const Expr& at) const {
    const FunctionSymbol* fn = om_.find_function(n.function);
    if (!fn) {
      throw Error(ErrorKind::UnknownName, "unknown function '" + n.function + "'",
                  at.where);
    }
    auto native = builtin_function(n.function);
    if (!native || !(*native == *fn)) {
      fail(at, "function '" + n.function + "' has no evaluator for its declared "
                   "signature");
    }
    if (n.args.size() != fn->params.size()) {
      fail(at, "function '" + n.function + "' expects " +
                   std::to_string(fn->params.size()) + " argument(s), got " +
                   std::to_string(n.args.size()));
    }
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      const auto& arg = n.args[i];
      const auto& param = fn->params[i];
      if (param.is_node) {
        const auto* ref = std::get_if<NodeRef>(&arg->node);
        if (!ref) {
          fail(*arg, "argument " + std::to_string(i + 1) + " of '" + n.function +
                         "' must be a pattern node");
        }
        const auto& cls = class_of(ref->node, *arg);
        if (n.function == "dist") {
          auto pos = om_.find_attribute(cls, "position");
          if (!pos || pos->type != BaseType::Vec2) {
            fail(*arg, "dist requires node '" + ref->node +
                           "' to have a Vec2 'position' attribute");
          }
        }
      } else {
        BaseType got = check(arg);
        bool ok = got == param.type ||
                  (param.type == BaseType::Real && got == BaseType::Int);
        if (!ok) {
          fail(*arg, std::string("argument ") + std::to_string(i + 1) + " of '" +
                         n.function + "' must be " + to_string(param.type) +
                         ", got " + to_string(got));
        }
      }
    }
    return fn->result;
  }

  BaseType check_node(const Compare& n, const Expr& at) const {
    BaseType l = check(n.lhs);
    BaseType r = check(n.rhs);
    if (is_numeric(l) && is_numeric(r)) return BaseType::Bool;
    if (l != r) {
      fail(at, std::string("cannot compare ") + to_string(l) + " with " +
                   to_string(r));
    }
    if (is_ordering(n.op) && l != BaseType::String) {
      fail(at, std::string("operator '") + to_string(n.op) +
                   "' is not defined on " + to_string(l));
    }
    return BaseType::Bool;
  }

  BaseType check_node(const InInterval& n, const Expr& at) const {
    for (const auto* part : {&n.value, &n.lo, &n.hi}) {
      BaseType t = check(*part);
      if (!is_numeric(t)) {
        fail(at, std::string("interval membership needs numeric operands, got ") +
                     to_string(t));
      }
    }
    return BaseType::Bool;
  }

  BaseType check_node(const And& n, const Expr& at) const {
    for (const auto& term : n.terms) {
      if (check(term) != BaseType::Bool) fail(at, "'&&' operands must be Bool");
    }
    return BaseType::Bool;
  }

  const ObjectModel& om_;
  const std::map<std::string, std::string>& nodes_;
};

}  // namespace detail

/// Throws Error(Type) or Error(UnknownName) unless `pred` is a well-typed
/// Bool expression over the given pattern nodes.
inline void check_predicate(const Predicate& pred, const ObjectModel& om,
                            const std::map<std::string, std::string>& pattern_nodes) {
  detail::TypeChecker checker(om, pattern_nodes);
  if (checker.check(pred.expr) != BaseType::Bool) {
    throw Error(ErrorKind::Type, "predicate '" + pred.text() + "' is not Bool",
                pred.expr->where);
  }
}

}  // namespace sgmon
