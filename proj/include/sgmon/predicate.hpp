#pragma once

// Evaluation of a predicate set against the attribute values bound by an
// embedding.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgmon/error.hpp"
#include "sgmon/expr.hpp"
#include "sgmon/matcher.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

struct BoundObject {
  std::string object_id;
  std::map<std::string, Value> attributes;  // copied from the scene
};

/// pattern-id -> bound object with its attribute snapshot.
using Binding = std::map<std::string, BoundObject>;

inline Binding make_binding(const Embedding& emb, const ConcreteSceneGraph& csg) {
  Binding out;
  for (const auto& [pattern_id, object_id] : emb.mapping) {
    const SceneNode* node = csg.find_node(object_id);
    if (!node) {
      throw Error(ErrorKind::Validation,
                  "embedding maps '" + pattern_id + "' to unknown object '" +
                      object_id + "'");
    }
    out.emplace(pattern_id, BoundObject{object_id, node->attributes});
  }
  return out;
}

struct EvalOptions {
  /// Values closer than this compare equal. Zero means exact comparison.
  double epsilon = 0.0;
};

struct EvalResult {
  bool satisfied = true;
  std::optional<std::size_t> first_failure;
};

namespace detail {

class Evaluator {
 public:
  Evaluator(const Binding& b, EvalOptions opts) : binding_(b), opts_(opts) {}

  Value value(const ExprPtr& e) const {
    return std::visit([&](const auto& n) { return eval(n); }, e->node);
  }

  bool truth(const ExprPtr& e) const {
    Value v = value(e);
    const bool* b = std::get_if<bool>(&v);
    if (!b) throw Error(ErrorKind::Type, "predicate did not evaluate to Bool");
    return *b;
  }

 private:
  const Value& attribute(const std::string& node, const std::string& attr) const {
    auto it = binding_.find(node);
    if (it == binding_.end()) {
      throw Error(ErrorKind::UnknownName, "pattern node '" + node + "' is unbound");
    }
    auto a = it->second.attributes.find(attr);
    if (a == it->second.attributes.end()) {
      throw MissingAttributeError(node + "." + attr);
    }
    return a->second;
  }

  Value eval(const Literal& n) const { return n.value; }

  Value eval(const NodeRef& n) const {
    throw Error(ErrorKind::Type, "pattern node '" + n.node + "' used as a value");
  }

  Value eval(const AttrRef& n) const { return attribute(n.node, n.attribute); }

  Value eval(const Call& n) const {
    if (n.function == "dist" && n.args.size() == 2) {
      const auto* a = std::get_if<NodeRef>(&n.args[0]->node);
      const auto* b = std::get_if<NodeRef>(&n.args[1]->node);
      if (a && b) {
        const auto* pa = std::get_if<Vec2>(&attribute(a->node, "position"));
        const auto* pb = std::get_if<Vec2>(&attribute(b->node, "position"));
        if (!pa || !pb) throw Error(ErrorKind::Type, "position must be Vec2");
        return distance(*pa, *pb);
      }
    }
    throw Error(ErrorKind::Type, "no evaluator for call to '" + n.function + "'");
  }

  // Three-way comparison of numbers under the epsilon tolerance.
  int order(const Value& a, const Value& b) const {
    const auto* ia = std::get_if<std::int64_t>(&a);
    const auto* ib = std::get_if<std::int64_t>(&b);
    if (ia && ib && opts_.epsilon == 0.0) return (*ia > *ib) - (*ia < *ib);
    double x = ia ? static_cast<double>(*ia) : std::get<double>(a);
    double y = ib ? static_cast<double>(*ib) : std::get<double>(b);
    if (std::fabs(x - y) <= opts_.epsilon) return 0;
    return x < y ? -1 : 1;
  }

  static bool holds(Comparison op, int cmp) {
    switch (op) {
      case Comparison::Eq: return cmp == 0;
      case Comparison::Ne: return cmp != 0;
      case Comparison::Lt: return cmp < 0;
      case Comparison::Le: return cmp <= 0;
      case Comparison::Gt: return cmp > 0;
      case Comparison::Ge: return cmp >= 0;
    }
    return false;
  }

  Value eval(const Compare& n) const {
    Value l = value(n.lhs);
    Value r = value(n.rhs);
    if (is_numeric(type_of(l)) && is_numeric(type_of(r))) {
      return holds(n.op, order(l, r));
    }
    if (l.index() != r.index()) {
      throw Error(ErrorKind::Type, "comparison between different types");
    }
    if (const auto* s = std::get_if<std::string>(&l)) {
      const auto& t = std::get<std::string>(r);
      return holds(n.op, s->compare(t) < 0 ? -1 : (s->compare(t) > 0 ? 1 : 0));
    }
    if (is_ordering(n.op)) {
      throw Error(ErrorKind::Type, "ordering comparison on unordered type");
    }
    bool same = l == r;
    return n.op == Comparison::Eq ? same : !same;
  }

  Value eval(const InInterval& n) const {
    Value v = value(n.value);
    Value lo = value(n.lo);
    Value hi = value(n.hi);
    int lo_cmp = order(lo, v);
    int hi_cmp = order(v, hi);
    bool above = n.lo_closed ? lo_cmp <= 0 : lo_cmp < 0;
    bool below = n.hi_closed ? hi_cmp <= 0 : hi_cmp < 0;
    return above && below;
  }

  Value eval(const And& n) const {
    for (const auto& term : n.terms) {
      if (!truth(term)) return false;
    }
    return true;
  }

  const Binding& binding_;
  EvalOptions opts_;
};

}  // namespace detail

/// Evaluates every predicate in declared order and reports the first that
/// fails. Throws MissingAttributeError when a bound node lacks an attribute.
inline EvalResult evaluate(const std::vector<Predicate>& predicates,
                           const Binding& binding, EvalOptions opts = {}) {
  detail::Evaluator ev(binding, opts);
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (!ev.truth(predicates[i].expr)) return {false, i};
  }
  return {true, std::nullopt};
}

/// Single-predicate form, mainly for tests and diagnostics.
inline bool evaluate_one(const Predicate& predicate, const Binding& binding,
                         EvalOptions opts = {}) {
  return detail::Evaluator(binding, opts).truth(predicate.expr);
}

}  // namespace sgmon
