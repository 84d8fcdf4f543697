#pragma once

// Recursive-descent parser and printer for `.asg` property files. Grammar in
// docs/asg.ebnf. Example:
//
//   asg "obstacle_ahead" {
//     node ego: Vehicle;
//     node obstacle: Static;
//     node lane: Lane;
//     ego ego;
//     edge obstacle inFrontOf ego;
//     assert obstacle.velocity == 0;
//     assert dist(ego, obstacle) in (0, 20];
//   }

#include <charconv>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sgmon/error.hpp"
#include "sgmon/expr.hpp"
#include "sgmon/lexer.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

namespace detail {

inline bool is_reserved(std::string_view word) {
  static constexpr std::string_view reserved[] = {
      "asg", "node", "edge", "assert", "in", "true", "false"};
  for (auto r : reserved) {
    if (word == r) return true;
  }
  return false;
}

class AsgParser {
 public:
  AsgParser(std::string_view text, const ObjectModel& om)
      : ts_(tokenize(text)), om_(om) {}

  /// A single predicate expression over already declared pattern nodes.
  Predicate parse_predicate(const std::map<std::string, std::string>& nodes) {
    Predicate p{expression()};
    if (!ts_.at_end()) ts_.fail("expected end of predicate");
    check_predicate(p, om_, nodes);
    return p;
  }

  AbstractSceneGraph parse() {
    const SourceLocation block_at = ts_.peek().where;
    ts_.expect_keyword("asg");
    if (ts_.peek().kind != TokenKind::String) ts_.fail("expected ASG name string");
    const Token& name_tok = ts_.next();
    if (name_tok.text.empty()) {
      throw Error(ErrorKind::Parse, "ASG name must not be empty", name_tok.where);
    }
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) statement();
    if (!ts_.at_end()) ts_.fail("expected end of input after ASG block");

    if (!ego_) {
      throw Error(ErrorKind::MissingEgo, "ASG '" + name_tok.text +
                                             "' has no 'ego' declaration",
                  block_at);
    }
    for (const auto& [edge, at] : edge_at_) {
      for (const auto* end : {&edge.source, &edge.target}) {
        if (!nodes_.count(*end)) {
          throw Error(ErrorKind::UnknownName,
                      "edge references undeclared node '" + *end + "'", at);
        }
      }
      if (!om_.has_relationship(edge.relationship)) {
        throw Error(ErrorKind::UnknownName,
                    "unknown relationship '" + edge.relationship + "'", at);
      }
      if (!om_.is_relationship_allowed(edge.relationship, nodes_[edge.source],
                                       nodes_[edge.target])) {
        throw Error(ErrorKind::Validation,
                    "relationship '" + edge.relationship +
                        "' is not allowed from " + nodes_[edge.source] + " to " +
                        nodes_[edge.target],
                    at);
      }
    }
    if (!nodes_.count(*ego_)) {
      throw Error(ErrorKind::UnknownName, "ego '" + *ego_ + "' is not declared",
                  ego_at_);
    }
    std::set<Edge> edges;
    for (const auto& [edge, at] : edge_at_) edges.insert(edge);
    try {
      return AbstractSceneGraph::create(name_tok.text, nodes_, std::move(edges),
                                        *ego_, std::move(predicates_), om_);
    } catch (const Error& e) {
      if (e.location()) throw;
      throw Error(e.kind(), e.detail(), block_at);
    }
  }

 private:
  std::string declared_id() {
    const Token& tok = ts_.expect_ident("pattern node id");
    if (is_reserved(tok.text)) {
      throw Error(ErrorKind::Parse,
                  "'" + tok.text + "' is reserved and cannot name a node",
                  tok.where);
    }
    return tok.text;
  }

  void statement() {
    const Token& kw = ts_.peek();
    if (ts_.accept_keyword("node")) {
      const SourceLocation at = ts_.peek().where;
      std::string id = declared_id();
      ts_.expect_punct(":");
      const Token& cls = ts_.expect_ident("class name");
      if (!om_.has_class(cls.text)) {
        throw Error(ErrorKind::UnknownName, "unknown class '" + cls.text + "'",
                    cls.where);
      }
      ts_.expect_punct(";");
      if (!nodes_.emplace(id, cls.text).second) {
        throw Error(ErrorKind::Validation, "duplicate node '" + id + "'", at);
      }
    } else if (ts_.accept_keyword("edge")) {
      Edge e;
      e.source = declared_id();
      e.relationship = ts_.expect_ident("relationship name").text;
      e.target = declared_id();
      ts_.expect_punct(";");
      if (!edge_at_.emplace(e, kw.where).second) {
        throw Error(ErrorKind::Validation,
                    "duplicate edge '" + e.source + " " + e.relationship + " " +
                        e.target + "'",
                    kw.where);
      }
    } else if (ts_.accept_keyword("ego")) {
      ego_at_ = kw.where;
      std::string id = declared_id();
      ts_.expect_punct(";");
      if (ego_) {
        throw Error(ErrorKind::Validation, "ego declared twice", kw.where);
      }
      ego_ = std::move(id);
    } else if (ts_.accept_keyword("assert")) {
      ExprPtr e = expression();
      ts_.expect_punct(";");
      predicates_.push_back(Predicate{std::move(e)});
    } else {
      ts_.fail("expected 'node', 'edge', 'ego', 'assert' or '}'");
    }
  }

  ExprPtr expression() {
    const SourceLocation at = ts_.peek().where;
    ExprPtr first = comparison();
    if (!ts_.is_punct("&&")) return first;
    And conj;
    conj.terms.push_back(std::move(first));
    while (ts_.accept_punct("&&")) conj.terms.push_back(comparison());
    return make_expr(std::move(conj), at);
  }

  std::optional<Comparison> comparison_op() {
    static const std::pair<std::string_view, Comparison> ops[] = {
        {"==", Comparison::Eq}, {"=", Comparison::Eq},  {"!=", Comparison::Ne},
        {"<=", Comparison::Le}, {">=", Comparison::Ge}, {"<", Comparison::Lt},
        {">", Comparison::Gt}};
    for (const auto& [text, op] : ops) {
      if (ts_.accept_punct(text)) return op;
    }
    return std::nullopt;
  }

  ExprPtr comparison() {
    const SourceLocation at = ts_.peek().where;
    ExprPtr lhs = operand();
    if (auto op = comparison_op()) {
      ExprPtr rhs = operand();
      return make_expr(Compare{*op, std::move(lhs), std::move(rhs)}, at);
    }
    if (ts_.accept_keyword("in")) {
      InInterval in;
      in.value = std::move(lhs);
      if (ts_.accept_punct("(")) {
        in.lo_closed = false;
      } else if (ts_.accept_punct("[")) {
        in.lo_closed = true;
      } else {
        ts_.fail("expected '(' or '[' to open an interval");
      }
      in.lo = operand();
      ts_.expect_punct(",");
      in.hi = operand();
      if (ts_.accept_punct(")")) {
        in.hi_closed = false;
      } else if (ts_.accept_punct("]")) {
        in.hi_closed = true;
      } else {
        ts_.fail("expected ')' or ']' to close an interval");
      }
      return make_expr(std::move(in), at);
    }
    return lhs;
  }

  ExprPtr number(const Token& tok, bool negative) {
    std::string text = (negative ? "-" : "") + tok.text;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (text.find_first_of(".eE") != std::string::npos) {
      double d = 0;
      auto [ptr, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || ptr != last) {
        throw Error(ErrorKind::Parse, "invalid number '" + text + "'", tok.where);
      }
      return make_expr(Literal{d}, tok.where);
    }
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorKind::Parse, "integer literal out of range '" + text + "'",
                  tok.where);
    }
    return make_expr(Literal{i}, tok.where);
  }

  ExprPtr operand() {
    const Token& tok = ts_.peek();
    const SourceLocation at = tok.where;
    if (++depth_ > kMaxDepth) {
      throw Error(ErrorKind::Parse, "expression nested too deeply", at);
    }
    struct Leave {
      int& d;
      ~Leave() { --d; }
    } leave{depth_};
    if (tok.kind == TokenKind::Number) {
      ts_.next();
      return number(tok, false);
    }
    if (ts_.is_punct("-") && ts_.peek(1).kind == TokenKind::Number) {
      ts_.next();
      const Token& num = ts_.next();
      return number(num, true);
    }
    if (tok.kind == TokenKind::String) {
      ts_.next();
      return make_expr(Literal{tok.text}, at);
    }
    if (ts_.accept_keyword("true")) return make_expr(Literal{true}, at);
    if (ts_.accept_keyword("false")) return make_expr(Literal{false}, at);
    if (ts_.accept_punct("(")) {
      ExprPtr inner = expression();
      ts_.expect_punct(")");
      return inner;
    }
    if (tok.kind == TokenKind::Ident && !is_reserved(tok.text)) {
      std::string name = ts_.next().text;
      if (ts_.accept_punct(".")) {
        std::string attr = ts_.expect_ident("attribute name").text;
        return make_expr(AttrRef{std::move(name), std::move(attr)}, at);
      }
      if (ts_.accept_punct("(")) {
        Call call;
        call.function = std::move(name);
        if (!ts_.accept_punct(")")) {
          do {
            call.args.push_back(operand());
          } while (ts_.accept_punct(","));
          ts_.expect_punct(")");
        }
        return make_expr(std::move(call), at);
      }
      return make_expr(NodeRef{std::move(name)}, at);
    }
    ts_.fail("expected an operand");
  }

  static constexpr int kMaxDepth = 64;

  TokenStream ts_;
  const ObjectModel& om_;
  int depth_ = 0;
  std::map<std::string, std::string> nodes_;
  std::map<Edge, SourceLocation> edge_at_;
  std::optional<std::string> ego_;
  SourceLocation ego_at_;
  std::vector<Predicate> predicates_;
};

}  // namespace detail

/// Parses and type-checks one `asg` block. Every thrown Error carries a
/// source location.
inline AbstractSceneGraph parse_asg(std::string_view spec_text,
                                    const ObjectModel& om) {
  return detail::AsgParser(spec_text, om).parse();
}

/// Parses and type-checks one predicate expression against `pattern_nodes`
/// (pattern id -> class).
inline Predicate parse_predicate(std::string_view text, const ObjectModel& om,
                                 const std::map<std::string, std::string>& pattern_nodes) {
  return detail::AsgParser(text, om).parse_predicate(pattern_nodes);
}

inline std::string serialize_asg(const AbstractSceneGraph& asg) {
  std::string out = "asg " + detail::quote(asg.name()) + " {\n";
  for (const auto& [id, cls] : asg.pattern_nodes()) {
    out += "  node " + id + ": " + cls + ";\n";
  }
  out += "  ego " + asg.ego_pattern_id() + ";\n";
  for (const auto& e : asg.pattern_edges()) {
    out += "  edge " + e.source + " " + e.relationship + " " + e.target + ";\n";
  }
  for (const auto& p : asg.predicates()) {
    out += "  assert " + p.text() + ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace sgmon
