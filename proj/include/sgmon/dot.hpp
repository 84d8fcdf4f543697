#pragma once

// Graphviz export. Object nodes carry their identity and class, relation
// types label the edges, and ASG predicates are drawn in grey: attached to
// their node when they constrain a single node, as a dashed edge when they
// relate two nodes, and as a free-standing note otherwise.

#include <set>
#include <string>
#include <vector>

#include "sgmon/expr.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

struct DotNode {
  std::string id;
  std::string label;
  bool emphasized = false;
};

struct DotEdge {
  std::string source;
  std::string target;
  std::string label;
  bool annotation = false;  // grey, dashed, undirected
};

struct DotNote {
  std::string id;
  std::string label;
  std::string attached_to;  // empty for a free-standing note
};

struct DotGraph {
  std::string name;
  std::vector<DotNode> nodes;
  std::vector<DotEdge> edges;
  std::vector<DotNote> notes;
};

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

inline void collect_nodes(const ExprPtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NodeRef> || std::is_same_v<T, AttrRef>) {
          out.insert(n.node);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.args) collect_nodes(a, out);
        } else if constexpr (std::is_same_v<T, Compare>) {
          collect_nodes(n.lhs, out);
          collect_nodes(n.rhs, out);
        } else if constexpr (std::is_same_v<T, InInterval>) {
          collect_nodes(n.value, out);
          collect_nodes(n.lo, out);
          collect_nodes(n.hi, out);
        } else if constexpr (std::is_same_v<T, And>) {
          for (const auto& t : n.terms) collect_nodes(t, out);
        }
      },
      e->node);
}

/// Compact label text: `velocity = 0` for a predicate attached to its node.
inline std::string figure_label(const ExprPtr& e, bool drop_node) {
  auto sub = [&](const ExprPtr& s) {
    std::string text = figure_label(s, drop_node);
    return needs_parens(s) ? "(" + text + ")" : text;
  };
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AttrRef>) {
          return drop_node ? n.attribute : n.node + "." + n.attribute;
        } else if constexpr (std::is_same_v<T, Compare>) {
          std::string op = n.op == Comparison::Eq ? "=" : to_string(n.op);
          return sub(n.lhs) + " " + op + " " + sub(n.rhs);
        } else if constexpr (std::is_same_v<T, InInterval>) {
          return sub(n.value) + " in " + (n.lo_closed ? "[" : "(") + sub(n.lo) +
                 ", " + sub(n.hi) + (n.hi_closed ? "]" : ")");
        } else if constexpr (std::is_same_v<T, And>) {
          std::string out;
          for (std::size_t i = 0; i < n.terms.size(); ++i) {
            if (i) out += " && ";
            out += sub(n.terms[i]);
          }
          return out;
        } else {
          return to_source(make_expr(n));
        }
      },
      e->node);
}

inline std::string attribute_text(const Value& v) { return to_source(v); }

}  // namespace detail

inline DotGraph to_dot_graph(const ConcreteSceneGraph& g) {
  DotGraph out;
  out.name = "scene t=" + format_real(g.timestamp());
  for (const auto& [id, node] : g.nodes()) {
    std::string label = id + " : " + node.cls;
    for (const auto& [name, value] : node.attributes) {
      label += "\n" + name + " = " + detail::attribute_text(value);
    }
    out.nodes.push_back({id, label, id == g.ego_id()});
  }
  for (const auto& e : g.edges()) {
    out.edges.push_back({e.source, e.target, e.relationship, false});
  }
  return out;
}

inline DotGraph to_dot_graph(const AbstractSceneGraph& g) {
  DotGraph out;
  out.name = g.name();
  for (const auto& [id, cls] : g.pattern_nodes()) {
    out.nodes.push_back({id, id + " : " + cls, id == g.ego_pattern_id()});
  }
  for (const auto& e : g.pattern_edges()) {
    out.edges.push_back({e.source, e.target, e.relationship, false});
  }
  for (std::size_t i = 0; i < g.predicates().size(); ++i) {
    const auto& expr = g.predicates()[i].expr;
    std::set<std::string> refs;
    detail::collect_nodes(expr, refs);
    if (refs.size() == 1) {
      out.notes.push_back({"#predicate" + std::to_string(i),
                           detail::figure_label(expr, true), *refs.begin()});
    } else if (refs.size() == 2) {
      out.edges.push_back({*refs.begin(), *std::next(refs.begin()),
                           detail::figure_label(expr, false), true});
    } else {
      out.notes.push_back({"#predicate" + std::to_string(i),
                           detail::figure_label(expr, false), ""});
    }
  }
  return out;
}

inline std::string export_dot(const DotGraph& g) {
  using detail::dot_quote;
  std::string out = "digraph " + dot_quote(g.name) + " {\n";
  out += "  node [shape=box, fontname=\"Helvetica\"];\n";
  out += "  edge [fontname=\"Helvetica\"];\n";
  for (const auto& n : g.nodes) {
    out += "  " + dot_quote(n.id) + " [label=" + dot_quote(n.label);
    if (n.emphasized) out += ", penwidth=2";
    out += "];\n";
  }
  for (const auto& e : g.edges) {
    out += "  " + dot_quote(e.source) + " -> " + dot_quote(e.target) +
           " [label=" + dot_quote(e.label);
    if (e.annotation) {
      out += ", style=dashed, color=grey, fontcolor=grey, dir=none";
    }
    out += "];\n";
  }
  for (const auto& note : g.notes) {
    out += "  " + dot_quote(note.id) + " [label=" + dot_quote(note.label) +
           ", shape=note, color=grey, fontcolor=grey];\n";
    if (!note.attached_to.empty()) {
      out += "  " + dot_quote(note.id) + " -> " + dot_quote(note.attached_to) +
             " [style=dashed, color=grey, arrowhead=none];\n";
    }
  }
  out += "}\n";
  return out;
}

inline std::string export_dot(const ConcreteSceneGraph& g) {
  return export_dot(to_dot_graph(g));
}

inline std::string export_dot(const AbstractSceneGraph& g) {
  return export_dot(to_dot_graph(g));
}

}  // namespace sgmon
