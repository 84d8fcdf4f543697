#pragma once

// Concrete scene graphs (one snapshot of a traffic scene) and abstract scene
// graphs (a typed pattern plus a predicate set). Both are validated against an
// ObjectModel on construction and immutable afterwards.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgmon/error.hpp"
#include "sgmon/expr.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/typecheck.hpp"
#include "sgmon/value.hpp"

namespace sgmon {

/// Class the ego node must specialise, in both scenes and patterns.
inline constexpr std::string_view kEgoClass = "Vehicle";

struct SceneNode {
  std::string cls;
  std::map<std::string, Value> attributes;

  friend bool operator==(const SceneNode&, const SceneNode&) = default;
};

/// Directed labelled edge; used for both scene and pattern graphs.
struct Edge {
  std::string source;
  std::string relationship;
  std::string target;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class ConcreteSceneGraph {
 public:
  /// Throws Error(Validation) or Error(MissingEgo) if any invariant fails.
  static ConcreteSceneGraph create(double timestamp, std::string ego_id,
                                   std::map<std::string, SceneNode> nodes,
                                   std::set<Edge> edges, const ObjectModel& om) {
    ConcreteSceneGraph g;
    g.timestamp_ = timestamp;
    g.ego_id_ = std::move(ego_id);
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    g.validate(om);
    return g;
  }

  double timestamp() const { return timestamp_; }
  const std::string& ego_id() const { return ego_id_; }
  const std::map<std::string, SceneNode>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }

  const SceneNode* find_node(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  bool has_edge(const std::string& src, const std::string& rel,
                const std::string& dst) const {
    return edges_.count(Edge{src, rel, dst}) > 0;
  }

  friend bool operator==(const ConcreteSceneGraph&,
                         const ConcreteSceneGraph&) = default;

 private:
  ConcreteSceneGraph() = default;

  void validate(const ObjectModel& om) const {
    auto invalid = [](const std::string& msg) {
      throw Error(ErrorKind::Validation, msg);
    };
    for (const auto& [id, node] : nodes_) {
      if (id.empty()) invalid("node with empty id");
      if (!om.has_class(node.cls)) {
        invalid("node '" + id + "' has undeclared class '" + node.cls + "'");
      }
      if (om.find_class(node.cls).is_abstract) {
        invalid("node '" + id + "' has abstract class '" + node.cls + "'");
      }
      for (const auto& [name, value] : node.attributes) {
        auto decl = om.find_attribute(node.cls, name);
        if (!decl) {
          invalid("node '" + id + "' of class '" + node.cls +
                  "' has undeclared attribute '" + name + "'");
        }
        if (decl->type != type_of(value)) {
          invalid("attribute '" + id + "." + name + "' must be " +
                  to_string(decl->type) + ", got " + to_string(type_of(value)));
        }
      }
    }
    const SceneNode* ego = find_node(ego_id_);
    if (!ego) {
      throw Error(ErrorKind::MissingEgo,
                  "ego '" + ego_id_ + "' is not a node of the scene");
    }
    if (!om.is_subclass(ego->cls, kEgoClass)) {
      invalid("ego '" + ego_id_ + "' has class '" + ego->cls +
              "', which is not a " + std::string(kEgoClass));
    }
    for (const auto& e : edges_) {
      const SceneNode* src = find_node(e.source);
      const SceneNode* dst = find_node(e.target);
      std::string shown = "(" + e.source + ", " + e.relationship + ", " +
                          e.target + ")";
      if (!src || !dst) invalid("edge " + shown + " references an unknown node");
      if (e.source == e.target) invalid("self-loop edge " + shown);
      if (!om.has_relationship(e.relationship)) {
        invalid("edge " + shown + " uses undeclared relationship '" +
                e.relationship + "'");
      }
      if (!om.is_relationship_allowed(e.relationship, src->cls, dst->cls)) {
        invalid("edge " + shown + " is not allowed between " + src->cls +
                " and " + dst->cls);
      }
    }
  }

  double timestamp_ = 0.0;
  std::string ego_id_;
  std::map<std::string, SceneNode> nodes_;
  std::set<Edge> edges_;
};

class AbstractSceneGraph {
 public:
  /// Throws Error(Validation), Error(Type) or Error(UnknownName).
  static AbstractSceneGraph create(std::string name,
                                   std::map<std::string, std::string> nodes,
                                   std::set<Edge> edges, std::string ego,
                                   std::vector<Predicate> predicates,
                                   const ObjectModel& om) {
    AbstractSceneGraph g;
    g.name_ = std::move(name);
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    g.ego_ = std::move(ego);
    g.predicates_ = std::move(predicates);
    g.validate(om);
    return g;
  }

  const std::string& name() const { return name_; }
  /// pattern-id -> class name
  const std::map<std::string, std::string>& pattern_nodes() const {
    return nodes_;
  }
  const std::set<Edge>& pattern_edges() const { return edges_; }
  const std::string& ego_pattern_id() const { return ego_; }
  const std::vector<Predicate>& predicates() const { return predicates_; }

  friend bool operator==(const AbstractSceneGraph&,
                         const AbstractSceneGraph&) = default;

 private:
  AbstractSceneGraph() = default;

  void validate(const ObjectModel& om) const {
    auto invalid = [](const std::string& msg) {
      throw Error(ErrorKind::Validation, msg);
    };
    if (name_.empty()) invalid("ASG name must not be empty");
    for (const auto& [id, cls] : nodes_) {
      if (!om.has_class(cls)) {
        throw Error(ErrorKind::UnknownName,
                    "pattern node '" + id + "' has unknown class '" + cls + "'");
      }
    }
    auto ego = nodes_.find(ego_);
    if (ego == nodes_.end()) {
      throw Error(ErrorKind::MissingEgo,
                  "ego '" + ego_ + "' is not a declared pattern node");
    }
    if (!om.is_subclass(ego->second, kEgoClass)) {
      invalid("ego '" + ego_ + "' has class '" + ego->second +
              "', which is not a " + std::string(kEgoClass));
    }
    for (const auto& e : edges_) {
      std::string shown = e.source + " " + e.relationship + " " + e.target;
      auto src = nodes_.find(e.source);
      auto dst = nodes_.find(e.target);
      if (src == nodes_.end() || dst == nodes_.end()) {
        throw Error(ErrorKind::UnknownName,
                    "edge '" + shown + "' references an undeclared node");
      }
      if (e.source == e.target) invalid("self-loop edge '" + shown + "'");
      if (!om.has_relationship(e.relationship)) {
        throw Error(ErrorKind::UnknownName,
                    "unknown relationship '" + e.relationship + "'");
      }
      if (!om.is_relationship_allowed(e.relationship, src->second,
                                      dst->second)) {
        invalid("edge '" + shown + "' is not allowed between " + src->second +
                " and " + dst->second);
      }
    }
    // Connectivity of the undirected pattern, seeded at the ego.
    std::set<std::string> reached{ego_};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& e : edges_) {
        bool s = reached.count(e.source) > 0;
        bool t = reached.count(e.target) > 0;
        if (s != t) {
          reached.insert(s ? e.target : e.source);
          grew = true;
        }
      }
    }
    if (reached.size() != nodes_.size()) {
      for (const auto& [id, cls] : nodes_) {
        if (!reached.count(id)) {
          invalid("pattern is disconnected: node '" + id +
                  "' is not reachable from the ego");
        }
      }
    }
    for (const auto& pred : predicates_) {
      if (!pred.expr) invalid("empty predicate");
      check_predicate(pred, om, nodes_);
    }
  }

  std::string name_;
  std::map<std::string, std::string> nodes_;
  std::set<Edge> edges_;
  std::string ego_;
  std::vector<Predicate> predicates_;
};

// ---------------------------------------------------------------------------
// JSONL scene records

namespace detail {

inline Value attribute_from_json(const nlohmann::json& j, BaseType type,
                                 const std::string& where) {
  auto bad = [&]() -> Value {
    throw Error(ErrorKind::Validation, "attribute '" + where + "' must be " +
                                           std::string(to_string(type)) +
                                           ", got " + j.dump());
  };
  switch (type) {
    case BaseType::Real:
      if (!j.is_number()) return bad();
      return j.get<double>();
    case BaseType::Int:
      if (!j.is_number_integer()) return bad();
      return j.get<std::int64_t>();
    case BaseType::Bool:
      if (!j.is_boolean()) return bad();
      return j.get<bool>();
    case BaseType::String:
      if (!j.is_string()) return bad();
      return j.get<std::string>();
    case BaseType::Vec2:
      if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
          !j[1].is_number()) {
        return bad();
      }
      return Vec2{j[0].get<double>(), j[1].get<double>()};
  }
  return bad();
}

inline nlohmann::ordered_json attribute_to_json(const Value& v) {
  struct {
    nlohmann::ordered_json operator()(double d) const { return d; }
    nlohmann::ordered_json operator()(std::int64_t i) const { return i; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(const Vec2& p) const {
      return nlohmann::ordered_json::array({p.x, p.y});
    }
  } visitor;
  return std::visit(visitor, v);
}

inline const nlohmann::json& require_field(const nlohmann::json& obj,
                                           const char* field,
                                           const std::string& context) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw Error(ErrorKind::Parse,
                context + " is missing field '" + std::string(field) + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* field,
                                  const std::string& context) {
  const auto& v = require_field(obj, field, context);
  if (!v.is_string()) {
    throw Error(ErrorKind::Parse,
                context + " field '" + std::string(field) + "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace detail

inline ConcreteSceneGraph csg_from_json(const nlohmann::json& rec,
                                        const ObjectModel& om) {
  using detail::require_field;
  using detail::require_string;
  if (!rec.is_object()) {
    throw Error(ErrorKind::Parse, "scene record must be a JSON object");
  }
  const auto& t = require_field(rec, "t", "scene record");
  if (!t.is_number()) throw Error(ErrorKind::Parse, "field 't' must be a number");
  std::string ego = require_string(rec, "ego", "scene record");

  const auto& jnodes = require_field(rec, "nodes", "scene record");
  if (!jnodes.is_array()) {
    throw Error(ErrorKind::Parse, "field 'nodes' must be an array");
  }
  std::map<std::string, SceneNode> nodes;
  for (const auto& jn : jnodes) {
    if (!jn.is_object()) throw Error(ErrorKind::Parse, "node must be an object");
    std::string id = require_string(jn, "id", "node");
    SceneNode node;
    node.cls = require_string(jn, "class", "node '" + id + "'");
    if (!om.has_class(node.cls)) {
      throw Error(ErrorKind::Validation,
                  "node '" + id + "' has undeclared class '" + node.cls + "'");
    }
    if (auto it = jn.find("attrs"); it != jn.end() && !it->is_null()) {
      if (!it->is_object()) {
        throw Error(ErrorKind::Parse, "node '" + id + "' attrs must be an object");
      }
      for (const auto& [name, jv] : it->items()) {
        auto decl = om.find_attribute(node.cls, name);
        if (!decl) {
          throw Error(ErrorKind::Validation, "node '" + id + "' of class '" +
                                                 node.cls +
                                                 "' has undeclared attribute '" +
                                                 name + "'");
        }
        node.attributes.emplace(
            name, detail::attribute_from_json(jv, decl->type, id + "." + name));
      }
    }
    if (!nodes.emplace(id, std::move(node)).second) {
      throw Error(ErrorKind::Validation, "duplicate node id '" + id + "'");
    }
  }

  std::set<Edge> edges;
  if (auto it = rec.find("edges"); it != rec.end()) {
    if (!it->is_array()) {
      throw Error(ErrorKind::Parse, "field 'edges' must be an array");
    }
    for (const auto& je : *it) {
      if (!je.is_object()) throw Error(ErrorKind::Parse, "edge must be an object");
      edges.insert(Edge{require_string(je, "src", "edge"),
                        require_string(je, "rel", "edge"),
                        require_string(je, "dst", "edge")});
    }
  }
  return ConcreteSceneGraph::create(t.get<double>(), std::move(ego),
                                    std::move(nodes), std::move(edges), om);
}

/// Parses one JSONL scene record.
inline ConcreteSceneGraph parse_csg(std::string_view record,
                                    const ObjectModel& om) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(record.begin(), record.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return csg_from_json(rec, om);
}

inline nlohmann::ordered_json csg_to_json(const ConcreteSceneGraph& g) {
  nlohmann::ordered_json rec;
  rec["t"] = g.timestamp();
  rec["ego"] = g.ego_id();
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& [id, node] : g.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = id;
    jn["class"] = node.cls;
    auto attrs = nlohmann::ordered_json::object();
    for (const auto& [name, value] : node.attributes) {
      attrs[name] = detail::attribute_to_json(value);
    }
    jn["attrs"] = std::move(attrs);
    nodes.push_back(std::move(jn));
  }
  rec["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"src", e.source}, {"rel", e.relationship}, {"dst", e.target}});
  }
  rec["edges"] = std::move(edges);
  return rec;
}

/// One line of JSONL, without the trailing newline.
inline std::string serialize_csg(const ConcreteSceneGraph& g) {
  return csg_to_json(g).dump();
}

}  // namespace sgmon
