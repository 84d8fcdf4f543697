#pragma once

// Kinematic trace generator. Actors move with piecewise-constant velocity on
// a straight road; relation edges are derived from footprint geometry.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgmon/error.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/scene_graph.hpp"
#include "sgmon/value.hpp"

namespace sgmon {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Axis-aligned map area. Without a lateral extent the area only takes part
/// in `isPartOf` edges.
struct Area {
  std::string id;
  std::string cls;
  std::optional<Interval> lateral;       // y range
  std::optional<Interval> longitudinal;  // x range, unbounded when absent
  std::optional<std::string> part_of;
};

struct MotionSegment {
  double until = 0.0;
  Vec2 velocity;
};

/// Segments are consecutive from t = 0; after the last one the actor stops.
struct Actor {
  std::string id;
  std::string cls;
  Vec2 position;
  double heading = 0.0;  // radians, 0 = +x
  double length = 4.5;
  double width = 1.8;
  std::vector<MotionSegment> motion;
};

struct PhaseSpan {
  std::string name;
  double until = 0.0;
};

/// Moves `actor` along `axis` during `phase` so that its smallest distance to
/// the ego in that window becomes `threshold + offset`.
struct Perturbation {
  std::string name;
  std::vector<std::string> aliases;
  std::string phase;
  std::string actor;
  char axis = 'x';
  double threshold = 0.0;
  std::optional<double> offset;  // inactive until set
};

struct ScenarioScript {
  std::string scenario;
  double duration = 0.0;
  double dt = 0.1;
  std::string ego;
  double front_half_width = 1.75;
  std::vector<Area> areas;
  std::vector<Actor> actors;
  std::vector<PhaseSpan> phases;
  std::vector<Perturbation> perturbations;

  /// Throws Error(Validation) on a broken invariant.
  void validate() const {
    auto fail = [](const std::string& msg) {
      throw Error(ErrorKind::Validation, "script: " + msg);
    };
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("time step must be positive");
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
      fail("duration must be non-negative");
    }
    if (phases.empty() && duration > 0.0) fail("no phases");
    double prev = 0.0;
    std::set<std::string> names;
    for (const auto& p : phases) {
      if (!(p.until > prev)) fail("phase '" + p.name + "' has an empty span");
      if (!names.insert(p.name).second) fail("duplicate phase '" + p.name + "'");
      prev = p.until;
    }
    if (!phases.empty() && phases.back().until != duration) {
      fail("phases must end at the script duration");
    }
    std::set<std::string> ids;
    for (const auto& a : areas) {
      if (!ids.insert(a.id).second) fail("duplicate id '" + a.id + "'");
      for (const auto* r : {&a.lateral, &a.longitudinal}) {
        if (*r && !((*r)->lo < (*r)->hi)) fail("area '" + a.id + "' is empty");
      }
    }
    for (const auto& a : areas) {
      if (a.part_of && !std::any_of(areas.begin(), areas.end(), [&](const Area& b) {
            return b.id == *a.part_of;
          })) {
        fail("area '" + a.id + "' is part of unknown area '" + *a.part_of + "'");
      }
    }
    for (const auto& a : actors) {
      if (!ids.insert(a.id).second) fail("duplicate id '" + a.id + "'");
      if (!(a.length > 0.0) || !(a.width > 0.0)) {
        fail("actor '" + a.id + "' needs a positive footprint");
      }
      double t = 0.0;
      for (const auto& m : a.motion) {
        if (!(m.until > t)) fail("actor '" + a.id + "' has an empty motion segment");
        t = m.until;
      }
    }
    if (!std::any_of(actors.begin(), actors.end(),
                     [&](const Actor& a) { return a.id == ego; })) {
      fail("ego '" + ego + "' is not an actor");
    }
    for (const auto& p : perturbations) {
      if (!names.count(p.phase)) fail("perturbation '" + p.name + "' names unknown phase");
      if (!std::any_of(actors.begin(), actors.end(),
                       [&](const Actor& a) { return a.id == p.actor; })) {
        fail("perturbation '" + p.name + "' names unknown actor");
      }
      if (p.actor == ego) fail("perturbation '" + p.name + "' cannot move the ego");
      if (p.axis != 'x' && p.axis != 'y') fail("perturbation axis must be x or y");
    }
  }
};

namespace detail {

[[noreturn]] inline void script_error(const std::string& msg) {
  throw Error(ErrorKind::Schema, "script: " + msg);
}

inline const nlohmann::json& script_field(const nlohmann::json& obj,
                                          const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    script_error(std::string("missing field '") + name + "'");
  }
  return obj.at(name);
}

inline double script_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) script_error(std::string(what) + " must be a number");
  return j.get<double>();
}

inline std::string script_string(const nlohmann::json& j, const char* what) {
  if (!j.is_string()) script_error(std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline Vec2 script_vec2(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    script_error(std::string(what) + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Interval script_interval(const nlohmann::json& j, const char* what) {
  Vec2 v = script_vec2(j, what);
  return {v.x, v.y};
}

inline const nlohmann::json& script_array(const nlohmann::json& obj,
                                          const char* name) {
  const auto& j = script_field(obj, name);
  if (!j.is_array()) script_error(std::string("'") + name + "' must be an array");
  return j;
}

}  // namespace detail

/// Parses and validates a JSON script. Field layout in docs/formats.md.
inline ScenarioScript load_script(std::string_view text) {
  using namespace detail;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("script: ") + e.what());
  }
  ScenarioScript s;
  s.scenario = script_string(script_field(j, "scenario"), "scenario");
  s.duration = script_number(script_field(j, "duration"), "duration");
  s.dt = script_number(script_field(j, "dt"), "dt");
  s.ego = script_string(script_field(j, "ego"), "ego");
  if (j.contains("front_half_width")) {
    s.front_half_width = script_number(j["front_half_width"], "front_half_width");
  }
  for (const auto& a : script_array(j, "areas")) {
    Area area;
    area.id = script_string(script_field(a, "id"), "area id");
    area.cls = script_string(script_field(a, "class"), "area class");
    if (a.contains("lateral")) area.lateral = script_interval(a["lateral"], "lateral");
    if (a.contains("longitudinal")) {
      area.longitudinal = script_interval(a["longitudinal"], "longitudinal");
    }
    if (a.contains("part_of")) area.part_of = script_string(a["part_of"], "part_of");
    s.areas.push_back(std::move(area));
  }
  for (const auto& a : script_array(j, "actors")) {
    Actor actor;
    actor.id = script_string(script_field(a, "id"), "actor id");
    actor.cls = script_string(script_field(a, "class"), "actor class");
    actor.position = script_vec2(script_field(a, "position"), "position");
    if (a.contains("heading")) actor.heading = script_number(a["heading"], "heading");
    if (a.contains("length")) actor.length = script_number(a["length"], "length");
    if (a.contains("width")) actor.width = script_number(a["width"], "width");
    if (a.contains("motion")) {
      if (!a["motion"].is_array()) script_error("'motion' must be an array");
      for (const auto& m : a["motion"]) {
        actor.motion.push_back({script_number(script_field(m, "until"), "until"),
                                script_vec2(script_field(m, "velocity"), "velocity")});
      }
    }
    s.actors.push_back(std::move(actor));
  }
  for (const auto& p : script_array(j, "phases")) {
    s.phases.push_back({script_string(script_field(p, "name"), "phase name"),
                        script_number(script_field(p, "until"), "until")});
  }
  if (j.contains("perturbations")) {
    if (!j["perturbations"].is_array()) script_error("'perturbations' must be an array");
    for (const auto& p : j["perturbations"]) {
      Perturbation pert;
      pert.name = script_string(script_field(p, "name"), "perturbation name");
      if (p.contains("aliases")) {
        if (!p["aliases"].is_array()) script_error("'aliases' must be an array");
        for (const auto& a : p["aliases"]) pert.aliases.push_back(script_string(a, "alias"));
      }
      pert.phase = script_string(script_field(p, "phase"), "phase");
      pert.actor = script_string(script_field(p, "actor"), "actor");
      std::string axis = script_string(script_field(p, "axis"), "axis");
      if (axis != "x" && axis != "y") script_error("axis must be \"x\" or \"y\"");
      pert.axis = axis[0];
      pert.threshold = script_number(script_field(p, "threshold"), "threshold");
      if (p.contains("offset")) pert.offset = script_number(p["offset"], "offset");
      s.perturbations.push_back(std::move(pert));
    }
  }
  s.validate();
  return s;
}

/// Activates a perturbation chosen by name, alias or phase name.
inline void set_perturbation(ScenarioScript& script, std::string_view key,
                             double offset) {
  for (auto& p : script.perturbations) {
    bool hit = p.name == key || p.phase == key ||
               std::find(p.aliases.begin(), p.aliases.end(), key) != p.aliases.end();
    if (hit) {
      p.offset = offset;
      return;
    }
  }
  throw Error(ErrorKind::UnknownName,
              "script '" + script.scenario + "' has no perturbation '" +
                  std::string(key) + "'");
}

/// Parses `name=offset` and applies it with set_perturbation.
inline void apply_perturbation_arg(ScenarioScript& script, std::string_view arg) {
  auto eq = arg.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorKind::Validation,
                "perturbation must be name=offset, got '" + std::string(arg) + "'");
  }
  std::string value(arg.substr(eq + 1));
  std::size_t used = 0;
  double offset = 0.0;
  try {
    offset = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(offset)) {
    throw Error(ErrorKind::Validation, "invalid perturbation offset '" + value + "'");
  }
  set_perturbation(script, arg.substr(0, eq), offset);
}

// ---------------------------------------------------------------------------
// Geometry

inline Vec2 actor_position(const Actor& a, double t) {
  Vec2 p = a.position;
  double start = 0.0;
  for (const auto& m : a.motion) {
    double end = std::min(t, m.until);
    if (end <= start) break;
    p.x += m.velocity.x * (end - start);
    p.y += m.velocity.y * (end - start);
    start = m.until;
  }
  return p;
}

inline double actor_speed(const Actor& a, double t) {
  double start = 0.0;
  for (const auto& m : a.motion) {
    if (t >= start && t < m.until) return std::hypot(m.velocity.x, m.velocity.y);
    start = m.until;
  }
  return 0.0;
}

struct Box {
  Interval x;
  Interval y;
};

/// Axis-aligned bound of the actor's rotated rectangle at `p`.
inline Box footprint(const Actor& a, Vec2 p) {
  double c = std::fabs(std::cos(a.heading));
  double s = std::fabs(std::sin(a.heading));
  double hx = 0.5 * (c * a.length + s * a.width);
  double hy = 0.5 * (s * a.length + c * a.width);
  return {{p.x - hx, p.x + hx}, {p.y - hy, p.y + hy}};
}

inline bool overlaps(Interval a, Interval b) {
  return std::min(a.hi, b.hi) - std::max(a.lo, b.lo) > 0.0;
}

/// An actor is in an area when its footprint overlaps it with positive area.
inline bool is_in(const Box& fp, const Area& area) {
  if (!area.lateral) return false;
  if (!overlaps(fp.y, *area.lateral)) return false;
  return !area.longitudinal || overlaps(fp.x, *area.longitudinal);
}

/// `b inFrontOf a`: b lies ahead of a along a's heading, within
/// `half_width` of a's centre line.
inline bool in_front_of(Vec2 b, Vec2 a, double a_heading, double half_width) {
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double c = std::cos(a_heading);
  double s = std::sin(a_heading);
  double ahead = dx * c + dy * s;
  double lateral = -dx * s + dy * c;
  return ahead > 0.0 && std::fabs(lateral) < half_width;
}

// ---------------------------------------------------------------------------
// Trace generation

/// Number of frames: t_k = k * dt for every t_k < duration.
inline std::size_t frame_count(const ScenarioScript& s) {
  if (s.duration <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(s.duration / s.dt - 1e-9));
}

/// Index of the phase whose span contains `t`.
inline std::size_t phase_at(const ScenarioScript& s, double t) {
  for (std::size_t i = 0; i < s.phases.size(); ++i) {
    if (t < s.phases[i].until) return i;
  }
  return s.phases.empty() ? 0 : s.phases.size() - 1;
}

struct LabeledTrace {
  std::vector<ConcreteSceneGraph> scenes;
  std::vector<std::size_t> phase_of_scene;  // index into script.phases
};

namespace detail {

// positions[frame][actor]
using PositionTable = std::vector<std::vector<Vec2>>;

inline std::size_t actor_index(const ScenarioScript& s, const std::string& id) {
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    if (s.actors[i].id == id) return i;
  }
  throw Error(ErrorKind::UnknownName, "unknown actor '" + id + "'");
}

inline void apply_offset(const ScenarioScript& s, const Perturbation& p,
                         const std::vector<double>& times,
                         const std::vector<std::size_t>& phase_of,
                         PositionTable& pos) {
  const std::size_t ego = actor_index(s, s.ego);
  const std::size_t who = actor_index(s, p.actor);
  std::size_t phase = 0;
  while (s.phases[phase].name != p.phase) ++phase;

  std::optional<std::size_t> closest;
  double best = 0.0;
  for (std::size_t f = 0; f < times.size(); ++f) {
    if (phase_of[f] != phase) continue;
    double d = distance(pos[f][ego], pos[f][who]);
    if (!closest || d < best) {
      closest = f;
      best = d;
    }
  }
  if (!closest) return;

  const Vec2 e = pos[*closest][ego];
  const Vec2 a = pos[*closest][who];
  const bool along_x = p.axis == 'x';
  const double along = along_x ? a.x - e.x : a.y - e.y;
  const double across = along_x ? a.y - e.y : a.x - e.x;
  const double target = std::max(0.0, p.threshold + *p.offset);
  const double sign = along < 0.0 ? -1.0 : 1.0;
  const double wanted = sign * std::sqrt(std::max(0.0, target * target - across * across));
  const double shift = wanted - along;
  for (std::size_t f = 0; f < times.size(); ++f) {
    if (phase_of[f] != phase) continue;
    (along_x ? pos[f][who].x : pos[f][who].y) += shift;
  }
}

}  // namespace detail

/// Deterministic trace of one scene per time step, each tagged with the
/// script phase active at its timestamp.
inline LabeledTrace generate_labeled_trace(const ScenarioScript& script,
                                           const ObjectModel& om) {
  script.validate();
  const std::size_t n = frame_count(script);
  std::vector<double> times(n);
  std::vector<std::size_t> phase_of(n);
  detail::PositionTable pos(n);
  for (std::size_t f = 0; f < n; ++f) {
    // Rounded so timestamps print as the decimal the step implies.
    times[f] = std::round(static_cast<double>(f) * script.dt * 1e9) / 1e9;
    phase_of[f] = phase_at(script, times[f]);
    for (const auto& a : script.actors) pos[f].push_back(actor_position(a, times[f]));
  }
  for (const auto& p : script.perturbations) {
    if (p.offset) detail::apply_offset(script, p, times, phase_of, pos);
  }

  std::set<Edge> static_edges;
  std::map<std::string, SceneNode> static_nodes;
  for (const auto& area : script.areas) {
    static_nodes.emplace(area.id, SceneNode{area.cls, {}});
    if (area.part_of) static_edges.insert({area.id, "isPartOf", *area.part_of});
  }

  // Schema lookups are hoisted out of the frame loop.
  const std::size_t na = script.actors.size();
  auto allowed = [&](const char* rel, const std::string& a, const std::string& b) {
    return om.has_relationship(rel) && om.is_relationship_allowed(rel, a, b);
  };
  std::vector<char> has_velocity(na), has_position(na);
  std::vector<std::vector<char>> in_ok(na), front_ok(na);
  for (std::size_t i = 0; i < na; ++i) {
    const Actor& a = script.actors[i];
    has_velocity[i] = om.find_attribute(a.cls, "velocity").has_value();
    has_position[i] = om.find_attribute(a.cls, "position").has_value();
    for (const auto& area : script.areas) in_ok[i].push_back(allowed("isIn", a.cls, area.cls));
    for (const auto& b : script.actors) front_ok[i].push_back(allowed("inFrontOf", b.cls, a.cls));
  }

  LabeledTrace out;
  out.scenes.reserve(n);
  for (std::size_t f = 0; f < n; ++f) {
    auto nodes = static_nodes;
    auto edges = static_edges;
    for (std::size_t i = 0; i < na; ++i) {
      const Actor& a = script.actors[i];
      SceneNode node{a.cls, {}};
      if (has_velocity[i]) node.attributes["velocity"] = actor_speed(a, times[f]);
      if (has_position[i]) node.attributes["position"] = pos[f][i];
      nodes.emplace(a.id, std::move(node));

      const Box fp = footprint(a, pos[f][i]);
      for (std::size_t r = 0; r < script.areas.size(); ++r) {
        if (in_ok[i][r] && is_in(fp, script.areas[r])) {
          edges.insert({a.id, "isIn", script.areas[r].id});
        }
      }
      for (std::size_t k = 0; k < na; ++k) {
        if (k == i || !front_ok[i][k]) continue;
        if (in_front_of(pos[f][k], pos[f][i], a.heading, script.front_half_width)) {
          edges.insert({script.actors[k].id, "inFrontOf", a.id});
        }
      }
    }
    out.scenes.push_back(ConcreteSceneGraph::create(times[f], script.ego,
                                                    std::move(nodes),
                                                    std::move(edges), om));
    out.phase_of_scene.push_back(phase_of[f]);
  }
  return out;
}

inline std::vector<ConcreteSceneGraph> generate_trace(const ScenarioScript& script,
                                                      const ObjectModel& om) {
  return generate_labeled_trace(script, om).scenes;
}

}  // namespace sgmon
