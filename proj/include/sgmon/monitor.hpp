#pragma once

// Runtime monitor: per-scene satisfaction verdicts and the phase automaton
// that tracks an ordered list of phase properties over a scene stream.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgmon/error.hpp"
#include "sgmon/matcher.hpp"
#include "sgmon/predicate.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

enum class Result { Satisfied, Violated, Error };

inline const char* to_string(Result r) {
  switch (r) {
    case Result::Satisfied: return "Satisfied";
    case Result::Violated: return "Violated";
    case Result::Error: return "Error";
  }
  return "?";
}

struct Cause {
  enum class Kind { NoEmbedding, PredicateFailed, MissingAttribute };

  Kind kind = Kind::NoEmbedding;
  std::size_t index = 0;   // PredicateFailed
  std::string attribute;   // MissingAttribute, as `pattern-id.attribute`

  static Cause no_embedding() { return {Kind::NoEmbedding, 0, {}}; }
  static Cause predicate_failed(std::size_t i) {
    return {Kind::PredicateFailed, i, {}};
  }
  static Cause missing_attribute(std::string name) {
    return {Kind::MissingAttribute, 0, std::move(name)};
  }

  friend bool operator==(const Cause&, const Cause&) = default;
};

inline const char* to_string(Cause::Kind k) {
  switch (k) {
    case Cause::Kind::NoEmbedding: return "NoEmbedding";
    case Cause::Kind::PredicateFailed: return "PredicateFailed";
    case Cause::Kind::MissingAttribute: return "MissingAttribute";
  }
  return "?";
}

/// Satisfied carries a witness; Violated and Error carry a cause.
struct Verdict {
  double timestamp = 0.0;
  std::string property;
  Result result = Result::Violated;
  std::optional<Embedding> witness;
  std::optional<Cause> cause;
  std::optional<std::size_t> phase_index;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct MonitorOptions {
  double epsilon = 0.0;
  bool induced = false;
  /// Cross-check every matcher result against brute_force_embeddings.
  bool oracle = false;
  std::size_t oracle_bound = kDefaultOracleBound;
};

/// Raised in oracle mode when the matcher and the brute-force reference
/// disagree. Always indicates a bug.
class OracleDivergence : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void cross_check(const AbstractSceneGraph& asg,
                        const ConcreteSceneGraph& csg, const ObjectModel& om,
                        const MonitorOptions& opts) {
  auto fast = find_embeddings(asg, csg, om, {kUnlimited, opts.induced});
  auto slow = brute_force_embeddings(asg, csg, om, opts.oracle_bound, opts.induced);
  std::sort(fast.begin(), fast.end());
  if (fast != slow) {
    throw OracleDivergence("matcher found " + std::to_string(fast.size()) +
                           " embedding(s), oracle found " +
                           std::to_string(slow.size()) + " for property '" +
                           asg.name() + "' at t=" + format_real(csg.timestamp()));
  }
}

inline Verdict compare_with_index(const AbstractSceneGraph& asg,
                                  const ConcreteSceneGraph& csg,
                                  const SceneIndex& index, const ObjectModel& om,
                                  const MonitorOptions& opts) {
  Verdict v;
  v.timestamp = csg.timestamp();
  v.property = asg.name();
  if (opts.oracle) cross_check(asg, csg, om, opts);

  bool any = false;
  std::optional<std::size_t> first_failure;
  std::optional<std::string> missing;
  for_each_embedding(asg, index, om, {kUnlimited, opts.induced},
                     [&](const Embedding& emb) {
                       any = true;
                       try {
                         EvalResult r = evaluate(asg.predicates(),
                                                 make_binding(emb, csg),
                                                 {opts.epsilon});
                         if (r.satisfied) {
                           v.witness = emb;
                           return false;
                         }
                         if (!first_failure) first_failure = r.first_failure;
                       } catch (const MissingAttributeError& e) {
                         if (!missing) missing = e.name();
                       }
                       return true;
                     });

  if (v.witness) {
    v.result = Result::Satisfied;
  } else if (!any) {
    v.result = Result::Violated;
    v.cause = Cause::no_embedding();
  } else if (missing) {
    v.result = Result::Error;
    v.cause = Cause::missing_attribute(*missing);
  } else {
    v.result = Result::Violated;
    v.cause = Cause::predicate_failed(first_failure.value_or(0));
  }
  return v;
}

}  // namespace detail

/// CSG ⊨ ASG iff some embedding's binding satisfies every predicate.
///
/// Embeddings are tried in matcher order and the first satisfying one is the
/// witness. Without one the verdict is Violated(NoEmbedding) when nothing
/// matched, Error(MissingAttribute) when some embedding could not be
/// evaluated, and otherwise Violated(PredicateFailed) with the first failing
/// predicate of the first embedding.
inline Verdict sg_comparison(const AbstractSceneGraph& asg,
                             const ConcreteSceneGraph& csg, const ObjectModel& om,
                             const MonitorOptions& opts = {}) {
  SceneIndex index(csg);
  return detail::compare_with_index(asg, csg, index, om, opts);
}

/// Online monitor over a time-ordered scene stream. Each call to `process`
/// returns one verdict per property, in declaration order.
class Monitor {
 public:
  Monitor(const ObjectModel& om, std::vector<AbstractSceneGraph> properties,
          MonitorOptions opts = {})
      : om_(om), properties_(std::move(properties)), opts_(opts) {}

  const std::vector<AbstractSceneGraph>& properties() const {
    return properties_;
  }

  std::vector<Verdict> process(const ConcreteSceneGraph& scene) {
    if (last_ && scene.timestamp() < *last_) {
      throw Error(ErrorKind::Stream,
                  "scene at t=" + format_real(scene.timestamp()) +
                      " arrives after t=" + format_real(*last_));
    }
    last_ = scene.timestamp();
    SceneIndex index(scene);
    std::vector<Verdict> out;
    out.reserve(properties_.size());
    for (const auto& asg : properties_) {
      out.push_back(detail::compare_with_index(asg, scene, index, om_, opts_));
    }
    return out;
  }

 private:
  const ObjectModel& om_;
  std::vector<AbstractSceneGraph> properties_;
  MonitorOptions opts_;
  std::optional<double> last_;
};

inline std::vector<Verdict> monitor_stream(
    const ObjectModel& om, const std::vector<AbstractSceneGraph>& properties,
    const std::vector<ConcreteSceneGraph>& scenes, const MonitorOptions& opts = {}) {
  Monitor mon(om, properties, opts);
  std::vector<Verdict> out;
  for (const auto& scene : scenes) {
    auto vs = mon.process(scene);
    out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase automaton

struct PhaseAutomaton {
  std::vector<std::string> phases;
  std::size_t current = 0;
  std::vector<std::size_t> dwell;  // scenes spent in each phase
  bool completed = false;
  std::size_t steps = 0;
  /// Step numbers (0-based) at which neither the current nor the next phase
  /// was satisfied.
  std::vector<std::size_t> violations;
  bool last_step_violated = false;

  friend bool operator==(const PhaseAutomaton&, const PhaseAutomaton&) = default;
};

inline PhaseAutomaton make_phase_automaton(std::vector<std::string> phases) {
  PhaseAutomaton pa;
  pa.dwell.assign(phases.size(), 0);
  pa.phases = std::move(phases);
  return pa;
}

/// Advances to the next phase when it is satisfied, otherwise stays while the
/// current phase holds, otherwise records a violation for this scene. Phases
/// are never skipped. Missing verdicts count as not satisfied.
inline PhaseAutomaton step_phase(PhaseAutomaton pa,
                                 const std::map<std::string, Verdict>& verdicts) {
  auto satisfied = [&](std::size_t i) {
    if (i >= pa.phases.size()) return false;
    auto it = verdicts.find(pa.phases[i]);
    return it != verdicts.end() && it->second.result == Result::Satisfied;
  };
  const std::size_t step = pa.steps++;
  pa.last_step_violated = false;
  if (pa.phases.empty()) return pa;

  bool holds = false;
  if (satisfied(pa.current + 1)) {
    ++pa.current;
    holds = true;
  } else if (satisfied(pa.current)) {
    holds = true;
  } else {
    pa.violations.push_back(step);
    pa.last_step_violated = true;
  }
  ++pa.dwell[pa.current];
  if (holds && pa.current + 1 == pa.phases.size()) pa.completed = true;
  return pa;
}

/// Monitor plus phase automaton. Verdicts come back with `phase_index` set
/// to the automaton position after the scene was consumed.
class PhaseMonitor {
 public:
  PhaseMonitor(const ObjectModel& om, std::vector<AbstractSceneGraph> properties,
               std::vector<std::string> phases, MonitorOptions opts = {})
      : monitor_(om, std::move(properties), opts),
        automaton_(make_phase_automaton(std::move(phases))) {
    for (const auto& phase : automaton_.phases) {
      bool known = std::any_of(
          monitor_.properties().begin(), monitor_.properties().end(),
          [&](const AbstractSceneGraph& a) { return a.name() == phase; });
      if (!known) {
        throw Error(ErrorKind::UnknownName,
                    "phase '" + phase + "' has no matching property");
      }
    }
  }

  std::vector<Verdict> process(const ConcreteSceneGraph& scene) {
    auto verdicts = monitor_.process(scene);
    std::map<std::string, Verdict> by_name;
    for (const auto& v : verdicts) by_name.emplace(v.property, v);
    automaton_ = step_phase(std::move(automaton_), by_name);
    for (auto& v : verdicts) v.phase_index = automaton_.current;
    return verdicts;
  }

  const PhaseAutomaton& automaton() const { return automaton_; }

 private:
  Monitor monitor_;
  PhaseAutomaton automaton_;
};

// ---------------------------------------------------------------------------
// Verdict JSONL

inline nlohmann::ordered_json verdict_to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["t"] = v.timestamp;
  j["property"] = v.property;
  j["result"] = to_string(v.result);
  if (v.witness) {
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (const auto& [pid, oid] : v.witness->mapping) w[pid] = oid;
    j["witness"] = std::move(w);
  }
  if (v.cause) {
    nlohmann::ordered_json c;
    c["kind"] = to_string(v.cause->kind);
    if (v.cause->kind == Cause::Kind::PredicateFailed) c["index"] = v.cause->index;
    if (v.cause->kind == Cause::Kind::MissingAttribute) {
      c["attribute"] = v.cause->attribute;
    }
    j["cause"] = std::move(c);
  }
  if (v.phase_index) j["phase_index"] = *v.phase_index;
  return j;
}

inline std::string serialize_verdict(const Verdict& v) {
  return verdict_to_json(v).dump();
}

}  // namespace sgmon
