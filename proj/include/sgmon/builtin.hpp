#pragma once

// Default object model, the bundled P1/P2 phase properties and the
// obstacle-ahead example property, compiled into the library.

#include <string>
#include <string_view>
#include <vector>

#include "sgmon/asg_dsl.hpp"
#include "sgmon/bundled_data.hpp"
#include "sgmon/error.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/scenario.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

inline std::string_view default_object_model_text() { return bundled::object_model; }

/// Parsed once; lives for the whole program.
inline const ObjectModel& default_object_model() {
  static const ObjectModel om = load_object_model(bundled::object_model);
  return om;
}

inline std::vector<std::string> builtin_asg_names() {
  std::vector<std::string> out;
  for (const auto& f : bundled::asg_files) out.emplace_back(f.name);
  return out;
}

inline std::string_view builtin_asg_text(std::string_view name) {
  for (const auto& f : bundled::asg_files) {
    if (f.name == name) return f.text;
  }
  throw Error(ErrorKind::UnknownName, "no bundled ASG '" + std::string(name) + "'");
}

inline AbstractSceneGraph builtin_asg(std::string_view name,
                                      const ObjectModel& om = default_object_model()) {
  return parse_asg(builtin_asg_text(name), om);
}

inline bool is_builtin_scenario(std::string_view scenario) {
  return scenario == "P1" || scenario == "P2";
}

/// Phase names of a bundled scenario, in narrative order.
inline std::vector<std::string> builtin_phases(std::string_view scenario) {
  if (scenario == "P1") return {"P1-1", "P1-2", "P1-3"};
  if (scenario == "P2") return {"P2-1", "P2-2", "P2-3", "P2-4", "P2-5"};
  throw Error(ErrorKind::UnknownScenario,
              "unknown scenario '" + std::string(scenario) + "'");
}

inline std::vector<AbstractSceneGraph> builtin_asgs(
    std::string_view scenario, const ObjectModel& om = default_object_model()) {
  std::vector<AbstractSceneGraph> out;
  for (const auto& name : builtin_phases(scenario)) out.push_back(builtin_asg(name, om));
  return out;
}

inline std::string_view builtin_script_text(std::string_view scenario) {
  for (const auto& f : bundled::script_files) {
    if (f.name == scenario) return f.text;
  }
  throw Error(ErrorKind::UnknownScenario,
              "unknown scenario '" + std::string(scenario) + "'");
}

inline ScenarioScript builtin_script(std::string_view scenario) {
  return load_script(builtin_script_text(scenario));
}

}  // namespace sgmon
