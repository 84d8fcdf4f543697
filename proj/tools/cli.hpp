#pragma once

// Command-line front end. `run` is the whole program minus process setup so
// tests can drive it in-process.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgmon/sgmon.hpp"

namespace sgmon::cli {

enum ExitCode : int {
  kOk = 0,
  kViolated = 1,
  kUsage = 2,
  kErrorVerdict = 3,
  kOracleDivergence = 4,
};

inline constexpr const char* kObjectModelEnv = "SGMON_OBJECT_MODEL";
inline constexpr const char* kBuiltinPrefix = "builtin:";

struct CliConfig {
  std::string subcommand;
  std::string om;  // "default", a path, or empty for the environment default
  std::vector<std::string> asgs;
  std::vector<std::string> props;
  std::string csg;
  std::string in;
  std::string out;
  double epsilon = 0.0;
  std::string phases;
  std::string scenario;
  std::string script;
  std::vector<std::string> perturb;
  bool oracle = false;
  bool induced = false;
  std::optional<std::size_t> limit;
  std::size_t nodes = 100;
  std::uint32_t seed = 1;
  std::size_t runs = 200;
};

namespace detail {

inline std::string read_text(const std::string& path, std::istream& stdin_stream) {
  if (path == "-") {
    std::ostringstream ss;
    ss << stdin_stream.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline ObjectModel load_om(const CliConfig& cfg, std::istream& in) {
  std::string choice = cfg.om;
  if (choice.empty()) {
    const char* env = std::getenv(kObjectModelEnv);
    choice = env && *env ? env : "default";
  }
  if (choice == "default") return default_object_model();
  return load_object_model(read_text(choice, in));
}

inline AbstractSceneGraph load_asg(const std::string& ref, const ObjectModel& om,
                                   std::istream& in) {
  const std::string prefix = kBuiltinPrefix;
  if (ref.rfind(prefix, 0) == 0) {
    return parse_asg(builtin_asg_text(std::string_view(ref).substr(prefix.size())), om);
  }
  try {
    return parse_asg(read_text(ref, in), om);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), ref + ": " + e.detail(), e.location());
  }
}

/// Files, directories (every *.asg inside, by name) and builtin: references.
inline std::vector<AbstractSceneGraph> load_properties(const std::vector<std::string>& refs,
                                                       const ObjectModel& om,
                                                       std::istream& in) {
  namespace fs = std::filesystem;
  std::vector<AbstractSceneGraph> out;
  for (const auto& ref : refs) {
    std::error_code ec;
    if (fs::is_directory(ref, ec)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(ref)) {
        if (entry.is_regular_file() && entry.path().extension() == ".asg") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw Error(ErrorKind::Io, "no .asg files in '" + ref + "'");
      for (const auto& f : files) out.push_back(load_asg(f.string(), om, in));
    } else {
      out.push_back(load_asg(ref, om, in));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (out[i].name() == out[j].name()) {
        throw Error(ErrorKind::Validation, "duplicate property '" + out[i].name() + "'");
      }
    }
  }
  return out;
}

/// Calls `fn` for each scene of a JSONL stream, one per non-blank line.
/// Errors carry the line number.
template <typename Fn>
void for_each_scene(std::istream& lines, const ObjectModel& om, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::optional<ConcreteSceneGraph> scene;
    try {
      scene.emplace(parse_csg(line, om));
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(number) + ": " + e.detail());
    }
    if (!fn(*scene)) return;
  }
  if (lines.bad()) throw Error(ErrorKind::Io, "read failed");
}

/// Opens `path` for reading; "-" selects the standard input stream.
class Source {
 public:
  Source(const std::string& path, std::istream& fallback) : stream_(&fallback) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
      stream_ = &file_;
    }
  }
  std::istream& operator*() { return *stream_; }

 private:
  std::ifstream file_;
  std::istream* stream_;
};

inline std::vector<ConcreteSceneGraph> read_stream(const std::string& path,
                                                   const ObjectModel& om, std::istream& in) {
  std::vector<ConcreteSceneGraph> out;
  Source src(path, in);
  for_each_scene(*src, om, [&](const ConcreteSceneGraph& g) {
    out.push_back(g);
    return true;
  });
  return out;
}

/// Writes to --out when given, otherwise to the standard output stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw Error(ErrorKind::Io, "write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline MonitorOptions monitor_options(const CliConfig& cfg) {
  if (!(cfg.epsilon >= 0.0)) throw Error(ErrorKind::Validation, "--epsilon must be >= 0");
  MonitorOptions opts;
  opts.epsilon = cfg.epsilon;
  opts.induced = cfg.induced;
  opts.oracle = cfg.oracle;
  return opts;
}

inline int verdict_exit(const std::vector<Verdict>& verdicts) {
  bool violated = false;
  for (const auto& v : verdicts) {
    if (v.result == Result::Error) return kErrorVerdict;
    violated = violated || v.result == Result::Violated;
  }
  return violated ? kViolated : kOk;
}

inline int cmd_check(const CliConfig& cfg, std::ostream& out, std::istream& in) {
  ObjectModel om = load_om(cfg, in);
  auto props = load_properties(cfg.asgs, om, in);
  auto scene = parse_csg(read_text(cfg.csg, in), om);
  MonitorOptions opts = monitor_options(cfg);
  std::vector<Verdict> verdicts;
  Sink sink(cfg.out, out);
  for (const auto& asg : props) {
    verdicts.push_back(sg_comparison(asg, scene, om, opts));
    *sink << serialize_verdict(verdicts.back()) << '\n';
  }
  sink.finish();
  return verdict_exit(verdicts);
}

inline int cmd_monitor(const CliConfig& cfg, std::ostream& out, std::ostream& err,
                       std::istream& in) {
  ObjectModel om = load_om(cfg, in);
  std::vector<AbstractSceneGraph> props;
  if (!cfg.props.empty()) {
    props = load_properties(cfg.props, om, in);
  } else if (!cfg.phases.empty()) {
    props = builtin_asgs(cfg.phases, om);
  } else {
    throw Error(ErrorKind::Validation, "monitor needs --props or --phases");
  }
  MonitorOptions opts = monitor_options(cfg);
  std::optional<PhaseMonitor> phased;
  std::optional<Monitor> plain;
  if (!cfg.phases.empty()) {
    phased.emplace(om, props, builtin_phases(cfg.phases), opts);
  } else {
    plain.emplace(om, props, opts);
  }

  Source src(cfg.in, in);
  Sink sink(cfg.out, out);
  std::size_t scenes = 0;
  std::size_t counts[3] = {0, 0, 0};
  for_each_scene(*src, om, [&](const ConcreteSceneGraph& scene) {
    if (cfg.limit && scenes == *cfg.limit) return false;
    ++scenes;
    auto vs = phased ? phased->process(scene) : plain->process(scene);
    for (const auto& v : vs) {
      *sink << serialize_verdict(v) << '\n';
      ++counts[static_cast<int>(v.result)];
    }
    return true;
  });
  sink.finish();

  err << "scenes: " << scenes << ", satisfied: " << counts[0]
      << ", violated: " << counts[1] << ", error: " << counts[2] << '\n';
  if (!phased) {
    if (counts[2] > 0) return kErrorVerdict;
    return counts[1] > 0 ? kViolated : kOk;
  }

  const PhaseAutomaton& pa = phased->automaton();
  err << "phases: reached " << pa.phases[pa.current] << " (" << pa.current + 1 << "/"
      << pa.phases.size() << "), " << (pa.completed ? "completed" : "not completed")
      << ", violations: " << pa.violations.size() << '\n';
  if (counts[2] > 0) return kErrorVerdict;
  return pa.completed && pa.violations.empty() ? kOk : kViolated;
}

inline int cmd_gen(const CliConfig& cfg, std::ostream& out, std::istream& in) {
  ObjectModel om = load_om(cfg, in);
  ScenarioScript script = cfg.script.empty() ? builtin_script(cfg.scenario)
                                             : load_script(read_text(cfg.script, in));
  for (const auto& p : cfg.perturb) apply_perturbation_arg(script, p);
  auto scenes = generate_trace(script, om);
  Sink sink(cfg.out, out);
  for (const auto& scene : scenes) *sink << serialize_csg(scene) << '\n';
  sink.finish();
  return kOk;
}

inline int cmd_bench(const CliConfig& cfg, std::ostream& out, std::istream& in) {
  ObjectModel om = load_om(cfg, in);
  AbstractSceneGraph asg = cfg.asgs.empty() ? builtin_asg("P2-2", om)
                                            : load_asg(cfg.asgs.front(), om, in);
  std::vector<ConcreteSceneGraph> scenes;
  std::string source;
  if (!cfg.in.empty()) {
    scenes = read_stream(cfg.in, om, in);
    source = cfg.in;
  } else if (!cfg.csg.empty()) {
    scenes.push_back(parse_csg(read_text(cfg.csg, in), om));
    source = cfg.csg;
  } else {
    scenes.push_back(synthetic_scene(cfg.nodes, cfg.seed, om));
    source = "synthetic";
  }
  if (cfg.runs == 0) throw Error(ErrorKind::Validation, "--runs must be positive");
  BenchReport r = bench_comparison(asg, scenes, om, cfg.runs, monitor_options(cfg));

  nlohmann::ordered_json j;
  j["property"] = asg.name();
  j["source"] = source;
  j["scenes"] = scenes.size();
  j["nodes"] = scenes.empty() ? 0 : scenes.front().nodes().size();
  j["samples"] = r.samples;
  j["p50_ms"] = r.p50_ms;
  j["p99_ms"] = r.p99_ms;
  j["mean_ms"] = r.mean_ms;
  Sink sink(cfg.out, out);
  *sink << j.dump() << '\n';
  sink.finish();
  return kOk;
}

inline int cmd_export(const CliConfig& cfg, std::ostream& out, std::istream& in) {
  ObjectModel om = load_om(cfg, in);
  std::string dot = cfg.asgs.empty()
                        ? export_dot(parse_csg(read_text(cfg.csg, in), om))
                        : export_dot(load_asg(cfg.asgs.front(), om, in));
  Sink sink(cfg.out, out);
  *sink << dot;
  sink.finish();
  return kOk;
}

}  // namespace detail

/// Runs one invocation; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               std::istream& in = std::cin) {
  CliConfig cfg;
  CLI::App app{"Scene-graph runtime monitor"};
  app.name("sgmon");
  app.require_subcommand(1);

  auto add_om = [&](CLI::App* sub) {
    sub->add_option("--om", cfg.om,
                    "object model: 'default' or a schema path (env " +
                        std::string(kObjectModelEnv) + ")");
  };
  auto add_matching = [&](CLI::App* sub) {
    sub->add_option("--epsilon", cfg.epsilon, "comparison tolerance (default exact)");
    sub->add_flag("--oracle", cfg.oracle, "cross-check every match against brute force");
    sub->add_flag("--induced", cfg.induced, "require induced embeddings");
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "output path (default standard output)");
  };

  auto* check = app.add_subcommand("check", "check one scene against properties");
  add_om(check);
  check->add_option("--asg", cfg.asgs, "property file, directory or builtin:NAME")
      ->required();
  check->add_option("--csg", cfg.csg, "scene JSON record ('-' for stdin)")->required();
  add_matching(check);
  add_out(check);

  auto* monitor = app.add_subcommand("monitor", "monitor a scene stream");
  add_om(monitor);
  monitor->add_option("--props", cfg.props, "property files, directories or builtin:NAME");
  monitor->add_option("--in", cfg.in, "scene JSONL stream ('-' for stdin)")->required();
  monitor->add_option("--phases", cfg.phases, "run the phase automaton of P1 or P2");
  monitor->add_option("--limit", cfg.limit, "process at most this many scenes");
  add_matching(monitor);
  add_out(monitor);

  auto* gen = app.add_subcommand("gen", "generate a scene trace from a script");
  add_om(gen);
  auto* scenario = gen->add_option("--scenario", cfg.scenario, "bundled script: P1 or P2");
  auto* script = gen->add_option("--script", cfg.script, "script JSON path");
  scenario->excludes(script);
  gen->add_option("--perturb", cfg.perturb, "activate a perturbation: name=offset");
  add_out(gen);
  gen->callback([&] {
    if (cfg.scenario.empty() && cfg.script.empty()) {
      throw CLI::RequiredError("--scenario or --script");
    }
  });

  auto* bench = app.add_subcommand("bench", "time sg_comparison");
  add_om(bench);
  bench->add_option("--asg", cfg.asgs, "property (default builtin:P2-2)")->expected(1);
  auto* bin = bench->add_option("--in", cfg.in, "scene JSONL stream");
  auto* bcsg = bench->add_option("--csg", cfg.csg, "single scene JSON record");
  auto* nodes = bench->add_option("--nodes", cfg.nodes, "synthetic scene size");
  auto* seed = bench->add_option("--seed", cfg.seed, "synthetic scene seed");
  bin->excludes(bcsg)->excludes(nodes)->excludes(seed);
  bcsg->excludes(nodes)->excludes(seed);
  bench->add_option("--runs", cfg.runs, "passes over the scenes");
  add_matching(bench);
  add_out(bench);

  auto* exp = app.add_subcommand("export", "write a property or scene as Graphviz DOT");
  add_om(exp);
  auto* easg = exp->add_option("--asg", cfg.asgs, "property file or builtin:NAME")
                   ->expected(1);
  auto* ecsg = exp->add_option("--csg", cfg.csg, "scene JSON record");
  easg->excludes(ecsg);
  add_out(exp);
  exp->callback([&] {
    if (cfg.asgs.empty() && cfg.csg.empty()) throw CLI::RequiredError("--asg or --csg");
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::string name = app.get_subcommands().front()->get_name();
  cfg.subcommand = name;
  try {
    if (name == "check") return detail::cmd_check(cfg, out, in);
    if (name == "monitor") return detail::cmd_monitor(cfg, out, err, in);
    if (name == "gen") return detail::cmd_gen(cfg, out, in);
    if (name == "bench") return detail::cmd_bench(cfg, out, in);
    return detail::cmd_export(cfg, out, in);
  } catch (const OracleDivergence& e) {
    err << "sgmon: oracle divergence: " << e.what() << '\n';
    return kOracleDivergence;
  } catch (const Error& e) {
    err << "sgmon: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace sgmon::cli
