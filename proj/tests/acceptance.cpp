// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "test_util.hpp"

using namespace sgmon;
using namespace sgmon::testing;

namespace {

// Pinned limits.
constexpr int kOracleInstances = 2000;
constexpr double kOracleSeconds = 30.0;
constexpr double kP1Seconds = 1.0;
constexpr std::size_t kP1MaxFrames = 200;
constexpr double kP2Seconds = 2.0;
constexpr int kFuzzCases = 10000;
constexpr std::size_t kBenchNodes = 100;
constexpr std::size_t kBenchRuns = 200;
constexpr double kBenchMedianMs = 10.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
  bool ok = true;
  std::string first_failure;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
};

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail
            << std::endl;
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Steps whose verdict for the script-labelled phase is not Satisfied, plus
// the automaton state after the run.
struct PhaseRun {
  std::vector<std::size_t> active_violations;
  std::vector<std::size_t> script_phase;
  std::vector<std::vector<Verdict>> verdicts;
  PhaseAutomaton automaton;
  std::size_t frames = 0;
};

PhaseRun run_script(const ScenarioScript& script) {
  const ObjectModel& om = default_object_model();
  LabeledTrace trace = generate_labeled_trace(script, om);
  PhaseMonitor pm(om, builtin_asgs(script.scenario, om), builtin_phases(script.scenario));
  PhaseRun run;
  run.frames = trace.scenes.size();
  run.script_phase = trace.phase_of_scene;
  for (std::size_t i = 0; i < trace.scenes.size(); ++i) {
    run.verdicts.push_back(pm.process(trace.scenes[i]));
    if (run.verdicts.back()[trace.phase_of_scene[i]].result != Result::Satisfied) {
      run.active_violations.push_back(i);
    }
  }
  run.automaton = pm.automaton();
  return run;
}

Outcome oracle_equivalence() {
  const ObjectModel& om = default_object_model();
  std::mt19937 rng(20240611);
  Check c;
  std::size_t nonempty = 0;
  auto start = Clock::now();
  int n = 0;
  for (; n < kOracleInstances && c.ok; ++n) {
    auto csg = random_scene(rng, 8, om);
    auto asg = random_pattern(rng, 4, om);
    auto fast = find_embeddings(asg, csg, om);
    std::sort(fast.begin(), fast.end());
    auto brute = brute_force_embeddings(asg, csg, om);
    auto naive = naive_embeddings(asg, csg, om);
    std::sort(naive.begin(), naive.end());
    c.expect(fast == brute, "matcher vs brute force, instance " + std::to_string(n));
    c.expect(brute == naive, "brute force vs naive, instance " + std::to_string(n));
    Verdict v = sg_comparison(asg, csg, om);
    c.expect(reference_verdict(asg, csg, om).admits(v),
             "verdict vs reference, instance " + std::to_string(n));
    if (!fast.empty()) ++nonempty;
  }
  double secs = seconds_since(start);
  c.expect(secs < kOracleSeconds, "runtime " + fmt(secs) + " s");
  c.expect(nonempty >= static_cast<std::size_t>(kOracleInstances / 10),
           "too few instances with embeddings");
  return {c.ok, std::to_string(n) + " instances (" + std::to_string(nonempty) +
                    " with embeddings), " + (c.ok ? "0 divergences" : c.first_failure) +
                    ", " + fmt(secs) + " s (limit " + fmt(kOracleSeconds, 0) + " s)"};
}

Outcome obstacle_ahead_fixture() {
  const ObjectModel& om = default_object_model();
  auto asg = builtin_asg("obstacle_ahead", om);
  Check c;
  Verdict sat = sg_comparison(asg, obstacle_scene(0.0, 10.0), om);
  c.expect(sat.result == Result::Satisfied && sat.witness, "satisfying scene");
  Verdict moving = sg_comparison(asg, obstacle_scene(1.0, 10.0), om);
  c.expect(moving.result == Result::Violated && moving.cause == Cause::predicate_failed(0),
           "velocity 1.0");
  Verdict far = sg_comparison(asg, obstacle_scene(0.0, 25.0), om);
  c.expect(far.result == Result::Violated && far.cause == Cause::predicate_failed(1),
           "gap 25 m");
  Verdict vehicle = sg_comparison(asg, obstacle_scene(0.0, 10.0, "Vehicle"), om);
  c.expect(vehicle.result == Result::Violated && vehicle.cause == Cause::no_embedding(),
           "obstacle class Vehicle");
  return {c.ok, c.ok ? "Satisfied / PredicateFailed 0 / PredicateFailed 1 / NoEmbedding"
                     : c.first_failure};
}

Outcome p1_golden() {
  Check c;
  auto start = Clock::now();
  PhaseRun nominal = run_script(builtin_script("P1"));
  auto script = builtin_script("P1");
  set_perturbation(script, "rear_gap", -5.0);  // 10 m gap against the 15 m threshold
  PhaseRun perturbed = run_script(script);
  double secs = seconds_since(start);

  c.expect(nominal.frames <= kP1MaxFrames, "frame count " + std::to_string(nominal.frames));
  c.expect(nominal.automaton.completed, "nominal run does not complete");
  c.expect(nominal.automaton.violations.empty(), "nominal automaton violations");
  c.expect(nominal.active_violations.empty(), "nominal active-phase violations");
  std::size_t p12_failed = 0;
  for (std::size_t step = 0; step < perturbed.verdicts.size(); ++step) {
    const Verdict& v = perturbed.verdicts[step][1];
    if (perturbed.script_phase[step] == 1 && v.result == Result::Violated && v.cause &&
        v.cause->kind == Cause::Kind::PredicateFailed) {
      ++p12_failed;
    }
  }
  c.expect(p12_failed >= 1, "no P1-2 PredicateFailed under rear_gap");
  c.expect(secs < kP1Seconds, "runtime " + fmt(secs) + " s");
  return {c.ok, std::to_string(nominal.frames) + " frames, completed, 0 active-phase "
                    "violations; rear_gap 10 m -> " + std::to_string(p12_failed) +
                    " P1-2 PredicateFailed; " + fmt(secs) + " s (limit " +
                    fmt(kP1Seconds, 0) + " s)" + (c.ok ? "" : "; " + c.first_failure)};
}

Outcome p2_golden() {
  Check c;
  auto start = Clock::now();
  PhaseRun nominal = run_script(builtin_script("P2"));
  c.expect(nominal.automaton.completed, "nominal run does not complete");
  c.expect(nominal.automaton.violations.empty(), "nominal automaton violations");
  c.expect(nominal.active_violations.empty(), "nominal active-phase violations");

  const std::pair<const char*, double> perturbations[] = {
      {"approach_gap", -1.0}, {"oncoming_gap", -20.0},
      {"pass_clearance", -0.5}, {"return_gap", -1.0}};
  std::string counts;
  for (std::size_t k = 0; k < 4; ++k) {
    auto script = builtin_script("P2");
    set_perturbation(script, perturbations[k].first, perturbations[k].second);
    PhaseRun run = run_script(script);
    const std::string name = perturbations[k].first;
    c.expect(!run.active_violations.empty(), name + ": no violation");
    for (std::size_t step : run.active_violations) {
      c.expect(run.script_phase[step] == k, name + ": violation outside its phase");
      const Verdict& own = run.verdicts[step][k];
      c.expect(own.result == Result::Violated && own.cause &&
                   own.cause->kind == Cause::Kind::PredicateFailed,
               name + ": not PredicateFailed");
    }
    counts += (k ? ", " : "") + name + " " + std::to_string(run.active_violations.size());
  }
  double secs = seconds_since(start);
  c.expect(secs < kP2Seconds, "runtime " + fmt(secs) + " s");
  return {c.ok, "completed 5/5 phases; violations only in own phase (" + counts + "); " +
                    fmt(secs) + " s (limit " + fmt(kP2Seconds, 0) + " s)" +
                    (c.ok ? "" : "; " + c.first_failure)};
}

Outcome boundary_exactness() {
  const ObjectModel& om = default_object_model();
  const std::map<std::string, std::string> nodes{{"ego", "Vehicle"}, {"other", "Vehicle"}};
  Check c;
  int cases = 0;
  for (double x : {2.0, 5.0, 15.0, 20.0, 30.0}) {
    Predicate ge = parse_predicate("dist(ego, other) >= " + format_real(x), om, nodes);
    auto at = [](Vec2 p) {
      return Binding{{"ego", {"ego", {{"position", Vec2{0.0, 0.0}}}}},
                     {"other", {"other", {{"position", p}}}}};
    };
    c.expect(evaluate_one(ge, at({x, 0.0})), ">= at " + format_real(x));
    c.expect(evaluate_one(ge, at({0.0, -x})), ">= at " + format_real(x) + " on y");
    c.expect(!evaluate_one(ge, at({std::nextafter(x, 0.0), 0.0})),
             ">= below " + format_real(x));
    cases += 3;
  }
  auto asg = builtin_asg("obstacle_ahead", om);
  c.expect(sg_comparison(asg, obstacle_scene(0.0, 20.0), om).result == Result::Satisfied,
           "(0, 20] at 20");
  c.expect(sg_comparison(asg, obstacle_scene(0.0, std::nextafter(20.0, 21.0)), om).cause ==
               Cause::predicate_failed(1),
           "(0, 20] above 20");
  c.expect(sg_comparison(asg, obstacle_scene(0.0, 0.0), om).cause == Cause::predicate_failed(1),
           "(0, 20] at 0");
  // |(12, 16)| is exactly 20 in binary floating point.
  Predicate in = parse_predicate("dist(ego, other) in (0, 20]", om, nodes);
  c.expect(evaluate_one(in, Binding{{"ego", {"ego", {{"position", Vec2{0.0, 0.0}}}}},
                                    {"other", {"other", {{"position", Vec2{12.0, 16.0}}}}}}),
           "(0, 20] at |(12, 16)|");
  cases += 4;
  return {c.ok, std::to_string(cases) + " boundary cases exact with epsilon 0" +
                    (c.ok ? "" : "; " + c.first_failure)};
}

Outcome determinism() {
  std::ostringstream err;
  auto capture = [&](const std::vector<std::string>& args, const std::string& input) {
    std::ostringstream out;
    std::istringstream in(input);
    int code = cli::run(args, out, err, in);
    return std::make_pair(code, out.str());
  };
  auto [gen_code, trace] = capture({"gen", "--scenario", "P2", "--perturb", "rear_gap=-20"}, "");
  auto first = capture({"monitor", "--phases", "P2", "--in", "-"}, trace);
  auto second = capture({"monitor", "--phases", "P2", "--in", "-"}, trace);
  auto [gen2_code, trace2] = capture({"gen", "--scenario", "P2", "--perturb", "rear_gap=-20"}, "");
  bool ok = gen_code == 0 && gen2_code == 0 && trace == trace2 && first.first == second.first &&
            !first.second.empty() && first.second == second.second;
  return {ok, std::to_string(first.second.size()) + " bytes of verdicts, " +
                  (ok ? "byte-identical across runs" : "outputs differ")};
}

// Random edits of valid specs: byte flips, deletions, insertions of grammar
// characters, truncation and line splices.
std::string mutate(const std::string& text, std::mt19937& rng) {
  static const std::string alphabet = "{}();:,.[]<>=!&|\"\\/ \n\tabcegimnorsv0123456789-_";
  std::string s = text;
  std::uniform_int_distribution<int> kind(0, 5);
  int edits = 1 + static_cast<int>(rng() % 4);
  for (int e = 0; e < edits && !s.empty(); ++e) {
    std::size_t pos = rng() % s.size();
    switch (kind(rng)) {
      case 0: s[pos] = alphabet[rng() % alphabet.size()]; break;
      case 1: s.erase(pos, 1 + rng() % 8); break;
      case 2: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
      case 3: s.resize(pos); break;
      case 4: s.insert(pos, s.substr(rng() % s.size(), 1 + rng() % 20)); break;
      default: s[pos] = static_cast<char>(rng() % 256); break;
    }
  }
  return s;
}

Outcome dsl_robustness() {
  const ObjectModel& om = default_object_model();
  Check c;
  std::vector<std::string> sources;
  for (const auto& name : builtin_asg_names()) {
    auto asg = builtin_asg(name, om);
    std::string text = serialize_asg(asg);
    auto again = parse_asg(text, om);
    c.expect(again == asg && serialize_asg(again) == text, "round trip " + name);
    sources.emplace_back(builtin_asg_text(name));
  }
  std::mt19937 rng(99);
  int parsed = 0, located = 0;
  for (int i = 0; i < kFuzzCases; ++i) {
    std::string input = mutate(sources[rng() % sources.size()], rng);
    try {
      parse_asg(input, om);
      ++parsed;
    } catch (const Error& e) {
      c.expect(e.location().has_value(), std::string("unlocated error: ") + e.what());
      ++located;
    } catch (const std::exception& e) {
      c.expect(false, std::string("foreign exception: ") + e.what());
    }
  }
  return {c.ok, std::to_string(sources.size()) + " bundled files round-trip; " +
                    std::to_string(kFuzzCases) + " fuzz cases: " + std::to_string(parsed) +
                    " parsed, " + std::to_string(located) + " located errors" +
                    (c.ok ? "" : "; " + c.first_failure)};
}

Outcome bench_median() {
  const ObjectModel& om = default_object_model();
  auto asg = builtin_asg("P2-2", om);
  auto scene = synthetic_scene(kBenchNodes, 1, om);
  BenchReport r = bench_comparison(asg, scene, om, kBenchRuns);
  bool ok = asg.pattern_nodes().size() == 6 && scene.nodes().size() == kBenchNodes &&
            r.p50_ms < kBenchMedianMs;
  return {ok, "P2-2 (" + std::to_string(asg.pattern_nodes().size()) + " nodes) on " +
                  std::to_string(scene.nodes().size()) + "-node scene, " +
                  std::to_string(r.samples) + " runs: median " + fmt(r.p50_ms) +
                  " ms, p99 " + fmt(r.p99_ms) + " ms (limit " + fmt(kBenchMedianMs, 0) +
                  " ms)"};
}

}  // namespace

int main() {
  report(1, "oracle-equivalence", oracle_equivalence);
  report(2, "obstacle-ahead-fixture", obstacle_ahead_fixture);
  report(3, "p1-golden-trace", p1_golden);
  report(4, "p2-golden-trace", p2_golden);
  report(5, "boundary-exactness", boundary_exactness);
  report(6, "determinism", determinism);
  report(7, "dsl-robustness", dsl_robustness);
  report(8, "bench-median", bench_median);
  return failures == 0 ? 0 : 1;
}
