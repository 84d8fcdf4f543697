#pragma once

// Synthetic workload for matcher latency measurements.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sgmon/builtin.hpp"
#include "sgmon/monitor.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

/// Multi-lane road scene with `node_count` nodes in total: one road, four
/// lanes, the ego, and a mix of vehicles and static objects placed on the
/// lanes. Deterministic for a given seed.
inline ConcreteSceneGraph synthetic_scene(std::size_t node_count, std::uint32_t seed,
                                          const ObjectModel& om = default_object_model()) {
  constexpr std::size_t kLanes = 4;
  if (node_count < kLanes + 2) {
    throw Error(ErrorKind::Validation, "synthetic scene needs at least 6 nodes");
  }
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> along(0.0, 400.0);
  std::uniform_real_distribution<double> speed(0.0, 14.0);
  std::bernoulli_distribution is_static(0.3);
  std::bernoulli_distribution straddles(0.1);

  std::map<std::string, SceneNode> nodes;
  std::set<Edge> edges;
  nodes["road"] = {"Road", {}};
  for (std::size_t l = 0; l < kLanes; ++l) {
    std::string id = "lane" + std::to_string(l);
    nodes[id] = {"Lane", {}};
    edges.insert({id, "isPartOf", "road"});
  }

  struct Placed {
    std::string id;
    double x;
    std::size_t lane;
  };
  std::vector<Placed> placed;
  const std::size_t participants = node_count - kLanes - 1;
  for (std::size_t i = 0; i < participants; ++i) {
    bool ego = i == 0;
    std::string id = ego ? "ego" : "obj" + std::to_string(i);
    bool stat = !ego && is_static(rng);
    double x = ego ? 100.0 : along(rng);
    std::size_t lane = rng() % kLanes;
    double v = stat ? 0.0 : speed(rng);
    nodes[id] = {stat ? "Static" : "Vehicle",
                 {{"velocity", v}, {"position", Vec2{x, 3.5 * static_cast<double>(lane)}}}};
    edges.insert({id, "isIn", "lane" + std::to_string(lane)});
    if (ego || straddles(rng)) {
      edges.insert({id, "isIn", "lane" + std::to_string((lane + 1) % kLanes)});
    }
    placed.push_back({id, x, lane});
  }
  for (const auto& a : placed) {
    for (const auto& b : placed) {
      if (a.id != b.id && a.lane == b.lane && b.x > a.x && b.x - a.x < 60.0) {
        edges.insert({b.id, "inFrontOf", a.id});
      }
    }
  }
  return ConcreteSceneGraph::create(0.0, "ego", std::move(nodes), std::move(edges), om);
}

struct BenchReport {
  std::size_t samples = 0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double mean_ms = 0.0;
  std::vector<Verdict> verdicts;  // one per scene, from the first pass
};

/// Nearest-rank percentile of a sorted sample.
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

/// Times one sg_comparison per scene per pass. Every call is one sample.
inline BenchReport bench_comparison(const AbstractSceneGraph& asg,
                                    const std::vector<ConcreteSceneGraph>& scenes,
                                    const ObjectModel& om, std::size_t passes,
                                    const MonitorOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  BenchReport r;
  std::vector<double> ms;
  ms.reserve(passes * scenes.size());
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (const auto& scene : scenes) {
      auto start = clock::now();
      Verdict v = sg_comparison(asg, scene, om, opts);
      auto stop = clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
      if (pass == 0) r.verdicts.push_back(std::move(v));
    }
  }
  std::sort(ms.begin(), ms.end());
  r.samples = ms.size();
  r.p50_ms = percentile(ms, 0.5);
  r.p99_ms = percentile(ms, 0.99);
  double total = 0.0;
  for (double m : ms) total += m;
  r.mean_ms = ms.empty() ? 0.0 : total / static_cast<double>(ms.size());
  return r;
}

inline BenchReport bench_comparison(const AbstractSceneGraph& asg,
                                    const ConcreteSceneGraph& csg, const ObjectModel& om,
                                    std::size_t runs, const MonitorOptions& opts = {}) {
  return bench_comparison(asg, std::vector<ConcreteSceneGraph>{csg}, om, runs, opts);
}

}  // namespace sgmon
