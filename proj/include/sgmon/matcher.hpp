#pragma once

// Typed, ego-anchored subgraph matching of an ASG pattern into a concrete
// scene graph.
//
// The search is VF2-style: pattern nodes are bound one at a time in a fixed
// order, each candidate pair is checked against the already-bound pairs, and
// two look-ahead rules prune the tree:
//   * per (relationship, direction), p has no more unbound neighbours than c;
//   * p has no more neighbours in the pattern terminal set than c has in the
//     scene terminal set (terminal = unbound but adjacent to a bound node).
// Both rules are sound for monomorphism, which is the default semantics:
// every pattern edge must exist in the scene, extra scene edges among the
// matched nodes are allowed. `MatchOptions::induced` switches to the strict
// induced-subgraph reading.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sgmon/error.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/scene_graph.hpp"

namespace sgmon {

/// Injective map pattern-id -> object-id. Its image is the matched subgraph.
struct Embedding {
  std::map<std::string, std::string> mapping;

  friend bool operator==(const Embedding&, const Embedding&) = default;
  friend auto operator<=>(const Embedding&, const Embedding&) = default;
};

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct MatchOptions {
  std::size_t limit = kUnlimited;
  bool induced = false;
};

/// Integer-indexed adjacency of a scene, reusable across patterns.
class SceneIndex {
 public:
  explicit SceneIndex(const ConcreteSceneGraph& csg) : csg_(&csg) {
    for (const auto& [id, node] : csg.nodes()) {
      index_.emplace(id, static_cast<int>(ids_.size()));
      ids_.push_back(id);
      classes_.push_back(node.cls);
    }
    ego_ = index_.at(csg.ego_id());
    out_.resize(ids_.size());
    in_.resize(ids_.size());
    nbrs_.resize(ids_.size());
    for (const auto& e : csg.edges()) {
      int rel = rel_id_.emplace(e.relationship, static_cast<int>(rel_id_.size()))
                    .first->second;
      int s = index_.at(e.source);
      int t = index_.at(e.target);
      out_[s].push_back({t, rel});
      in_[t].push_back({s, rel});
      nbrs_[s].push_back(t);
      nbrs_[t].push_back(s);
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      std::sort(out_[i].begin(), out_[i].end());
      std::sort(in_[i].begin(), in_[i].end());
      std::sort(nbrs_[i].begin(), nbrs_[i].end());
      nbrs_[i].erase(std::unique(nbrs_[i].begin(), nbrs_[i].end()),
                     nbrs_[i].end());
    }
  }

  struct Arc {
    int node;
    int rel;
    friend auto operator<=>(const Arc&, const Arc&) = default;
  };

  const ConcreteSceneGraph& scene() const { return *csg_; }
  std::size_t size() const { return ids_.size(); }
  int ego() const { return ego_; }
  const std::string& id(int i) const { return ids_[i]; }
  const std::string& cls(int i) const { return classes_[i]; }
  const std::vector<Arc>& out(int i) const { return out_[i]; }
  const std::vector<Arc>& in(int i) const { return in_[i]; }
  const std::vector<int>& neighbours(int i) const { return nbrs_[i]; }

  /// -1 when the relationship never occurs in the scene.
  int rel(const std::string& name) const {
    auto it = rel_id_.find(name);
    return it == rel_id_.end() ? -1 : it->second;
  }
  std::size_t relationship_count() const { return rel_id_.size(); }

  bool has_arc(int s, int t, int rel) const {
    return std::binary_search(out_[s].begin(), out_[s].end(), Arc{t, rel});
  }

 private:
  const ConcreteSceneGraph* csg_;
  std::vector<std::string> ids_;
  std::vector<std::string> classes_;
  std::map<std::string, int> index_;
  std::map<std::string, int> rel_id_;
  int ego_ = 0;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
  std::vector<std::vector<int>> nbrs_;
};

namespace detail {

class Vf2Matcher {
 public:
  using Visitor = std::function<bool(const Embedding&)>;

  Vf2Matcher(const AbstractSceneGraph& asg, const SceneIndex& scene,
             const ObjectModel& om, bool induced)
      : asg_(asg), scene_(scene), induced_(induced) {
    for (const auto& [id, cls] : asg.pattern_nodes()) {
      pindex_.emplace(id, static_cast<int>(pids_.size()));
      pids_.push_back(id);
      pclasses_.push_back(cls);
    }
    const std::size_t k = pids_.size();
    const std::size_t n = scene.size();

    compatible_.assign(k, std::vector<char>(n, 0));
    std::vector<std::size_t> cand_count(k, 0);
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t c = 0; c < n; ++c) {
        if (om.is_subclass(scene.cls(static_cast<int>(c)), pclasses_[p])) {
          compatible_[p][c] = 1;
          ++cand_count[p];
        }
      }
    }

    pout_.resize(k);
    pin_.resize(k);
    pnbrs_.resize(k);
    for (const auto& e : asg.pattern_edges()) {
      int rel = scene.rel(e.relationship);
      if (rel < 0) impossible_ = true;  // relationship absent from the scene
      int s = pindex_.at(e.source);
      int t = pindex_.at(e.target);
      pout_[s].push_back({t, rel});
      pin_[t].push_back({s, rel});
      pnbrs_[s].push_back(t);
      pnbrs_[t].push_back(s);
    }
    for (auto& v : pnbrs_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    compute_order(cand_count);
  }

  void run(std::size_t limit, const Visitor& visit) {
    if (impossible_ || pids_.empty() || limit == 0) return;
    limit_ = limit;
    visit_ = &visit;
    core_p_.assign(pids_.size(), -1);
    core_c_.assign(scene_.size(), -1);
    term_p_.assign(pids_.size(), 0);
    term_c_.assign(scene_.size(), 0);
    scratch_.assign(scene_.relationship_count() * 2, 0);
    search(0);
  }

 private:
  // Pattern nodes by BFS distance from the ego, then fewest candidates, then
  // id. Every node after the first has a bound neighbour when it is reached.
  void compute_order(const std::vector<std::size_t>& cand_count) {
    const std::size_t k = pids_.size();
    std::vector<int> dist(k, -1);
    const int ego = pindex_.at(asg_.ego_pattern_id());
    dist[ego] = 0;
    std::vector<int> frontier{ego};
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int p : frontier) {
        for (int q : pnbrs_[p]) {
          if (dist[q] < 0) {
            dist[q] = dist[p] + 1;
            next.push_back(q);
          }
        }
      }
      frontier = std::move(next);
    }
    for (std::size_t p = 0; p < k; ++p) order_.push_back(static_cast<int>(p));
    const int unreachable = static_cast<int>(k) + 1;
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      int da = dist[a] < 0 ? unreachable : dist[a];
      int db = dist[b] < 0 ? unreachable : dist[b];
      if (da != db) return da < db;
      if (cand_count[a] != cand_count[b]) return cand_count[a] < cand_count[b];
      return a < b;
    });
    position_.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) position_[order_[i]] = i;
  }

  // Sorted, de-duplicated scene candidates for pattern node p.
  std::vector<int> candidates(int p) const {
    std::vector<int> out;
    if (p == pindex_.at(asg_.ego_pattern_id())) {
      out.push_back(scene_.ego());
      return out;
    }
    // Anchor on the first bound neighbour: p -> q means c is an in-neighbour
    // of core(q), q -> p means c is an out-neighbour.
    for (const auto& arc : pout_[p]) {
      if (core_p_[arc.node] >= 0) {
        for (const auto& s : scene_.in(core_p_[arc.node])) {
          if (s.rel == arc.rel) out.push_back(s.node);
        }
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      }
    }
    for (const auto& arc : pin_[p]) {
      if (core_p_[arc.node] >= 0) {
        for (const auto& s : scene_.out(core_p_[arc.node])) {
          if (s.rel == arc.rel) out.push_back(s.node);
        }
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      }
    }
    for (std::size_t c = 0; c < scene_.size(); ++c) {
      out.push_back(static_cast<int>(c));
    }
    return out;
  }

  bool feasible(int p, int c) {
    if (core_c_[c] >= 0 || !compatible_[p][c]) return false;

    // Consistency with bound pairs.
    for (const auto& arc : pout_[p]) {
      int d = core_p_[arc.node];
      if (d >= 0 && !scene_.has_arc(c, d, arc.rel)) return false;
    }
    for (const auto& arc : pin_[p]) {
      int d = core_p_[arc.node];
      if (d >= 0 && !scene_.has_arc(d, c, arc.rel)) return false;
    }
    if (induced_) {
      for (const auto& arc : scene_.out(c)) {
        int q = core_c_[arc.node];
        if (q >= 0 && !pattern_has(p, q, arc.rel)) return false;
      }
      for (const auto& arc : scene_.in(c)) {
        int q = core_c_[arc.node];
        if (q >= 0 && !pattern_has(q, p, arc.rel)) return false;
      }
    }

    // Label-aware look-ahead: unbound neighbours per (relationship, direction).
    const std::size_t r = scene_.relationship_count();
    bool ok = true;
    for (const auto& arc : pout_[p]) {
      if (core_p_[arc.node] < 0) ++scratch_[arc.rel];
    }
    for (const auto& arc : pin_[p]) {
      if (core_p_[arc.node] < 0) ++scratch_[r + arc.rel];
    }
    for (const auto& arc : scene_.out(c)) {
      if (core_c_[arc.node] < 0) --scratch_[arc.rel];
    }
    for (const auto& arc : scene_.in(c)) {
      if (core_c_[arc.node] < 0) --scratch_[r + arc.rel];
    }
    for (const auto& arc : pout_[p]) {
      if (scratch_[arc.rel] > 0) ok = false;
    }
    for (const auto& arc : pin_[p]) {
      if (scratch_[r + arc.rel] > 0) ok = false;
    }
    for (const auto& arc : scene_.out(c)) scratch_[arc.rel] = 0;
    for (const auto& arc : scene_.in(c)) scratch_[r + arc.rel] = 0;
    for (const auto& arc : pout_[p]) scratch_[arc.rel] = 0;
    for (const auto& arc : pin_[p]) scratch_[r + arc.rel] = 0;
    if (!ok) return false;

    // Terminal-set look-ahead.
    int pt = 0;
    for (int q : pnbrs_[p]) {
      if (core_p_[q] < 0 && term_p_[q] > 0) ++pt;
    }
    int ct = 0;
    for (int d : scene_.neighbours(c)) {
      if (core_c_[d] < 0 && term_c_[d] > 0) ++ct;
    }
    return pt <= ct;
  }

  bool pattern_has(int s, int t, int rel) const {
    for (const auto& arc : pout_[s]) {
      if (arc.node == t && arc.rel == rel) return true;
    }
    return false;
  }

  void bind(int p, int c) {
    core_p_[p] = c;
    core_c_[c] = p;
    for (int q : pnbrs_[p]) ++term_p_[q];
    for (int d : scene_.neighbours(c)) ++term_c_[d];
  }

  void unbind(int p, int c) {
    for (int q : pnbrs_[p]) --term_p_[q];
    for (int d : scene_.neighbours(c)) --term_c_[d];
    core_p_[p] = -1;
    core_c_[c] = -1;
  }

  // Returns false once the visitor asked to stop or the limit was reached.
  bool search(std::size_t depth) {
    if (depth == order_.size()) {
      Embedding emb;
      for (std::size_t p = 0; p < pids_.size(); ++p) {
        emb.mapping.emplace(pids_[p], scene_.id(core_p_[p]));
      }
      ++found_;
      if (!(*visit_)(emb)) return false;
      return found_ < limit_;
    }
    const int p = order_[depth];
    for (int c : candidates(p)) {
      if (!feasible(p, c)) continue;
      bind(p, c);
      bool more = search(depth + 1);
      unbind(p, c);
      if (!more) return false;
    }
    return true;
  }

  const AbstractSceneGraph& asg_;
  const SceneIndex& scene_;
  bool induced_;
  bool impossible_ = false;

  std::vector<std::string> pids_;
  std::vector<std::string> pclasses_;
  std::map<std::string, int> pindex_;
  std::vector<std::vector<char>> compatible_;
  std::vector<std::vector<SceneIndex::Arc>> pout_;
  std::vector<std::vector<SceneIndex::Arc>> pin_;
  std::vector<std::vector<int>> pnbrs_;
  std::vector<int> order_;
  std::vector<std::size_t> position_;

  std::vector<int> core_p_;
  std::vector<int> core_c_;
  std::vector<int> term_p_;
  std::vector<int> term_c_;
  std::vector<int> scratch_;
  std::size_t limit_ = kUnlimited;
  std::size_t found_ = 0;
  const Visitor* visit_ = nullptr;
};

}  // namespace detail

/// Streams embeddings in deterministic order until `visit` returns false or
/// `opts.limit` embeddings were produced.
inline void for_each_embedding(const AbstractSceneGraph& asg,
                               const SceneIndex& scene, const ObjectModel& om,
                               const MatchOptions& opts,
                               const std::function<bool(const Embedding&)>& visit) {
  detail::Vf2Matcher(asg, scene, om, opts.induced).run(opts.limit, visit);
}

inline std::vector<Embedding> find_embeddings(const AbstractSceneGraph& asg,
                                              const ConcreteSceneGraph& csg,
                                              const ObjectModel& om,
                                              const MatchOptions& opts = {}) {
  std::vector<Embedding> out;
  SceneIndex scene(csg);
  for_each_embedding(asg, scene, om, opts, [&](const Embedding& e) {
    out.push_back(e);
    return true;
  });
  return out;
}

inline constexpr std::size_t kDefaultOracleBound = 12;

/// Exhaustive reference: every injective, ego-anchored assignment filtered by
/// class and edge constraints. Result is sorted.
inline std::vector<Embedding> brute_force_embeddings(
    const AbstractSceneGraph& asg, const ConcreteSceneGraph& csg,
    const ObjectModel& om, std::size_t size_bound = kDefaultOracleBound,
    bool induced = false) {
  if (csg.nodes().size() > size_bound) {
    throw Error(ErrorKind::SizeBound,
                "scene has " + std::to_string(csg.nodes().size()) +
                    " nodes, oracle bound is " + std::to_string(size_bound));
  }
  std::vector<std::string> free_pattern;
  for (const auto& [id, cls] : asg.pattern_nodes()) {
    if (id != asg.ego_pattern_id()) free_pattern.push_back(id);
  }
  std::vector<std::string> objects;
  for (const auto& [id, node] : csg.nodes()) {
    if (id != csg.ego_id()) objects.push_back(id);
  }

  auto accept = [&](const std::map<std::string, std::string>& m) {
    for (const auto& [pid, oid] : m) {
      if (!om.is_subclass(csg.nodes().at(oid).cls, asg.pattern_nodes().at(pid))) {
        return false;
      }
    }
    for (const auto& e : asg.pattern_edges()) {
      if (!csg.has_edge(m.at(e.source), e.relationship, m.at(e.target))) {
        return false;
      }
    }
    if (induced) {
      std::map<std::string, std::string> inverse;
      for (const auto& [pid, oid] : m) inverse[oid] = pid;
      for (const auto& e : csg.edges()) {
        auto s = inverse.find(e.source);
        auto t = inverse.find(e.target);
        if (s != inverse.end() && t != inverse.end() &&
            !asg.pattern_edges().count(Edge{s->second, e.relationship, t->second})) {
          return false;
        }
      }
    }
    return true;
  };

  std::vector<Embedding> out;
  std::map<std::string, std::string> assignment{
      {asg.ego_pattern_id(), csg.ego_id()}};
  std::vector<bool> used(objects.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == free_pattern.size()) {
      if (accept(assignment)) out.push_back(Embedding{assignment});
      return;
    }
    for (std::size_t j = 0; j < objects.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      assignment[free_pattern[i]] = objects[j];
      rec(i + 1);
      assignment.erase(free_pattern[i]);
      used[j] = false;
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Re-checks every embedding invariant from scratch. Returns the first
/// violated invariant, or nullopt when the embedding is valid.
inline std::optional<std::string> verify_embedding(const AbstractSceneGraph& asg,
                                                   const ConcreteSceneGraph& csg,
                                                   const ObjectModel& om,
                                                   const Embedding& emb,
                                                   bool induced = false) {
  const auto& m = emb.mapping;
  if (m.size() != asg.pattern_nodes().size()) return "domain size mismatch";
  std::set<std::string> image;
  for (const auto& [pid, oid] : m) {
    auto cls = asg.pattern_nodes().find(pid);
    if (cls == asg.pattern_nodes().end()) return "unknown pattern node " + pid;
    const SceneNode* node = csg.find_node(oid);
    if (!node) return "unknown object " + oid;
    if (!image.insert(oid).second) return "not injective at " + oid;
    if (!om.is_subclass(node->cls, cls->second)) {
      return "class mismatch " + pid + " -> " + oid;
    }
  }
  auto ego = m.find(asg.ego_pattern_id());
  if (ego == m.end() || ego->second != csg.ego_id()) return "ego not anchored";
  for (const auto& e : asg.pattern_edges()) {
    if (!csg.has_edge(m.at(e.source), e.relationship, m.at(e.target))) {
      return "missing edge " + e.source + " " + e.relationship + " " + e.target;
    }
  }
  if (induced) {
    for (const auto& [pa, oa] : m) {
      for (const auto& [pb, ob] : m) {
        for (const auto& e : csg.edges()) {
          if (e.source == oa && e.target == ob &&
              !asg.pattern_edges().count(Edge{pa, e.relationship, pb})) {
            return "extra edge " + oa + " " + e.relationship + " " + ob;
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace sgmon
