#include <gtest/gtest.h>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/graphviz.hpp>

#include "test_util.hpp"

using namespace sgmon;
using namespace sgmon::testing;

namespace {

const char* kObstacleAheadRecord = R"({"t": 1.5, "ego": "ego",
  "nodes": [
    {"id": "ego", "class": "Vehicle", "attrs": {"velocity": 8.33, "position": [0, 0]}},
    {"id": "obs", "class": "Static", "attrs": {"velocity": 0, "position": [10, 0]}},
    {"id": "l1", "class": "Lane"}],
  "edges": [
    {"src": "ego", "rel": "isIn", "dst": "l1"},
    {"src": "obs", "rel": "isIn", "dst": "l1"},
    {"src": "obs", "rel": "inFrontOf", "dst": "ego"}]})";

ErrorKind csg_error(const std::string& record) {
  try {
    parse_csg(record, default_object_model());
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << record;
  return ErrorKind::Io;
}

std::string one_node(const std::string& extra_nodes, const std::string& edges,
                     const std::string& ego_attrs = "{}") {
  return R"({"t": 0, "ego": "ego", "nodes": [{"id": "ego", "class": "Vehicle", "attrs": )" +
         ego_attrs + "}" + extra_nodes + R"(], "edges": [)" + edges + "]}";
}

struct DotVertex {
  std::string name;
  std::string label;
};
struct DotArc {
  std::string label;
};
using ParsedDot = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS,
                                        DotVertex, DotArc>;

/// Parses DOT text with Boost's independent Graphviz reader.
ParsedDot read_dot(const std::string& text) {
  ParsedDot g;
  boost::dynamic_properties dp(boost::ignore_other_properties);
  dp.property("node_id", boost::get(&DotVertex::name, g));
  dp.property("label", boost::get(&DotVertex::label, g));
  dp.property("label", boost::get(&DotArc::label, g));
  std::istringstream in(text);
  if (!boost::read_graphviz(in, g, dp, "node_id")) {
    throw std::runtime_error("read_graphviz rejected the graph");
  }
  return g;
}

std::set<std::string> vertex_names(const ParsedDot& g) {
  std::set<std::string> out;
  for (auto v : boost::make_iterator_range(boost::vertices(g))) out.insert(g[v].name);
  return out;
}

}  // namespace

TEST(ConcreteSceneGraph, ParsesObstacleAheadShape) {
  auto g = parse_csg(kObstacleAheadRecord, default_object_model());
  EXPECT_EQ(g.timestamp(), 1.5);
  EXPECT_EQ(g.ego_id(), "ego");
  ASSERT_EQ(g.nodes().size(), 3u);
  EXPECT_EQ(g.nodes().at("obs").cls, "Static");
  EXPECT_EQ(std::get<double>(g.nodes().at("obs").attributes.at("velocity")), 0.0);
  EXPECT_EQ(std::get<Vec2>(g.nodes().at("obs").attributes.at("position")), (Vec2{10, 0}));
  EXPECT_EQ(g.edges().size(), 3u);
  EXPECT_TRUE(g.has_edge("obs", "inFrontOf", "ego"));
  EXPECT_FALSE(g.has_edge("ego", "inFrontOf", "obs"));
}

TEST(ConcreteSceneGraph, SingleNodeScene) {
  auto g = parse_csg(one_node("", ""), default_object_model());
  EXPECT_EQ(g.nodes().size(), 1u);
  EXPECT_TRUE(g.edges().empty());
}

TEST(ConcreteSceneGraph, ValidationErrors) {
  const std::string lane = R"(, {"id": "l1", "class": "Lane"})";
  EXPECT_EQ(csg_error(one_node(lane, R"({"src": "l1", "rel": "isIn", "dst": "ego"})")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node(lane, R"({"src": "ego", "rel": "near", "dst": "l1"})")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node(lane, R"({"src": "ego", "rel": "isIn", "dst": "l2"})")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node("", R"({"src": "ego", "rel": "inFrontOf", "dst": "ego"})")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node(R"(, {"id": "x", "class": "Entity"})", "")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node(R"(, {"id": "x", "class": "Boat"})", "")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node(R"(, {"id": "ego", "class": "Vehicle"})", "")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node("", "", R"({"velocity": "fast"})")), ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node("", "", R"({"position": [1]})")), ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node("", "", R"({"colour": 1})")), ErrorKind::Validation);
  EXPECT_EQ(csg_error(one_node(R"(, {"id": "l1", "class": "Lane", "attrs": {"velocity": 1}})",
                               "")),
            ErrorKind::Validation);
  EXPECT_EQ(csg_error(R"({"t": 0, "ego": "ghost", "nodes": [], "edges": []})"),
            ErrorKind::MissingEgo);
  EXPECT_EQ(csg_error(R"({"t": 0, "ego": "ego", "nodes": []})"), ErrorKind::MissingEgo);
  EXPECT_EQ(csg_error(R"({"ego": "ego", "nodes": []})"), ErrorKind::Parse);
  EXPECT_EQ(csg_error(R"({"t": "now", "ego": "ego", "nodes": []})"), ErrorKind::Parse);
  EXPECT_EQ(csg_error("{not json"), ErrorKind::Parse);
  EXPECT_EQ(csg_error("[]"), ErrorKind::Parse);
}

TEST(ConcreteSceneGraph, IntegerJsonIsAcceptedForReal) {
  auto g = parse_csg(one_node("", "", R"({"velocity": 3})"), default_object_model());
  EXPECT_EQ(std::get<double>(g.nodes().at("ego").attributes.at("velocity")), 3.0);
}

TEST(ConcreteSceneGraph, RoundTrip) {
  const ObjectModel& om = default_object_model();
  auto g = parse_csg(kObstacleAheadRecord, om);
  std::string text = serialize_csg(g);
  auto again = parse_csg(text, om);
  EXPECT_EQ(g, again);
  EXPECT_EQ(serialize_csg(again), text);
}

TEST(ConcreteSceneGraph, RandomRoundTrip) {
  const ObjectModel& om = default_object_model();
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto g = random_scene(rng, 10, om);
    EXPECT_EQ(parse_csg(serialize_csg(g), om), g);
  }
}

TEST(ConcreteSceneGraph, RealValuesSurviveSerialization) {
  const ObjectModel& om = default_object_model();
  std::map<std::string, SceneNode> nodes{
      {"ego", participant("Vehicle", 0.1 + 0.2, {1.0 / 3.0, -2.5e-7})}};
  auto g = ConcreteSceneGraph::create(4.800000000000001, "ego", nodes, {}, om);
  EXPECT_EQ(parse_csg(serialize_csg(g), om), g);
}

TEST(AbstractSceneGraph, Invariants) {
  const ObjectModel& om = default_object_model();
  auto kind = [&](std::map<std::string, std::string> nodes, std::set<Edge> edges,
                  std::string ego) {
    try {
      AbstractSceneGraph::create("x", std::move(nodes), std::move(edges), std::move(ego), {},
                                 om);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind({{"e", "Vehicle"}}, {}, "e"), ErrorKind::Io);
  EXPECT_EQ(kind({{"e", "Static"}}, {}, "e"), ErrorKind::Validation);
  EXPECT_EQ(kind({{"e", "Vehicle"}}, {}, "f"), ErrorKind::MissingEgo);
  EXPECT_EQ(kind({{"e", "Vehicle"}, {"l", "Lane"}}, {}, "e"), ErrorKind::Validation);
  EXPECT_EQ(kind({{"e", "Vehicle"}, {"l", "Lane"}}, {{"l", "isIn", "e"}}, "e"),
            ErrorKind::Validation);
  EXPECT_EQ(kind({{"e", "Vehicle"}}, {{"e", "inFrontOf", "e"}}, "e"), ErrorKind::Validation);
  EXPECT_EQ(kind({{"e", "Vehicle"}, {"b", "Boat"}}, {}, "e"), ErrorKind::UnknownName);
  // Abstract classes are allowed in patterns.
  EXPECT_EQ(kind({{"e", "Vehicle"}, {"x", "Entity"}, {"l", "Lane"}},
                 {{"e", "isIn", "l"}, {"x", "isIn", "l"}}, "e"),
            ErrorKind::Io);
}

TEST(Dot, EmptyGraph) {
  std::string text = export_dot(DotGraph{});
  EXPECT_EQ(text.rfind("digraph", 0), 0u);
  auto g = read_dot(text);
  EXPECT_EQ(boost::num_vertices(g), 0u);
  EXPECT_EQ(boost::num_edges(g), 0u);
}

TEST(Dot, ObstacleAheadAsg) {
  auto asg = builtin_asg("obstacle_ahead");
  std::string text = export_dot(asg);
  EXPECT_NE(text.find("label=\"inFrontOf\""), std::string::npos);
  EXPECT_NE(text.find("velocity = 0"), std::string::npos);
  EXPECT_NE(text.find("color=grey"), std::string::npos);

  auto g = read_dot(text);
  // Three pattern nodes plus one note for the unary predicate.
  EXPECT_EQ(vertex_names(g),
            (std::set<std::string>{"ego", "obstacle", "lane", "#predicate0"}));
  // Three relations, the note tie and the distance annotation.
  EXPECT_EQ(boost::num_edges(g), 5u);
  std::multiset<std::string> labels;
  for (auto e : boost::make_iterator_range(boost::edges(g))) labels.insert(g[e].label);
  EXPECT_EQ(labels.count("inFrontOf"), 1u);
  EXPECT_EQ(labels.count("isIn"), 2u);
  EXPECT_EQ(labels.count("dist(ego, obstacle) in (0, 20]"), 1u);
}

TEST(Dot, SceneParsesWithIndependentReader) {
  const ObjectModel& om = default_object_model();
  auto scene = parse_csg(kObstacleAheadRecord, om);
  auto g = read_dot(export_dot(scene));
  EXPECT_EQ(vertex_names(g), (std::set<std::string>{"ego", "obs", "l1"}));
  EXPECT_EQ(boost::num_edges(g), 3u);
  for (auto v : boost::make_iterator_range(boost::vertices(g))) {
    if (g[v].name == "obs") {
      // DOT keeps `\n` escapes verbatim; renderers turn them into line breaks.
      EXPECT_EQ(g[v].label, "obs : Static\\nposition = (10.0, 0.0)\\nvelocity = 0.0");
    }
  }
}

TEST(Dot, EveryBundledAndRandomGraphParses) {
  const ObjectModel& om = default_object_model();
  for (const auto& name : builtin_asg_names()) {
    auto asg = builtin_asg(name);
    auto g = read_dot(export_dot(asg));
    EXPECT_GE(boost::num_vertices(g), asg.pattern_nodes().size()) << name;
  }
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto scene = random_scene(rng, 8, om);
    auto g = read_dot(export_dot(scene));
    EXPECT_EQ(boost::num_vertices(g), scene.nodes().size());
    EXPECT_EQ(boost::num_edges(g), scene.edges().size());
    auto asg = random_pattern(rng, 4, om);
    EXPECT_NO_THROW(read_dot(export_dot(asg)));
  }
}

TEST(Dot, QuotesAwkwardIdentifiers) {
  DotGraph g;
  g.name = "a \"quoted\" name";
  g.nodes.push_back({"x-y", "say \"hi\"", false});
  g.nodes.push_back({"z w", "plain", true});
  g.edges.push_back({"x-y", "z w", "rel", false});
  auto parsed = read_dot(export_dot(g));
  EXPECT_EQ(vertex_names(parsed), (std::set<std::string>{"x-y", "z w"}));
}
