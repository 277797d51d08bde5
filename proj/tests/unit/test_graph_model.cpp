#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "modx/graph_model.hpp"

using namespace modx;

namespace {

FunctionNode node(const std::string& id, std::uint64_t address, std::uint64_t volume = 1) {
  FunctionNode fn;
  fn.id = id;
  fn.address = address;
  fn.volume = volume;
  return fn;
}

const char* kThreeFunctions = R"({
  "version": "mgx-1", "program_name": "tiny",
  "functions": [
    {"id": "C", "address": 768, "volume": 4},
    {"id": "A", "address": 256, "volume": 10},
    {"id": "B", "address": 512, "volume": 5}
  ],
  "edges": [{"caller": "A", "callee": "B", "callsites": 1}, {"caller": "A", "callee": "C", "callsites": 2}]
})";

bool has_kind(const std::vector<Violation>& v, ViolationKind kind) {
  for (const auto& x : v) {
    if (x.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST(GraphModel, MinimalDocument) {
  const auto g = parse_program_graph(R"({"version":"mgx-1","program_name":"p","functions":[{"id":"f","address":1,"volume":1}],"edges":[]})");
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_TRUE(validate(g).empty());
}

TEST(GraphModel, OrdinalsFollowAddresses) {
  const auto g = parse_program_graph(kThreeFunctions);
  EXPECT_EQ(g.function(*g.index_of("A")).ordinal, 0u);
  EXPECT_EQ(g.function(*g.index_of("B")).ordinal, 1u);
  EXPECT_EQ(g.function(*g.index_of("C")).ordinal, 2u);
  EXPECT_TRUE(validate(g).empty());
}

TEST(GraphModel, OptionalKeysDefaulted) {
  const auto g = parse_program_graph(kThreeFunctions);
  const auto& a = g.function(*g.index_of("A"));
  EXPECT_TRUE(a.strings.empty());
  EXPECT_TRUE(a.constants.empty());
  EXPECT_FALSE(a.is_export);
  EXPECT_FALSE(a.name.has_value());
  EXPECT_EQ(g.edges()[1].callsites, 2u);
}

TEST(GraphModel, UnknownKeysIgnored) {
  const auto g = parse_program_graph(
      R"({"version":"mgx-1","extra":1,"functions":[{"id":"f","address":1,"volume":1,"colour":"red"}]})");
  EXPECT_EQ(g.size(), 1u);
}

TEST(GraphModel, DanglingEndpointNamesId) {
  try {
    parse_program_graph(
        R"({"version":"mgx-1","functions":[{"id":"f1","address":1,"volume":1}],"edges":[{"caller":"f1","callee":"f99"}]})");
    FAIL() << "expected GraphFormatError";
  } catch (const GraphFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("f99"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("edges[0]"), std::string::npos);
  }
}

TEST(GraphModel, LoadErrorsCarryLocation) {
  struct Case {
    const char* doc;
    const char* where;
  };
  const Case cases[] = {
      {R"({"version":"mgx-1","functions":[{"id":"a","address":1,"volume":1},{"id":"a","address":2,"volume":1}]})",
       "functions[1]"},
      {R"({"version":"mgx-1","functions":[{"id":"a","address":1,"volume":0}]})", "functions[0]"},
      {R"({"version":"mgx-2","functions":[]})", "version"},
      {R"({"version":"mgx-1"})", "functions"},
      {R"({"version":"mgx-1","functions":[{"id":"a","address":1,"volume":1}],
           "edges":[{"caller":"a","callee":"a"},{"caller":"a","callee":"a"}]})",
       "edges[1]"},
  };
  for (const auto& c : cases) {
    try {
      parse_program_graph(c.doc);
      ADD_FAILURE() << "accepted: " << c.doc;
    } catch (const GraphFormatError& e) {
      EXPECT_NE(std::string(e.what()).find(c.where), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(parse_program_graph("{not json"), GraphFormatError);
}

TEST(GraphModel, MissingFileThrows) {
  EXPECT_THROW(load_program_graph_file("/nonexistent/graph.json"), std::runtime_error);
}

TEST(GraphModel, ValidateCases) {
  ProgramGraph ok("ok", {node("a", 1), node("b", 2), node("c", 3)}, {{"a", "b", 1}});
  ok.assign_ordinals();
  EXPECT_TRUE(validate(ok).empty());

  ProgramGraph dup("dup", {node("a", 1), node("a", 2)}, {});
  dup.assign_ordinals();
  const auto dv = validate(dup);
  ASSERT_EQ(dv.size(), 1u);
  EXPECT_EQ(dv[0].kind, ViolationKind::kDuplicateId);

  auto fns = std::vector<FunctionNode>{node("a", 1), node("b", 2), node("c", 3)};
  fns[0].ordinal = 0;
  fns[1].ordinal = 0;
  fns[2].ordinal = 1;
  const auto ov = validate(ProgramGraph("ord", fns, {}));
  ASSERT_EQ(ov.size(), 1u);
  EXPECT_EQ(ov[0].kind, ViolationKind::kOrdinalPermutation);

  EXPECT_TRUE(has_kind(validate(ProgramGraph("d", {node("a", 1)}, {{"a", "zz", 1}})), ViolationKind::kDanglingEndpoint));
  EXPECT_TRUE(has_kind(validate(ProgramGraph("v", {node("a", 1, 0)}, {})), ViolationKind::kZeroVolume));
}

TEST(GraphModel, RoundTripIdentity) {
  gen::Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = gen::random_module_graph(1 + rng.below(15), rng);
    g.program_name = "trial-" + std::to_string(trial);
    const std::string text = serialize_program_graph(g);
    const auto back = parse_program_graph(text);
    EXPECT_EQ(back, g);
    EXPECT_TRUE(validate(back).empty());
    EXPECT_EQ(serialize_program_graph(back), text);
  }
}

TEST(GraphModel, RoundTripKeepsOptionalName) {
  auto fns = std::vector<FunctionNode>{node("a", 10)};
  fns[0].name = "main";
  fns[0].constants = {-5, 0, 0, 9223372036854775807LL};
  ProgramGraph g("n", fns, {});
  g.assign_ordinals();
  EXPECT_EQ(parse_program_graph(serialize_program_graph(g)), g);
}

TEST(GraphModel, PartitionRelabelsByFirstAppearance) {
  const Partition p({7, 7, 3, 9, 3});
  EXPECT_EQ(p.module_count(), 3u);
  EXPECT_EQ(p.labels(), (std::vector<Partition::ModuleId>{0, 0, 1, 2, 1}));
  EXPECT_EQ(p.members()[1], (std::vector<std::size_t>{2, 4}));
  EXPECT_THROW(Partition::from_dense({0, 2}, 3), std::invalid_argument);
}

TEST(GraphModel, PartitionDocumentRoundTrip) {
  const auto g = parse_program_graph(kThreeFunctions);
  const Partition p({0, 1, 0});
  const std::string text = serialize_partition(g, p);
  EXPECT_NE(text.find("mpt-1"), std::string::npos);
  EXPECT_EQ(parse_partition(g, text), p);
  EXPECT_THROW(parse_partition(g, "[]"), GraphFormatError);
}

TEST(GraphModel, CommittedFixtureLoadsCleanly) {
  const auto g = load_program_graph_file(std::string(MODX_TEST_DATA_DIR) + "/hello.mgx.json");
  EXPECT_TRUE(validate(g).empty());
  EXPECT_GT(g.size(), 0u);
}
