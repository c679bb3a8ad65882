#include "alchemy_ps/hypothesis_space.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace alchemy_ps;

TEST(Enumerate, AllCubesInCanonicalOrder) {
  CubeSet all = enumerate(HypothesisSource::parse("all"));
  ASSERT_EQ(all.size(), 4096u);
  EXPECT_EQ(all[0].edges.count(), 0u);
  EXPECT_EQ(all[4095].edges.count(), 12u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].edges.to_ulong(), i);
    EXPECT_EQ(all[i].goal_vertex(), VertexId(7));
  }
}

TEST(Enumerate, ConnectedCountMatchesBreadthFirstOracle) {
  CubeSet conn = enumerate(HypothesisSource::parse("connected"));
  EXPECT_EQ(conn.size(), 1083u);
  std::set<unsigned long> got;
  for (const auto& c : conn.cubes) got.insert(c.edges.to_ulong());
  for (unsigned mask = 0; mask < 4096; ++mask)
    EXPECT_EQ(got.count(mask) == 1, oracle::all_reach(mask, 7)) << "mask " << mask;
}

TEST(Enumerate, ConnectedIsClosedUnderAddingEdges) {
  CubeSet conn = enumerate(HypothesisSource::parse("connected"));
  for (const auto& c : conn.cubes)
    for (int e = 0; e < kNumEdges; ++e) {
      EdgeSet more = c.edges;
      more.set(e);
      EXPECT_TRUE(connected_to_goal(more, VertexId(7)));
    }
}

TEST(Enumerate, ConnectedCountIsGoalIndependent) {
  for (int g = 0; g < 8; ++g) {
    CubeSet conn = enumerate(HypothesisSource::parse("connected", VertexId(g)));
    EXPECT_EQ(conn.size(), 1083u);
    EXPECT_EQ(conn[0].goal_vertex(), VertexId(g));
  }
}

TEST(HypothesisSourceParse, Forms) {
  EXPECT_EQ(HypothesisSource::parse("all").kind, CubeSource::All4096);
  auto f = HypothesisSource::parse("file:cubes.txt");
  EXPECT_EQ(f.kind, CubeSource::File);
  EXPECT_EQ(f.path, "cubes.txt");
  EXPECT_EQ(f.to_string(), "file:cubes.txt");
  EXPECT_THROW(HypothesisSource::parse("file:"), std::invalid_argument);
  EXPECT_THROW(HypothesisSource::parse("everything"), std::invalid_argument);
}

TEST(CubeFile, RoundTrip) {
  CubeSet conn = enumerate(HypothesisSource::parse("connected"));
  std::stringstream buf;
  write_cube_set(buf, conn);
  CubeSet back = read_cube_set(buf);
  EXPECT_EQ(back.cubes, conn.cubes);
  EXPECT_EQ(back.source, CubeSource::File);
}

TEST(CubeFile, CommentsAndPerCubeGoals) {
  std::stringstream in("# two cubes\n111111111111 7\n\n000000000001 2\n");
  CubeSet s = read_cube_set(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].goal_vertex(), VertexId(2));
}

TEST(CubeFile, MalformedLinesReportLineNumber) {
  std::stringstream bad("111111111111 7\n11111111111 7\n");
  try {
    read_cube_set(bad);
    FAIL() << "expected CubeFileError";
  } catch (const CubeFileError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::stringstream dup("111111111111 7\n111111111111 3\n");
  EXPECT_THROW(read_cube_set(dup), CubeFileError);
  EXPECT_THROW(load_cube_file("/nonexistent/cubes.txt"), CubeFileError);
}

TEST(SplitSizes, RatioExamples) {
  EXPECT_EQ(split_sizes(109, {1.0, 0.0, 0.0}), (std::array<std::size_t, 3>{109, 0, 0}));
  EXPECT_EQ(split_sizes(10, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{8, 1, 1}));
  // 87.2 / 10.9 / 10.9: the two largest remainders win, ties to the earlier part.
  EXPECT_EQ(split_sizes(109, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{87, 11, 11}));
  EXPECT_EQ(split_sizes(1083, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{867, 108, 108}));
}

TEST(SplitSizes, Errors) {
  EXPECT_THROW(split_sizes(10, {0.5, 0.5, 0.5}), SplitError);
  EXPECT_THROW(split_sizes(10, {-0.1, 0.6, 0.5}), SplitError);
  EXPECT_THROW(split_sizes(2, {0.8, 0.1, 0.1}), SplitError);
}

TEST(Split, PartitionIsDisjointAndDeterministic) {
  Split a = split_by_sizes(109, {88, 11, 10}, 5);
  EXPECT_EQ(a.train.size(), 88u);
  EXPECT_EQ(a.val.size(), 11u);
  EXPECT_EQ(a.test.size(), 10u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.val.begin(), a.val.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 109u);
  EXPECT_EQ(*all.rbegin(), 108u);
  EXPECT_EQ(split_by_sizes(109, {88, 11, 10}, 5), a);
  EXPECT_NE(split_by_sizes(109, {88, 11, 10}, 6), a);
  EXPECT_THROW(split_by_sizes(109, {88, 11, 11}, 5), SplitError);
}

TEST(Split, AllTrainKeepsEveryIndex) {
  CubeSet conn = enumerate(HypothesisSource::parse("connected"));
  Split s = split(conn, {1.0, 0.0, 0.0}, 3);
  EXPECT_EQ(s.train.size(), conn.size());
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(SplitFile, RoundTripAndErrors) {
  Split s = split_by_sizes(20, {14, 3, 3}, 9);
  std::stringstream buf;
  write_split(buf, s);
  EXPECT_EQ(read_split(buf), s);

  std::stringstream empty_part("train:0,1\nval:\ntest:2\n");
  Split e = read_split(empty_part);
  EXPECT_TRUE(e.val.empty());

  std::stringstream missing("train:0,1\nval:2\n");
  EXPECT_THROW(read_split(missing), SplitError);
  std::stringstream junk("train:0,x\nval:\ntest:\n");
  EXPECT_THROW(read_split(junk), SplitError);
  std::stringstream unknown("dev:1\n");
  EXPECT_THROW(read_split(unknown), SplitError);
}
