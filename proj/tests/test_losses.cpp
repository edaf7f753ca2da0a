#include <gtest/gtest.h>

#include "critset/losses.hpp"
#include "critset/oracle.hpp"

using namespace critset;

namespace {

PersistencePair pt(double b, double d, SimplexId bs = 0, SimplexId ds = 1) { return {bs, ds, b, d, 0}; }

PersistencePair essential(double b, SimplexId bs = 0) {
  return {bs, kInfinite, b, std::numeric_limits<double>::infinity(), 0};
}

}  // namespace

TEST(SimplificationMatching, MidpointTarget) {
  std::vector<PersistencePair> d{pt(1, 3)};
  auto m = simplification_matching(d, INFINITY);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].target_birth, 2);
  EXPECT_EQ(m.entries[0].target_death, 2);
  EXPECT_EQ(diagram_loss(d, m), 2);
}

TEST(SimplificationMatching, EpsilonThreshold) {
  std::vector<PersistencePair> d{pt(1, 3)};
  EXPECT_TRUE(simplification_matching(d, 1).entries.empty());
  EXPECT_EQ(simplification_matching(d, 2).entries.size(), 1u);  // persistence equal to eps is matched
}

TEST(SimplificationMatching, Modes) {
  std::vector<PersistencePair> d{pt(1, 3)};
  auto down = simplification_matching(d, INFINITY, SimplifyMode::DeathDown);
  EXPECT_EQ(down.entries[0].target_birth, 1);
  EXPECT_EQ(down.entries[0].target_death, 1);
  auto up = simplification_matching(d, INFINITY, SimplifyMode::BirthUp);
  EXPECT_EQ(up.entries[0].target_birth, 3);
  EXPECT_EQ(up.entries[0].target_death, 3);
  EXPECT_EQ(diagram_loss(d, down), 4);
}

TEST(SimplificationMatching, SkipsEssentialAndDiagonalPoints) {
  std::vector<PersistencePair> d{essential(0), pt(2, 2, 3, 4), pt(0.5, 1, 5, 6)};
  auto m = simplification_matching(d, INFINITY);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].pair.birth_simplex, 5);
}

TEST(QuadrantMatching, NearestEdge) {
  std::vector<PersistencePair> d{pt(0, 3, 0, 1), pt(1, 3, 2, 3), pt(3, 4, 4, 5)};
  auto m = quadrant_matching(d, 2);
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].target_birth, 0);
  EXPECT_EQ(m.entries[0].target_death, 2);
  EXPECT_EQ(m.entries[1].target_birth, 1);  // equidistant: the death comes down
  EXPECT_EQ(m.entries[1].target_death, 2);
}

TEST(QuadrantMatching, BirthMovesWhenCloser) {
  std::vector<PersistencePair> d{pt(1.8, 5)};
  auto m = quadrant_matching(d, 2);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].target_birth, 2);
  EXPECT_EQ(m.entries[0].target_death, 5);
}

TEST(DiagramLoss, ZeroAndEmpty) {
  std::vector<PersistencePair> d{pt(2, 2)};
  EXPECT_EQ(diagram_loss(d, simplification_matching(d, INFINITY)), 0);
  std::vector<PersistencePair> none;
  EXPECT_EQ(diagram_loss(none, simplification_matching(none, INFINITY)), 0);
  EXPECT_EQ(diagram_loss(none, quadrant_matching(none, 0)), 0);
}

TEST(DiagramLoss, StalePairRematchesOrThrows) {
  std::vector<PersistencePair> before{pt(1, 3, 0, 1)};
  auto m = simplification_matching(before, INFINITY);
  std::vector<PersistencePair> after{pt(1, 2, 0, 7)};
  EXPECT_THROW(diagram_loss(after, m), NotFoundError);
  LossSpec spec;
  EXPECT_DOUBLE_EQ(diagram_loss(after, m, &spec), 0.5);
}

TEST(DiagramLoss, MidpointLossIsHalfSquaredPersistence) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto f = oracle::random_filtration(seed);
    auto d = read_pairs(f);
    const double eps = 0.5;
    double expected = 0;
    for (const auto& p : d)
      if (p.finite() && p.persistence() <= eps) expected += p.persistence() * p.persistence() / 2;
    EXPECT_NEAR(diagram_loss(d, simplification_matching(d, eps)), expected, 1e-12);
    EXPECT_NEAR(simplification_loss(d, eps), 2 * expected, 1e-12);
  }
}

TEST(DiagramLoss, QuadrantTargetsLeaveTheQuadrantInterior) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto f = oracle::random_filtration(seed);
    auto d = read_pairs(f);
    const double a = f.values()[f.size() / 2];
    for (const auto& e : quadrant_matching(d, a).entries) {
      EXPECT_TRUE(e.target_birth == a || e.target_death == a);
      EXPECT_LE(e.target_birth, a);
      EXPECT_GE(e.target_death, a);
      const double moved = std::abs(e.target_birth - e.pair.birth) + std::abs(e.target_death - e.pair.death);
      EXPECT_LE(moved, std::min(a - e.pair.birth, e.pair.death - a));
    }
  }
}

TEST(MoveRequests, OneBirthOneDeathPerPoint) {
  std::vector<PersistencePair> d{pt(1, 3, 0, 1), pt(0, 4, 2, 3)};
  auto reqs = move_requests(simplification_matching(d, INFINITY));
  ASSERT_EQ(reqs.size(), 4u);
  EXPECT_EQ(reqs[0].endpoint, Endpoint::Birth);
  EXPECT_EQ(reqs[0].mover(), 0);
  EXPECT_EQ(reqs[1].endpoint, Endpoint::Death);
  EXPECT_EQ(reqs[1].mover(), 1);
  EXPECT_EQ(reqs[3].target, 2);
}

TEST(LossSpec, DispatchesOnKind) {
  std::vector<PersistencePair> d{pt(0, 3)};
  LossSpec s;
  EXPECT_EQ(s.match(d).entries[0].target_death, 1.5);
  s.kind = LossKind::Quadrant;
  s.threshold = 1;
  EXPECT_EQ(s.match(d).entries[0].target_birth, 1);
}
