#include <gtest/gtest.h>

#include "fairkm/neighbors.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fairkm {
namespace {

TEST(Knn, CollinearPoints) {
  const auto d = Dataset::from_rows({{0}, {1}, {3}}, {0, 1, 0}, 2);
  const auto nb = knn(d, 0, 1);
  ASSERT_EQ(nb.size(), 1u);
  EXPECT_EQ(nb[0].index, 1u);
  EXPECT_EQ(nb[0].squared_distance, 1.0);
}

TEST(Knn, DuplicateComesFirst) {
  const auto d = Dataset::from_rows({{2, 2}, {0, 0}, {2, 2}}, {0, 1, 0}, 2);
  const auto nb = knn(d, 0, 1);
  EXPECT_EQ(nb[0].index, 2u);
  EXPECT_EQ(nb[0].squared_distance, 0.0);
}

TEST(Knn, TiesGoToLowerIndex) {
  const auto d = Dataset::from_rows({{0}, {1}, {-1}, {1}}, {0, 1, 0, 1}, 2);
  const auto nb = knn(d, 0, 3);
  EXPECT_EQ(nb[0].index, 1u);
  EXPECT_EQ(nb[1].index, 2u);
  EXPECT_EQ(nb[2].index, 3u);
}

TEST(Knn, RejectsBadK) {
  const auto d = Dataset::from_rows({{0}, {1}, {3}}, {0, 1, 0}, 2);
  EXPECT_THROW(knn(d, 0, 3), ValidityError);
  EXPECT_THROW(knn(d, 0, 0), ValidityError);
}

TEST(Knn, MatchesFullSortOracle) {
  Rng rng(77);
  const auto d = testing::random_dataset(rng, 200, 3, 2);
  for (int q = 0; q < 20; ++q) {
    const auto query = static_cast<PointIndex>(rng.below(200));
    const auto got = knn(d, query, 10);
    const auto want = oracle::knn(d, query, 10);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t r = 0; r < got.size(); ++r) {
      EXPECT_EQ(got[r].index, want[r].first);
      EXPECT_EQ(got[r].squared_distance, want[r].second);
    }
  }
}

TEST(Knn, BatchMatchesSingle) {
  Rng rng(78);
  const auto d = testing::random_dataset(rng, 120, 2, 2);
  std::vector<PointIndex> queries = {0, 5, 17, 119};
  const auto batch = knn_batch(d, queries, 7);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto single = knn(d, queries[q], 7);
    ASSERT_EQ(batch[q].size(), single.size());
    for (std::size_t r = 0; r < single.size(); ++r) EXPECT_EQ(batch[q][r].index, single[r].index);
  }
}

}  // namespace
}  // namespace fairkm
