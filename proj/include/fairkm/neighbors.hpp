#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/error.hpp"
#include "fairkm/parallel.hpp"

namespace fairkm {

struct Neighbor {
  PointIndex index = 0;
  double squared_distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// The k nearest points to a query, nearest first. The query itself is
// excluded by index, so exact duplicates of it are legal neighbors.
using NeighborSet = std::vector<Neighbor>;

// Brute-force k-NN under squared Euclidean distance; equal distances are
// ordered by point index.
inline NeighborSet knn(const Dataset& data, PointIndex query, std::size_t k) {
  const std::size_t n = data.size();
  if (k < 1 || k >= n) {
    throw ValidityError("knn: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
  }
  if (query >= n) throw ValidityError("knn: query index out of range");
  NeighborSet all;
  all.reserve(n - 1);
  const auto q = data.row(query);
  for (PointIndex i = 0; i < n; ++i) {
    if (i == query) continue;
    all.push_back({i, squared_distance(q, data.row(i))});
  }
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) {
      return a.squared_distance < b.squared_distance;
    }
    return a.index < b.index;
  };
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end(),
                   closer);
  all.resize(k);
  std::sort(all.begin(), all.end(), closer);
  return all;
}

// k-NN for each listed query, computed in parallel; result[i] belongs to
// queries[i].
inline std::vector<NeighborSet> knn_batch(const Dataset& data,
                                          const std::vector<PointIndex>& queries,
                                          std::size_t k) {
  if (k < 1 || k >= data.size()) {
    throw ValidityError("knn: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(data.size()) + ")");
  }
  std::vector<NeighborSet> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t q) { out[q] = knn(data, queries[q], k); });
  return out;
}

}  // namespace fairkm
