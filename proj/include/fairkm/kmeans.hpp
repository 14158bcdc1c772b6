#pragma once

#include <cstddef>
#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/error.hpp"
#include "fairkm/parallel.hpp"
#include "fairkm/rng.hpp"

namespace fairkm {

// K x d centroid matrix, row-major.
class Centroids {
 public:
  Centroids() = default;
  Centroids(std::size_t K, std::size_t dims) : values_(K * dims, 0.0), K_(K), dims_(dims) {}

  std::size_t count() const noexcept { return K_; }
  std::size_t dims() const noexcept { return dims_; }

  std::span<const double> row(ClusterId c) const noexcept {
    return {values_.data() + c * dims_, dims_};
  }
  std::span<double> row(ClusterId c) noexcept { return {values_.data() + c * dims_, dims_}; }

  friend bool operator==(const Centroids&, const Centroids&) = default;

 private:
  std::vector<double> values_;
  std::size_t K_ = 0;
  std::size_t dims_ = 0;
};

namespace detail {

inline bool same_point(std::span<const double> a, std::span<const double> b) noexcept {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] != b[j]) return false;
  }
  return true;
}

inline Centroids random_point_init(const Dataset& data, std::size_t K, Rng& rng) {
  const std::size_t n = data.size();
  std::vector<PointIndex> order(n);
  std::iota(order.begin(), order.end(), PointIndex{0});
  std::vector<PointIndex> chosen;
  // Lazy Fisher-Yates: draw positions until K distinct coordinates are found.
  for (std::size_t pos = 0; pos < n && chosen.size() < K; ++pos) {
    const std::size_t pick = pos + static_cast<std::size_t>(rng.below(n - pos));
    std::swap(order[pos], order[pick]);
    const PointIndex candidate = order[pos];
    bool duplicate = false;
    for (PointIndex c : chosen) {
      if (same_point(data.row(c), data.row(candidate))) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) chosen.push_back(candidate);
  }
  if (chosen.size() < K) {
    throw ValidityError("K=" + std::to_string(K) + " exceeds the number of distinct points (" +
                        std::to_string(chosen.size()) + ")");
  }
  Centroids out(K, data.dims());
  for (ClusterId c = 0; c < K; ++c) {
    const auto x = data.row(chosen[c]);
    std::copy(x.begin(), x.end(), out.row(c).begin());
  }
  return out;
}

// D^2 seeding; points already coinciding with a centroid have zero weight, so
// the chosen rows stay distinct.
inline Centroids plus_plus_init(const Dataset& data, std::size_t K, Rng& rng) {
  const std::size_t n = data.size();
  Centroids out(K, data.dims());
  const PointIndex first = static_cast<PointIndex>(rng.below(n));
  std::copy(data.row(first).begin(), data.row(first).end(), out.row(0).begin());
  std::vector<double> best(n);
  for (PointIndex i = 0; i < n; ++i) best[i] = squared_distance(data.row(i), out.row(0));
  for (ClusterId c = 1; c < K; ++c) {
    double total = 0.0;
    for (double b : best) total += b;
    if (total == 0.0) {
      throw ValidityError("K=" + std::to_string(K) + " exceeds the number of distinct points (" +
                          std::to_string(c) + ")");
    }
    const double target = rng.unit() * total;
    double acc = 0.0;
    PointIndex pick = n;
    for (PointIndex i = 0; i < n; ++i) {
      if (best[i] == 0.0) continue;
      pick = i;
      acc += best[i];
      if (acc > target) break;
    }
    std::copy(data.row(pick).begin(), data.row(pick).end(), out.row(c).begin());
    for (PointIndex i = 0; i < n; ++i) {
      best[i] = std::min(best[i], squared_distance(data.row(i), out.row(c)));
    }
  }
  return out;
}

}  // namespace detail

// Chooses K distinct data points as starting centroids. The draw depends only
// on the seed and the data, not on the platform's standard library.
inline Centroids init_centroids(const Dataset& data, std::size_t K, std::uint64_t seed,
                                InitMethod method = InitMethod::random_points) {
  if (K < 2 || K > data.size()) {
    throw ValidityError("K must satisfy 2 <= K <= n");
  }
  Rng rng(seed);
  return method == InitMethod::kmeans_plus_plus ? detail::plus_plus_init(data, K, rng)
                                                : detail::random_point_init(data, K, rng);
}

struct PointAssignment {
  Assignment assignment;
  std::vector<ClusterId> empty;  // clusters that received no point
};

// Nearest centroid per point by squared distance; ties go to the lower index.
inline PointAssignment assign_points(const Dataset& data, const Centroids& centroids) {
  const std::size_t K = centroids.count();
  PointAssignment out;
  out.assignment.K = K;
  out.assignment.cluster_of.assign(data.size(), 0);
  auto& labels = out.assignment.cluster_of;
  parallel_for(data.size(), [&](PointIndex i) {
    const auto x = data.row(i);
    ClusterId best = 0;
    double best_d = squared_distance(x, centroids.row(0));
    for (ClusterId c = 1; c < K; ++c) {
      const double dist = squared_distance(x, centroids.row(c));
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    labels[i] = best;
  });
  out.empty = out.assignment.empty_clusters();
  return out;
}

inline Centroids update_centroids(const Dataset& data, const Assignment& assignment) {
  const std::size_t d = data.dims();
  Centroids out(assignment.K, d);
  std::vector<std::size_t> sizes(assignment.K, 0);
  for (PointIndex i = 0; i < data.size(); ++i) {
    const ClusterId c = assignment.cluster_of[i];
    ++sizes[c];
    auto m = out.row(c);
    const auto x = data.row(i);
    for (std::size_t j = 0; j < d; ++j) m[j] += x[j];
  }
  for (ClusterId c = 0; c < assignment.K; ++c) {
    if (sizes[c] == 0) {
      throw ContractError("update_centroids: cluster " + std::to_string(c) + " is empty");
    }
    for (double& v : out.row(c)) v /= static_cast<double>(sizes[c]);
  }
  return out;
}

// Within-cluster sum of squares of an assignment against given centroids.
inline double within_ss(const Dataset& data, const Assignment& assignment,
                        const Centroids& centroids) {
  double s = 0.0;
  for (PointIndex i = 0; i < data.size(); ++i) {
    s += squared_distance(data.row(i), centroids.row(assignment.cluster_of[i]));
  }
  return s;
}

struct KMeansResult {
  Assignment assignment;
  Centroids centroids;
  std::size_t iterations = 0;
  double objective = 0.0;            // SS_W of the final assignment
  std::vector<double> ss_history;    // SS_W after each assign/update pair
};

namespace detail {

// Each empty cluster takes the point farthest from its current centroid among
// clusters that can spare one. Ties go to the lower point index.
inline void repair_empty_clusters(const Dataset& data, Assignment& assignment,
                                  Centroids& centroids, std::span<const ClusterId> empty) {
  auto sizes = assignment.cluster_sizes();
  for (ClusterId target : empty) {
    PointIndex far = data.size();
    double far_d = -1.0;
    for (PointIndex i = 0; i < data.size(); ++i) {
      const ClusterId c = assignment.cluster_of[i];
      if (sizes[c] <= 1) continue;
      const double dist = squared_distance(data.row(i), centroids.row(c));
      if (dist > far_d) {
        far_d = dist;
        far = i;
      }
    }
    --sizes[assignment.cluster_of[far]];
    ++sizes[target];
    assignment.cluster_of[far] = target;
    std::copy(data.row(far).begin(), data.row(far).end(), centroids.row(target).begin());
  }
}

}  // namespace detail

// Lloyd iteration from the given centroids: assign, repair empties, update;
// stops once the assignment repeats or after max_iters assignment steps.
inline KMeansResult run_kmeans(const Dataset& data, Centroids initial, std::size_t max_iters) {
  if (initial.count() < 2 || initial.count() > data.size() || initial.dims() != data.dims()) {
    throw ValidityError("initial centroids do not match the data");
  }
  if (max_iters < 1) throw ValidityError("max_kmeans_iters must be at least 1");
  KMeansResult result;
  result.centroids = std::move(initial);
  std::optional<Assignment> previous;
  for (std::size_t it = 0; it < max_iters; ++it) {
    auto step = assign_points(data, result.centroids);
    if (!step.empty.empty()) {
      detail::repair_empty_clusters(data, step.assignment, result.centroids, step.empty);
    }
    ++result.iterations;
    if (previous && step.assignment == *previous) break;
    result.centroids = update_centroids(data, step.assignment);
    result.ss_history.push_back(within_ss(data, step.assignment, result.centroids));
    previous = std::move(step.assignment);
  }
  result.assignment = std::move(*previous);
  result.objective = within_ss(data, result.assignment, result.centroids);
  return result;
}

// Seeded initialisation (config.init) followed by Lloyd iteration.
inline KMeansResult run_kmeans(const Dataset& data, const RunConfig& config) {
  if (config.K < 2 || config.K > data.size()) {
    throw ValidityError("K must satisfy 2 <= K <= n");
  }
  return run_kmeans(data, init_centroids(data, config.K, config.seed, config.init),
                    config.max_kmeans_iters);
}

}  // namespace fairkm
