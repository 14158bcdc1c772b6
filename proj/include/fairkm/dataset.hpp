#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairkm/error.hpp"

namespace fairkm {

using PointIndex = std::size_t;
using ClusterId = std::size_t;
using GroupId = std::size_t;

// Names recorded by the loader; empty for in-memory datasets.
struct DatasetMetadata {
  std::vector<std::string> feature_names;
  std::vector<std::string> group_names;
  std::size_t dropped_rows = 0;
};

// Feature matrix (row-major, n x d) plus one sensitive-group label per row.
// Construction validates every invariant; afterwards the object is read-only.
class Dataset {
 public:
  using Metadata = DatasetMetadata;

  Dataset(std::vector<double> features, std::size_t dims,
          std::vector<GroupId> sensitive, std::size_t group_count,
          std::optional<std::vector<std::string>> point_ids = std::nullopt,
          Metadata metadata = {})
      : features_(std::move(features)),
        dims_(dims),
        sensitive_(std::move(sensitive)),
        group_count_(group_count),
        point_ids_(std::move(point_ids)),
        metadata_(std::move(metadata)) {
    validate();
  }

  // Convenience for tests and small programs.
  static Dataset from_rows(const std::vector<std::vector<double>>& rows,
                           std::vector<GroupId> sensitive,
                           std::size_t group_count) {
    if (rows.empty()) throw ValidityError("dataset needs at least 2 points");
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (const auto& r : rows) {
      if (r.size() != d) throw ValidityError("ragged feature rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return Dataset(std::move(flat), d, std::move(sensitive), group_count);
  }

  std::size_t size() const noexcept { return sensitive_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t group_count() const noexcept { return group_count_; }

  std::span<const double> row(PointIndex i) const noexcept {
    return {features_.data() + i * dims_, dims_};
  }
  double at(PointIndex i, std::size_t j) const noexcept {
    return features_[i * dims_ + j];
  }
  std::span<const double> features() const noexcept { return features_; }
  std::span<const GroupId> sensitive() const noexcept { return sensitive_; }
  GroupId group_of(PointIndex i) const noexcept { return sensitive_[i]; }

  const std::optional<std::vector<std::string>>& point_ids() const noexcept {
    return point_ids_;
  }
  const Metadata& metadata() const noexcept { return metadata_; }

  // Same labels and metadata, different feature values.
  Dataset with_features(std::vector<double> features) const {
    return Dataset(std::move(features), dims_, sensitive_, group_count_,
                   point_ids_, metadata_);
  }

 private:
  void validate() const {
    const std::size_t n = sensitive_.size();
    if (n < 2) throw ValidityError("dataset needs at least 2 points");
    if (dims_ < 1) throw ValidityError("dataset needs at least 1 feature");
    if (group_count_ < 2) {
      throw ValidityError("sensitive variable needs at least 2 distinct groups");
    }
    if (features_.size() != n * dims_) {
      throw ValidityError("feature matrix size does not match n x d");
    }
    for (std::size_t k = 0; k < features_.size(); ++k) {
      if (!std::isfinite(features_[k])) {
        throw ValidityError("non-finite feature value at point " +
                            std::to_string(k / dims_) + ", feature " +
                            std::to_string(k % dims_));
      }
    }
    std::vector<std::size_t> seen(group_count_, 0);
    for (GroupId g : sensitive_) {
      if (g >= group_count_) throw ValidityError("sensitive label out of range");
      ++seen[g];
    }
    for (std::size_t g = 0; g < group_count_; ++g) {
      if (seen[g] == 0) {
        throw ValidityError("sensitive group " + std::to_string(g) +
                            " has no members");
      }
    }
    if (point_ids_ && point_ids_->size() != n) {
      throw ValidityError("point id count does not match n");
    }
  }

  std::vector<double> features_;
  std::size_t dims_;
  std::vector<GroupId> sensitive_;
  std::size_t group_count_;
  std::optional<std::vector<std::string>> point_ids_;
  Metadata metadata_;
};

// Cluster membership. May transiently contain empty clusters (see
// assign_points); use check_valid() where non-empty clusters are required.
struct Assignment {
  std::vector<ClusterId> cluster_of;
  std::size_t K = 0;

  std::size_t size() const noexcept { return cluster_of.size(); }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(K, 0);
    for (ClusterId c : cluster_of) ++sizes[c];
    return sizes;
  }

  std::vector<ClusterId> empty_clusters() const {
    std::vector<ClusterId> out;
    const auto sizes = cluster_sizes();
    for (ClusterId c = 0; c < K; ++c) {
      if (sizes[c] == 0) out.push_back(c);
    }
    return out;
  }

  void check_valid(std::size_t n) const {
    if (cluster_of.size() != n) {
      throw ContractError("assignment length does not match dataset size");
    }
    for (ClusterId c : cluster_of) {
      if (c >= K) throw ContractError("cluster id out of range");
    }
    if (!empty_clusters().empty()) {
      throw ContractError("assignment has an empty cluster");
    }
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct ClusterStats {
  std::size_t size = 0;
  std::vector<double> centroid;
  std::vector<std::size_t> group_counts;
};

// Per-cluster size, mean and group tally. Empty clusters get size 0 and a
// zero centroid; callers that forbid them validate the assignment first.
inline std::vector<ClusterStats> cluster_stats(const Dataset& data,
                                               const Assignment& assignment) {
  const std::size_t d = data.dims();
  std::vector<ClusterStats> stats(assignment.K);
  for (auto& s : stats) {
    s.centroid.assign(d, 0.0);
    s.group_counts.assign(data.group_count(), 0);
  }
  for (PointIndex i = 0; i < data.size(); ++i) {
    auto& s = stats[assignment.cluster_of[i]];
    ++s.size;
    ++s.group_counts[data.group_of(i)];
    const auto x = data.row(i);
    for (std::size_t j = 0; j < d; ++j) s.centroid[j] += x[j];
  }
  for (auto& s : stats) {
    if (s.size == 0) continue;
    for (double& v : s.centroid) v /= static_cast<double>(s.size);
  }
  return stats;
}

// Fraction of the population in each sensitive group.
inline std::vector<double> group_proportions(const Dataset& data) {
  std::vector<std::size_t> counts(data.group_count(), 0);
  for (GroupId g : data.sensitive()) ++counts[g];
  std::vector<double> p(counts.size());
  const double n = static_cast<double>(data.size());
  for (std::size_t g = 0; g < counts.size(); ++g) {
    p[g] = static_cast<double>(counts[g]) / n;
  }
  return p;
}

// Z-score each column using the population standard deviation. Columns whose
// spread is zero (relative to their magnitude) become all zeros.
inline Dataset standardize(const Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dims();
  std::vector<double> out(data.features().begin(), data.features().end());
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    double scale = 0.0;
    for (PointIndex i = 0; i < n; ++i) {
      mean += data.at(i, j);
      scale = std::max(scale, std::abs(data.at(i, j)));
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (PointIndex i = 0; i < n; ++i) {
      const double c = data.at(i, j) - mean;
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    const bool flat = sd == 0.0 || sd <= 1e-12 * scale;
    for (PointIndex i = 0; i < n; ++i) {
      out[i * d + j] = flat ? 0.0 : (data.at(i, j) - mean) / sd;
    }
  }
  return data.with_features(std::move(out));
}

enum class Heuristic { near_foreign, gini, none };

enum class InitMethod { random_points, kmeans_plus_plus };

struct RunConfig {
  std::size_t K = 2;
  Heuristic heuristic = Heuristic::near_foreign;
  std::size_t knn_k = 10;
  double beta0 = 0.10;
  std::uint64_t seed = 0;
  bool standardize = true;
  std::size_t max_kmeans_iters = 300;
  // Unset means K(K-1)/2, one visit per cluster pair.
  std::optional<std::size_t> max_pair_rounds;
  // Switch every ranked candidate instead of only imbalance-reducing ones.
  bool literal_switch = false;
  InitMethod init = InitMethod::random_points;

  std::size_t pair_round_cap() const noexcept {
    return max_pair_rounds.value_or(K * (K - 1) / 2);
  }

  // uses_knn = false skips the neighbourhood-size check for runs that never
  // query neighbours.
  void validate(std::size_t n, bool uses_knn = true) const {
    if (K < 2 || K > n) {
      throw ValidityError("K must satisfy 2 <= K <= n (K=" + std::to_string(K) +
                          ", n=" + std::to_string(n) + ")");
    }
    if (uses_knn && (knn_k < 1 || knn_k >= n)) {
      throw ValidityError("knn_k must satisfy 1 <= knn_k < n (knn_k=" +
                          std::to_string(knn_k) + ", n=" + std::to_string(n) +
                          ")");
    }
    if (!(beta0 > 0.0 && beta0 < 1.0)) {
      throw ValidityError("beta0 must lie in (0, 1)");
    }
    if (max_kmeans_iters < 1) {
      throw ValidityError("max_kmeans_iters must be at least 1");
    }
  }
};

inline const char* to_string(Heuristic h) noexcept {
  switch (h) {
    case Heuristic::near_foreign:
      return "near_foreign";
    case Heuristic::gini:
      return "gini";
    case Heuristic::none:
      return "none";
  }
  return "unknown";
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

}  // namespace fairkm
