#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/error.hpp"

// Summation order: every sum in this header is a plain sequential loop over
// points (then clusters) in index order, so results are bit-reproducible.

namespace fairkm {

struct ClusterDiscrepancy {
  double weight = 0.0;       // n_i / n
  double discrepancy = 0.0;  // sum_j |p_ij - p_j|
};

struct FairnessReport {
  double F = 0.0;
  std::vector<ClusterDiscrepancy> per_cluster;
  std::vector<double> population;
};

// Fairness index from a K x G table of counts (row-major). Clusters with no
// points carry zero weight.
inline FairnessReport fairness_from_counts(std::span<const std::size_t> counts,
                                           std::size_t K, std::size_t G) {
  FairnessReport report;
  report.population.assign(G, 0.0);
  report.per_cluster.resize(K);
  std::size_t n = 0;
  std::vector<std::size_t> group_totals(G, 0);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < G; ++j) {
      group_totals[j] += counts[i * G + j];
      n += counts[i * G + j];
    }
  }
  if (n == 0) return report;
  for (std::size_t j = 0; j < G; ++j) {
    report.population[j] = static_cast<double>(group_totals[j]) / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < K; ++i) {
    std::size_t size = 0;
    for (std::size_t j = 0; j < G; ++j) size += counts[i * G + j];
    auto& c = report.per_cluster[i];
    c.weight = static_cast<double>(size) / static_cast<double>(n);
    if (size == 0) continue;
    for (std::size_t j = 0; j < G; ++j) {
      const double p = static_cast<double>(counts[i * G + j]) / static_cast<double>(size);
      c.discrepancy += std::abs(p - report.population[j]);
    }
    report.F += c.weight * c.discrepancy;
  }
  return report;
}

inline std::vector<std::size_t> group_count_table(const Dataset& data,
                                                  const Assignment& assignment) {
  const std::size_t G = data.group_count();
  std::vector<std::size_t> counts(assignment.K * G, 0);
  for (PointIndex i = 0; i < data.size(); ++i) {
    ++counts[assignment.cluster_of[i] * G + data.group_of(i)];
  }
  return counts;
}

// Size-weighted L1 gap between cluster and population group proportions,
// summed over every group. Bounded by 1 for two groups and by 2(G-1)/G in
// general.
inline FairnessReport fairness_index(const Dataset& data,
                                     const Assignment& assignment) {
  return fairness_from_counts(group_count_table(data, assignment), assignment.K,
                              data.group_count());
}

// Count ratio of two groups within a cluster, extended to +inf when only the
// denominator is zero and to 1 when both are.
struct BalanceValue {
  double value = 1.0;

  static BalanceValue of_counts(std::size_t numerator, std::size_t denominator) {
    if (denominator == 0) {
      return {numerator == 0 ? 1.0 : std::numeric_limits<double>::infinity()};
    }
    return {static_cast<double>(numerator) / static_cast<double>(denominator)};
  }

  bool is_infinite() const noexcept { return std::isinf(value); }

  friend auto operator<=>(const BalanceValue&, const BalanceValue&) = default;
};

inline BalanceValue balance(const ClusterStats& stats, GroupId numerator_group,
                            GroupId denominator_group) {
  return BalanceValue::of_counts(stats.group_counts.at(numerator_group),
                                 stats.group_counts.at(denominator_group));
}

// Gini impurity sum_j p_j (1 - p_j).
inline double gini(std::span<const double> proportions) {
  double total = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0)) throw ValidityError("gini: proportions must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidityError("gini: proportions must sum to 1");
  }
  double g = 0.0;
  for (double p : proportions) g += p * (1.0 - p);
  return g;
}

inline double gini_of_counts(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) return 0.0;
  double g = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g += p * (1.0 - p);
  }
  return g;
}

struct SumOfSquares {
  double within = 0.0;
  double between = 0.0;
  double total = 0.0;
};

inline SumOfSquares ss_decomposition(const Dataset& data,
                                     const Assignment& assignment) {
  const std::size_t d = data.dims();
  const std::size_t n = data.size();
  const auto stats = cluster_stats(data, assignment);

  std::vector<double> grand(d, 0.0);
  for (PointIndex i = 0; i < n; ++i) {
    const auto x = data.row(i);
    for (std::size_t j = 0; j < d; ++j) grand[j] += x[j];
  }
  for (double& v : grand) v /= static_cast<double>(n);

  SumOfSquares ss;
  for (PointIndex i = 0; i < n; ++i) {
    const auto x = data.row(i);
    ss.within += squared_distance(x, stats[assignment.cluster_of[i]].centroid);
    ss.total += squared_distance(x, grand);
  }
  for (const auto& s : stats) {
    if (s.size == 0) continue;
    ss.between += static_cast<double>(s.size) * squared_distance(s.centroid, grand);
  }
  return ss;
}

// Between-cluster share of total dispersion, SS_B / SS_T.
inline double cluster_quality_kappa(const Dataset& data,
                                    const Assignment& assignment) {
  const auto ss = ss_decomposition(data, assignment);
  if (ss.total == 0.0) {
    throw DegenerateDataError("kappa undefined: all points are identical");
  }
  return ss.between / ss.total;
}

}  // namespace fairkm
