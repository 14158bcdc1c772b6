#pragma once

// Independent reference computations. These deliberately take different
// routes from the library (integer arithmetic, pairwise distance sums, full
// sorts, exhaustive enumeration) so that agreement is meaningful.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <utility>
#include <vector>

#include "fairkm/dataset.hpp"

namespace fairkm::oracle {

// F = sum_ij |n c_ij - n_i c_j| / n^2, evaluated in exact integers.
inline double fairness(const Dataset& data, const Assignment& a) {
  const std::size_t n = data.size();
  const std::size_t G = data.group_count();
  std::vector<std::int64_t> c(a.K * G, 0), size(a.K, 0), total(G, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++c[a.cluster_of[i] * G + data.group_of(i)];
    ++size[a.cluster_of[i]];
    ++total[data.group_of(i)];
  }
  std::int64_t num = 0;
  const auto nn = static_cast<std::int64_t>(n);
  for (std::size_t k = 0; k < a.K; ++k) {
    for (std::size_t g = 0; g < G; ++g) num += std::llabs(nn * c[k * G + g] - size[k] * total[g]);
  }
  return static_cast<double>(num) / static_cast<double>(nn * nn);
}

struct Sums {
  long double within = 0, between = 0, total = 0;
};

// SS_W and SS_T through the pairwise identity sum_{x,y} |x-y|^2 / (2m);
// SS_B from long-double means.
inline Sums sums_of_squares(const Dataset& data, const Assignment& a) {
  const std::size_t n = data.size(), d = data.dims();
  auto pair_sq = [&](std::size_t i, std::size_t j) {
    long double s = 0;
    for (std::size_t t = 0; t < d; ++t) {
      const long double v = static_cast<long double>(data.at(i, t)) - data.at(j, t);
      s += v * v;
    }
    return s;
  };
  Sums out;
  std::vector<long double> within_pairs(a.K, 0);
  std::vector<std::size_t> size(a.K, 0);
  long double all_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++size[a.cluster_of[i]];
    for (std::size_t j = 0; j < n; ++j) {
      const long double s = pair_sq(i, j);
      all_pairs += s;
      if (a.cluster_of[i] == a.cluster_of[j]) within_pairs[a.cluster_of[i]] += s;
    }
  }
  out.total = all_pairs / (2.0L * n);
  for (std::size_t k = 0; k < a.K; ++k) {
    if (size[k] > 0) out.within += within_pairs[k] / (2.0L * size[k]);
  }
  std::vector<long double> grand(d, 0);
  std::vector<std::vector<long double>> mean(a.K, std::vector<long double>(d, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < d; ++t) {
      grand[t] += data.at(i, t);
      mean[a.cluster_of[i]][t] += data.at(i, t);
    }
  }
  for (std::size_t t = 0; t < d; ++t) grand[t] /= n;
  for (std::size_t k = 0; k < a.K; ++k) {
    if (size[k] == 0) continue;
    long double s = 0;
    for (std::size_t t = 0; t < d; ++t) {
      const long double v = mean[k][t] / size[k] - grand[t];
      s += v * v;
    }
    out.between += size[k] * s;
  }
  return out;
}

// Full sort of every other point by (distance, index).
inline std::vector<std::pair<std::size_t, double>> knn(const Dataset& data, std::size_t q,
                                                       std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i == q) continue;
    double s = 0;
    for (std::size_t t = 0; t < data.dims(); ++t) {
      const double v = data.at(q, t) - data.at(i, t);
      s += v * v;
    }
    all.emplace_back(s, i);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t r = 0; r < k; ++r) out.emplace_back(all[r].second, all[r].first);
  return out;
}

inline std::size_t nearest_centroid(const std::vector<double>& x,
                                    const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    double s = 0;
    for (std::size_t t = 0; t < x.size(); ++t) s += (x[t] - centroids[c][t]) * (x[t] - centroids[c][t]);
    if (s < best_d) {
      best_d = s;
      best = c;
    }
  }
  return best;
}

// Lowest F over every subset of points switched between the two clusters of
// a K = 2 assignment, excluding subsets that empty a cluster.
inline double best_switch_fairness(const Dataset& data, const Assignment& a) {
  const std::size_t n = data.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Assignment b = a;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) b.cluster_of[i] = 1 - b.cluster_of[i];
    }
    if (!b.empty_clusters().empty()) continue;
    best = std::min(best, fairness(data, b));
  }
  return best;
}

}  // namespace fairkm::oracle
