#pragma once

// Second-stage fairness adjustment. Starting from a finished clustering, pick
// the two clusters at the extremes of the group balance ratio, rank the points
// of those two clusters by how "boundary-like" they are, and move points from
// one cluster to the other in rank order until both clusters are balanced
// relative to the population.
//
// Two rankings are provided:
//   near-foreign  distance from a point to the centroid of the *other* cluster
//                 of the pair, ascending;
//   gini          Gini impurity of the cluster labels among a point's k nearest
//                 neighbours (whole dataset), descending.
//
// Scores are computed once when a round starts and never refreshed, which
// keeps a round linear in the number of candidates after ranking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/error.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/neighbors.hpp"
#include "fairkm/parallel.hpp"

namespace fairkm {

enum class Termination { balanced, candidates_exhausted, round_cap };

inline const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::balanced:
      return "balanced";
    case Termination::candidates_exhausted:
      return "candidates_exhausted";
    case Termination::round_cap:
      return "round_cap";
  }
  return "unknown";
}

// The two sensitive groups whose count ratio defines cluster balance.
struct GroupPair {
  GroupId numerator = 0;
  GroupId denominator = 1;

  friend bool operator==(const GroupPair&, const GroupPair&) = default;
};

// high = cluster with the largest balance, low = the smallest.
struct ClusterPair {
  ClusterId high = 0;
  ClusterId low = 0;

  friend bool operator==(const ClusterPair&, const ClusterPair&) = default;
};

struct Candidate {
  PointIndex point = 0;
  ClusterId source = 0;
  double score = 0.0;
  // Orders candidates with equal scores (smaller first); ties after that go
  // to the lower point index.
  double tiebreak = 0.0;
};

using CandidateRanking = std::vector<Candidate>;

struct SwitchRecord {
  std::size_t round = 0;
  PointIndex point = 0;
  ClusterId from = 0;
  ClusterId to = 0;
  double score = 0.0;
  double fairness_before = 0.0;
  double fairness_after = 0.0;
  BalanceValue balance_high_after;
  BalanceValue balance_low_after;
  double imbalance_after = 0.0;  // finite part of the pair imbalance objective
};

struct RoundSummary {
  std::size_t round = 0;
  ClusterPair pair;
  GroupPair groups;
  BalanceValue population_balance;
  std::size_t candidates = 0;
  std::size_t switches = 0;
  double fairness_before = 0.0;
  double fairness_after = 0.0;
  Termination reason = Termination::balanced;
};

struct AdjustmentTrace {
  Heuristic heuristic = Heuristic::none;
  Assignment initial;
  Assignment final_assignment;
  std::vector<SwitchRecord> switches;
  std::vector<RoundSummary> rounds;
  Termination reason = Termination::balanced;
};

// Applies the recorded switches to an assignment, in order.
inline Assignment replay(const Assignment& initial, std::span<const SwitchRecord> switches) {
  Assignment out = initial;
  for (const auto& s : switches) {
    if (out.cluster_of.at(s.point) != s.from) {
      throw ContractError("replay: point " + std::to_string(s.point) +
                          " is not in the recorded source cluster");
    }
    out.cluster_of[s.point] = s.to;
  }
  return out;
}

// Cluster x group count table, kept in sync with an assignment while points
// move.
class GroupCounts {
 public:
  GroupCounts(const Dataset& data, const Assignment& assignment)
      : K_(assignment.K),
        G_(data.group_count()),
        counts_(group_count_table(data, assignment)),
        sizes_(assignment.cluster_sizes()) {}

  std::size_t K() const noexcept { return K_; }
  std::size_t G() const noexcept { return G_; }
  std::size_t at(ClusterId c, GroupId g) const noexcept { return counts_[c * G_ + g]; }
  std::size_t size(ClusterId c) const noexcept { return sizes_[c]; }
  std::span<const std::size_t> table() const noexcept { return counts_; }

  void move(GroupId g, ClusterId from, ClusterId to) noexcept {
    --counts_[from * G_ + g];
    ++counts_[to * G_ + g];
    --sizes_[from];
    ++sizes_[to];
  }

  BalanceValue balance(ClusterId c, GroupPair groups) const noexcept {
    return BalanceValue::of_counts(at(c, groups.numerator), at(c, groups.denominator));
  }

  double fairness() const { return fairness_from_counts(counts_, K_, G_).F; }

 private:
  std::size_t K_;
  std::size_t G_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> sizes_;
};

// Groups (0, 1) when there are two groups. With more, the pair is taken from
// the least proportional cluster: its most over-represented group over its
// most under-represented group relative to the population.
inline GroupPair balance_groups(const Dataset& data, const Assignment& assignment) {
  const std::size_t G = data.group_count();
  if (G == 2) return {};
  const auto counts = group_count_table(data, assignment);
  const auto report = fairness_from_counts(counts, assignment.K, G);
  ClusterId worst = 0;
  for (ClusterId c = 1; c < assignment.K; ++c) {
    if (report.per_cluster[c].discrepancy > report.per_cluster[worst].discrepancy) worst = c;
  }
  std::size_t size = 0;
  for (GroupId g = 0; g < G; ++g) size += counts[worst * G + g];
  if (size == 0) return {};
  GroupId over = 0;
  GroupId under = 0;
  double over_gap = -2.0;
  double under_gap = 2.0;
  for (GroupId g = 0; g < G; ++g) {
    const double gap =
        static_cast<double>(counts[worst * G + g]) / static_cast<double>(size) - report.population[g];
    if (gap > over_gap) {
      over_gap = gap;
      over = g;
    }
    if (gap < under_gap) {
      under_gap = gap;
      under = g;
    }
  }
  if (over == under) return {};
  return {over, under};
}

inline BalanceValue population_balance(const Dataset& data, GroupPair groups) {
  std::size_t num = 0;
  std::size_t den = 0;
  for (GroupId g : data.sensitive()) {
    num += g == groups.numerator;
    den += g == groups.denominator;
  }
  return BalanceValue::of_counts(num, den);
}

inline std::vector<BalanceValue> cluster_balances(const Dataset& data,
                                                  const Assignment& assignment,
                                                  GroupPair groups) {
  const GroupCounts counts(data, assignment);
  std::vector<BalanceValue> out;
  out.reserve(assignment.K);
  for (ClusterId c = 0; c < assignment.K; ++c) out.push_back(counts.balance(c, groups));
  return out;
}

// Largest and smallest balance (+inf ranks highest); ties resolve to the lower
// cluster index. Empty optional when every balance is equal.
inline std::optional<ClusterPair> select_extreme_pair(std::span<const BalanceValue> balances) {
  if (balances.size() < 2) return std::nullopt;
  ClusterId hi = 0;
  ClusterId lo = 0;
  for (ClusterId c = 1; c < balances.size(); ++c) {
    if (balances[c] > balances[hi]) hi = c;
    if (balances[c] < balances[lo]) lo = c;
  }
  if (balances[hi] == balances[lo]) return std::nullopt;
  return ClusterPair{hi, lo};
}

inline std::optional<ClusterPair> select_extreme_pair(const Dataset& data,
                                                      const Assignment& assignment) {
  const auto balances = cluster_balances(data, assignment, balance_groups(data, assignment));
  return select_extreme_pair(balances);
}

// Cluster balance within a relative tolerance beta0 of the population
// balance. An infinite cluster balance never qualifies.
inline bool balance_enough(BalanceValue cluster, BalanceValue population, double beta0) {
  if (cluster.is_infinite()) return false;
  return std::abs(cluster.value - population.value) <= beta0 * population.value;
}

// Pair imbalance |b_A - b_pop|/b_pop + |b_B - b_pop|/b_pop. Infinite terms are
// counted separately so that the objective stays comparable: fewer infinite
// terms is always better, then a smaller finite sum.
struct PairImbalance {
  int infinite_terms = 0;
  double finite_sum = 0.0;

  static PairImbalance of(BalanceValue a, BalanceValue b, BalanceValue population) {
    PairImbalance out;
    for (const BalanceValue& v : {a, b}) {
      if (v.is_infinite()) {
        ++out.infinite_terms;
      } else {
        out.finite_sum += std::abs(v.value - population.value) / population.value;
      }
    }
    return out;
  }

  friend bool operator<(const PairImbalance& x, const PairImbalance& y) {
    if (x.infinite_terms != y.infinite_terms) return x.infinite_terms < y.infinite_terms;
    return x.finite_sum < y.finite_sum;
  }
};

namespace detail {

inline void sort_ranking(CandidateRanking& ranking, bool descending) {
  std::sort(ranking.begin(), ranking.end(), [descending](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return descending ? a.score > b.score : a.score < b.score;
    if (a.tiebreak != b.tiebreak) return a.tiebreak < b.tiebreak;
    return a.point < b.point;
  });
}

inline std::vector<PointIndex> pair_members(const Assignment& assignment, ClusterPair pair) {
  std::vector<PointIndex> out;
  for (PointIndex i = 0; i < assignment.size(); ++i) {
    const ClusterId c = assignment.cluster_of[i];
    if (c == pair.high || c == pair.low) out.push_back(i);
  }
  return out;
}

inline std::vector<double> member_mean(const Dataset& data, const Assignment& assignment,
                                       ClusterId cluster) {
  std::vector<double> mean(data.dims(), 0.0);
  std::size_t count = 0;
  for (PointIndex i = 0; i < data.size(); ++i) {
    if (assignment.cluster_of[i] != cluster) continue;
    ++count;
    const auto x = data.row(i);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += x[j];
  }
  for (double& v : mean) v /= static_cast<double>(count);
  return mean;
}

}  // namespace detail

// Points of the pair scored by Euclidean distance to the other cluster's
// centroid, nearest first.
inline CandidateRanking near_foreign_ranking(const Dataset& data, const Assignment& assignment,
                                             ClusterPair pair) {
  const auto centroid_high = detail::member_mean(data, assignment, pair.high);
  const auto centroid_low = detail::member_mean(data, assignment, pair.low);
  CandidateRanking ranking;
  for (PointIndex i : detail::pair_members(assignment, pair)) {
    const ClusterId c = assignment.cluster_of[i];
    const auto& foreign = c == pair.high ? centroid_low : centroid_high;
    ranking.push_back({i, c, std::sqrt(squared_distance(data.row(i), foreign))});
  }
  detail::sort_ranking(ranking, false);
  return ranking;
}

// Gini impurity of the cluster labels (all K clusters) in a neighbour set.
inline double neighborhood_gini(const Assignment& assignment, const NeighborSet& neighbors) {
  std::vector<std::size_t> counts(assignment.K, 0);
  for (const auto& nb : neighbors) ++counts[assignment.cluster_of[nb.index]];
  return gini_of_counts(counts);
}

// Neighbour sets indexed by point. Entries left empty are computed on demand.
using NeighborTable = std::vector<NeighborSet>;

inline NeighborTable neighbor_table(const Dataset& data, const std::vector<PointIndex>& points,
                                    std::size_t k) {
  NeighborTable table(data.size());
  auto sets = knn_batch(data, points, k);
  for (std::size_t q = 0; q < points.size(); ++q) table[points[q]] = std::move(sets[q]);
  return table;
}

// Points of the pair scored by neighbourhood Gini impurity, most mixed first.
// The score takes few distinct values, so equal scores are broken by distance
// to the other cluster's centroid, nearest first.
inline CandidateRanking gini_ranking(const Dataset& data, const Assignment& assignment,
                                     ClusterPair pair, std::size_t knn_k,
                                     const NeighborTable* precomputed = nullptr) {
  const auto members = detail::pair_members(assignment, pair);
  const auto centroid_high = detail::member_mean(data, assignment, pair.high);
  const auto centroid_low = detail::member_mean(data, assignment, pair.low);
  NeighborTable local;
  if (precomputed == nullptr) {
    local = neighbor_table(data, members, knn_k);
    precomputed = &local;
  }
  CandidateRanking ranking(members.size());
  parallel_for(members.size(), [&](std::size_t m) {
    const PointIndex i = members[m];
    const NeighborSet& nb = (*precomputed)[i];
    const double score = nb.empty() ? neighborhood_gini(assignment, knn(data, i, knn_k))
                                    : neighborhood_gini(assignment, nb);
    const auto& foreign = assignment.cluster_of[i] == pair.high ? centroid_low : centroid_high;
    ranking[m] = {i, assignment.cluster_of[i], score, squared_distance(data.row(i), foreign)};
  });
  detail::sort_ranking(ranking, true);
  return ranking;
}

namespace detail {

// One pass over a ranking for a fixed cluster pair. Updates assignment and
// counts in place and appends accepted switches to the trace.
inline RoundSummary adjust_pair(const Dataset& data, Assignment& assignment, GroupCounts& counts,
                                ClusterPair pair, GroupPair groups,
                                const CandidateRanking& ranking, const RunConfig& config,
                                std::size_t round, std::vector<SwitchRecord>& switches) {
  RoundSummary summary;
  summary.round = round;
  summary.pair = pair;
  summary.groups = groups;
  summary.candidates = ranking.size();
  summary.population_balance = population_balance(data, groups);
  const BalanceValue pop = summary.population_balance;

  double fairness = counts.fairness();
  summary.fairness_before = fairness;
  auto both_balanced = [&] {
    return balance_enough(counts.balance(pair.high, groups), pop, config.beta0) &&
           balance_enough(counts.balance(pair.low, groups), pop, config.beta0);
  };
  auto imbalance = [&] {
    return PairImbalance::of(counts.balance(pair.high, groups), counts.balance(pair.low, groups),
                             pop);
  };

  summary.reason = Termination::candidates_exhausted;
  if (both_balanced()) {
    summary.reason = Termination::balanced;
    summary.fairness_after = fairness;
    return summary;
  }

  PairImbalance current = imbalance();
  for (const Candidate& cand : ranking) {
    const ClusterId from = assignment.cluster_of[cand.point];
    const ClusterId to = from == pair.high ? pair.low : pair.high;
    if (counts.size(from) <= 1) continue;
    const GroupId g = data.group_of(cand.point);

    counts.move(g, from, to);
    const PairImbalance next = imbalance();
    const double next_fairness = counts.fairness();
    const bool accept =
        config.literal_switch || (next < current && next_fairness <= fairness);
    if (!accept) {
      counts.move(g, to, from);
      continue;
    }

    assignment.cluster_of[cand.point] = to;
    SwitchRecord rec;
    rec.round = round;
    rec.point = cand.point;
    rec.from = from;
    rec.to = to;
    rec.score = cand.score;
    rec.fairness_before = fairness;
    rec.fairness_after = next_fairness;
    rec.balance_high_after = counts.balance(pair.high, groups);
    rec.balance_low_after = counts.balance(pair.low, groups);
    rec.imbalance_after = next.finite_sum;
    switches.push_back(rec);
    ++summary.switches;
    current = next;
    fairness = next_fairness;

    if (both_balanced()) {
      summary.reason = Termination::balanced;
      break;
    }
  }
  summary.fairness_after = fairness;
  return summary;
}

inline CandidateRanking rank_pair(const Dataset& data, const Assignment& assignment,
                                  ClusterPair pair, const RunConfig& config,
                                  const NeighborTable* neighbors) {
  switch (config.heuristic) {
    case Heuristic::near_foreign:
      return near_foreign_ranking(data, assignment, pair);
    case Heuristic::gini:
      return gini_ranking(data, assignment, pair, config.knn_k, neighbors);
    case Heuristic::none:
      break;
  }
  throw ContractError("fairness adjustment requires a heuristic other than 'none'");
}

inline void check_inputs(const Dataset& data, const Assignment& assignment,
                         const RunConfig& config) {
  assignment.check_valid(data.size());
  if (assignment.K < 2) throw ValidityError("fairness adjustment needs K >= 2");
  if (!(config.beta0 > 0.0 && config.beta0 < 1.0)) {
    throw ValidityError("beta0 must lie in (0, 1)");
  }
  if (config.heuristic == Heuristic::gini && (config.knn_k < 1 || config.knn_k >= data.size())) {
    throw ValidityError("knn_k must satisfy 1 <= knn_k < n");
  }
}

// Single round on the current extreme pair.
inline AdjustmentTrace single_pair(const Dataset& data, const Assignment& assignment,
                                   const RunConfig& config, const NeighborTable* neighbors) {
  check_inputs(data, assignment, config);
  AdjustmentTrace trace;
  trace.heuristic = config.heuristic;
  trace.initial = assignment;
  trace.final_assignment = assignment;
  const GroupPair groups = balance_groups(data, assignment);
  const auto balances = cluster_balances(data, assignment, groups);
  const auto pair = select_extreme_pair(balances);
  if (!pair) {
    trace.reason = Termination::balanced;
    return trace;
  }
  GroupCounts counts(data, assignment);
  const auto ranking = rank_pair(data, assignment, *pair, config, neighbors);
  const auto summary = adjust_pair(data, trace.final_assignment, counts, *pair, groups, ranking,
                                   config, 0, trace.switches);
  trace.rounds.push_back(summary);
  trace.reason = summary.reason;
  return trace;
}

}  // namespace detail

// Near-foreign adjustment of the most extreme cluster pair (one round).
inline AdjustmentTrace fc_near_foreign(const Dataset& data, const Assignment& assignment,
                                       const RunConfig& config) {
  RunConfig c = config;
  c.heuristic = Heuristic::near_foreign;
  return detail::single_pair(data, assignment, c, nullptr);
}

// Gini adjustment of the most extreme cluster pair (one round). `neighbors`
// may carry precomputed k-NN sets for the pair's points.
inline AdjustmentTrace fc_gini(const Dataset& data, const Assignment& assignment,
                               const RunConfig& config, const NeighborTable* neighbors = nullptr) {
  RunConfig c = config;
  c.heuristic = Heuristic::gini;
  return detail::single_pair(data, assignment, c, neighbors);
}

// Repeats the configured pair heuristic on the current extreme pair. Within a
// sweep (K(K-1)/2 rounds) a pair already visited is replaced by the most
// imbalanced unvisited pair that is not yet balanced. Stops when every cluster
// is balanced, when a round switches nothing, or after the round cap.
inline AdjustmentTrace fair_adjust_multi(const Dataset& data, const Assignment& assignment,
                                         const RunConfig& config,
                                         const NeighborTable* neighbors = nullptr) {
  detail::check_inputs(data, assignment, config);
  if (config.heuristic == Heuristic::none) {
    throw ContractError("fairness adjustment requires a heuristic other than 'none'");
  }
  AdjustmentTrace trace;
  trace.heuristic = config.heuristic;
  trace.initial = assignment;
  trace.final_assignment = assignment;
  trace.reason = Termination::round_cap;

  const std::size_t K = assignment.K;
  const std::size_t pairs_per_sweep = K * (K - 1) / 2;
  std::vector<bool> visited(K * K, false);
  std::size_t visited_count = 0;
  GroupCounts counts(data, assignment);

  const std::size_t cap = config.pair_round_cap();
  std::size_t round = 0;
  for (; round < cap; ++round) {
    Assignment& current = trace.final_assignment;
    const GroupPair groups = balance_groups(data, current);
    const BalanceValue pop = population_balance(data, groups);
    std::vector<BalanceValue> balances;
    for (ClusterId c = 0; c < K; ++c) balances.push_back(counts.balance(c, groups));

    const auto extreme = select_extreme_pair(balances);
    if (!extreme || (balance_enough(balances[extreme->high], pop, config.beta0) &&
                     balance_enough(balances[extreme->low], pop, config.beta0))) {
      trace.reason = Termination::balanced;
      break;
    }

    auto key = [K](ClusterPair p) {
      return std::min(p.high, p.low) * K + std::max(p.high, p.low);
    };
    ClusterPair pair = *extreme;
    if (visited[key(pair)]) {
      std::optional<ClusterPair> best;
      PairImbalance best_imbalance;
      for (ClusterId a = 0; a < K; ++a) {
        for (ClusterId b = a + 1; b < K; ++b) {
          if (visited[a * K + b]) continue;
          if (balance_enough(balances[a], pop, config.beta0) &&
              balance_enough(balances[b], pop, config.beta0)) {
            continue;
          }
          const ClusterPair p = balances[b] > balances[a] ? ClusterPair{b, a} : ClusterPair{a, b};
          const auto imb = PairImbalance::of(balances[a], balances[b], pop);
          if (!best || best_imbalance < imb) {
            best = p;
            best_imbalance = imb;
          }
        }
      }
      if (best) {
        pair = *best;
      } else {
        std::fill(visited.begin(), visited.end(), false);
        visited_count = 0;
      }
    }

    const auto ranking = detail::rank_pair(data, current, pair, config, neighbors);
    const auto summary = detail::adjust_pair(data, current, counts, pair, groups, ranking, config,
                                             round, trace.switches);
    trace.rounds.push_back(summary);
    if (summary.switches == 0) {
      trace.reason = summary.reason;
      break;
    }
    visited[key(pair)] = true;
    if (++visited_count == pairs_per_sweep) {
      std::fill(visited.begin(), visited.end(), false);
      visited_count = 0;
    }
  }
  if (round == cap && !trace.rounds.empty() &&
      trace.rounds.back().reason == Termination::balanced) {
    trace.reason = Termination::balanced;
  }
  return trace;
}

}  // namespace fairkm
