#pragma once

// Report serialisation. JSON field order is fixed. Headline metrics
// (fairness, kappa, sums of squares) are written at full round-trip precision
// so they can be recomputed from the serialised assignment; every other float
// is rounded to 6 significant digits.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "fairkm/pipeline.hpp"
#include "json.hpp"

namespace fairkm {

using Json = nlohmann::ordered_json;

inline double round6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline Json balance_json(BalanceValue b) {
  if (b.is_infinite()) return "inf";
  return round6(b.value);
}

inline Json rounded(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(round6(v));
  return out;
}

inline Json trace_json(const AdjustmentTrace& trace) {
  Json rounds = Json::array();
  for (const auto& r : trace.rounds) {
    rounds.push_back({{"round", r.round},
                      {"cluster_high", r.pair.high},
                      {"cluster_low", r.pair.low},
                      {"group_numerator", r.groups.numerator},
                      {"group_denominator", r.groups.denominator},
                      {"population_balance", balance_json(r.population_balance)},
                      {"candidates", r.candidates},
                      {"switches", r.switches},
                      {"fairness_before", r.fairness_before},
                      {"fairness_after", r.fairness_after},
                      {"termination", to_string(r.reason)}});
  }
  Json switches = Json::array();
  for (const auto& s : trace.switches) {
    switches.push_back({{"round", s.round},
                        {"point", s.point},
                        {"from", s.from},
                        {"to", s.to},
                        {"score", round6(s.score)},
                        {"fairness_after", round6(s.fairness_after)},
                        {"balance_high_after", balance_json(s.balance_high_after)},
                        {"balance_low_after", balance_json(s.balance_low_after)}});
  }
  return {{"termination", to_string(trace.reason)},
          {"switch_count", trace.switches.size()},
          {"rounds", std::move(rounds)},
          {"switches", std::move(switches)}};
}

inline Json method_json(const MethodResult& m) {
  Json clusters = Json::array();
  for (std::size_t c = 0; c < m.clusters.size(); ++c) {
    const auto& s = m.clusters[c];
    clusters.push_back({{"id", c},
                        {"size", s.size},
                        {"group_counts", s.group_counts},
                        {"balance", balance_json(m.balances[c])},
                        {"discrepancy", round6(m.fairness.per_cluster[c].discrepancy)},
                        {"centroid", rounded(s.centroid)}});
  }
  Json out = {{"fairness", m.fairness.F},
              {"kappa", m.kappa},
              {"ss_within", m.ss.within},
              {"ss_between", m.ss.between},
              {"ss_total", m.ss.total},
              {"balance_groups", {m.balance_groups.numerator, m.balance_groups.denominator}},
              {"clusters", std::move(clusters)},
              {"assignment", m.assignment.cluster_of}};
  if (m.trace) out["adjustment"] = trace_json(*m.trace);
  return out;
}

inline Json config_json(const RunConfig& c, const std::vector<Heuristic>& heuristics) {
  Json hs = Json::array();
  for (Heuristic h : heuristics) hs.push_back(to_string(h));
  return {{"k", c.K},
          {"heuristics", std::move(hs)},
          {"knn_k", c.knn_k},
          {"beta0", round6(c.beta0)},
          {"seed", c.seed},
          {"standardize", c.standardize},
          {"literal_switch", c.literal_switch},
          {"max_kmeans_iters", c.max_kmeans_iters},
          {"max_pair_rounds", c.pair_round_cap()},
          {"init", c.init == InitMethod::kmeans_plus_plus ? "kmeans++" : "random"}};
}

// include_timing adds wall-clock seconds, which makes the output
// non-reproducible; it is off by default.
inline Json report_json(const RunReport& r, bool include_timing = false) {
  Json dataset = {{"n", r.dataset.n},
                  {"d", r.dataset.d},
                  {"groups", r.dataset.G},
                  {"group_names", r.dataset.group_names},
                  {"group_proportions", rounded(r.dataset.group_proportions)},
                  {"features", r.dataset.feature_names},
                  {"dropped_rows", r.dataset.dropped_rows}};
  Json baseline = method_json(r.baseline);
  baseline["kmeans_iterations"] = r.kmeans_iterations;
  Json out = {{"dataset", std::move(dataset)},
              {"config", config_json(r.config, r.heuristics)},
              {"baseline", std::move(baseline)}};
  if (!r.adjusted.empty()) {
    Json adjusted = Json::object();
    for (const auto& m : r.adjusted) adjusted[m.method] = method_json(m);
    out["adjusted"] = std::move(adjusted);
  }
  if (include_timing) out["timing_seconds"] = round6(r.seconds);
  return out;
}

// One line per method: method,fairness,kappa,switches,termination.
inline std::string report_csv(const RunReport& r) {
  std::ostringstream os;
  os << "method,fairness,kappa,switches,termination\n";
  os << "original," << format6(r.baseline.fairness.F) << ',' << format6(r.baseline.kappa)
     << ",0,\n";
  for (const auto& m : r.adjusted) {
    os << m.method << ',' << format6(m.fairness.F) << ',' << format6(m.kappa) << ','
       << m.trace->switches.size() << ',' << to_string(m.trace->reason) << '\n';
  }
  return os.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "heuristic,knn_k,fairness,kappa,switches,termination\n";
  for (const auto& r : rows) {
    os << "gini," << r.knn_k << ',' << format6(r.fairness) << ',' << format6(r.kappa) << ','
       << r.switches << ',' << to_string(r.reason) << '\n';
  }
  return os.str();
}

inline std::string bench_csv(const BenchTable& t) {
  std::ostringstream os;
  os << "dataset,original_F,original_kappa,near_foreign_F,near_foreign_kappa,gini_F,gini_kappa\n";
  for (const auto& r : t.rows) {
    os << r.dataset << ',' << format6(r.original_fairness) << ',' << format6(r.original_kappa)
       << ',' << format6(r.near_foreign_fairness) << ',' << format6(r.near_foreign_kappa) << ','
       << format6(r.gini_fairness) << ',' << format6(r.gini_kappa) << '\n';
  }
  return os.str();
}

// Aligned table: fairness to two decimals, kappa as a percentage.
inline std::string bench_text(const BenchTable& t) {
  std::size_t width = 7;
  for (const auto& r : t.rows) width = std::max(width, r.dataset.size());
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s | %-15s | %-15s | %-15s\n", static_cast<int>(width),
                "dataset", "Original", "Near-Foreign", "Gini");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-*s | %5s %9s | %5s %9s | %5s %9s\n", static_cast<int>(width),
                "", "F", "kappa", "F", "kappa", "F", "kappa");
  os << buf << std::string(width + 54, '-') << '\n';
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%-*s | %5.2f %8.2f%% | %5.2f %8.2f%% | %5.2f %8.2f%%\n",
                  static_cast<int>(width), r.dataset.c_str(), r.original_fairness,
                  100.0 * r.original_kappa, r.near_foreign_fairness, 100.0 * r.near_foreign_kappa,
                  r.gini_fairness, 100.0 * r.gini_kappa);
    os << buf;
  }
  for (const auto& f : t.failures) os << "error: " << f.dataset << ": " << f.message << '\n';
  return os.str();
}

}  // namespace fairkm
