#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairkm/csv.hpp"
#include "fairkm/dataset.hpp"
#include "fairkm/fairadjust.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"

namespace fairkm {

// Metrics of one clustering (the k-means output or an adjusted version).
struct MethodResult {
  std::string method;  // "original", "near_foreign" or "gini"
  Assignment assignment;
  FairnessReport fairness;
  SumOfSquares ss;
  double kappa = 0.0;
  std::vector<ClusterStats> clusters;
  std::vector<BalanceValue> balances;
  GroupPair balance_groups;
  std::optional<AdjustmentTrace> trace;
};

struct DatasetSummary {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t G = 0;
  std::vector<double> group_proportions;
  std::vector<std::string> group_names;
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;
};

struct RunReport {
  DatasetSummary dataset;
  RunConfig config;
  std::vector<Heuristic> heuristics;
  std::size_t kmeans_iterations = 0;
  MethodResult baseline;
  std::vector<MethodResult> adjusted;
  double seconds = 0.0;
};

inline DatasetSummary summarize(const Dataset& data) {
  DatasetSummary s;
  s.n = data.size();
  s.d = data.dims();
  s.G = data.group_count();
  s.group_proportions = group_proportions(data);
  s.group_names = data.metadata().group_names;
  s.feature_names = data.metadata().feature_names;
  s.dropped_rows = data.metadata().dropped_rows;
  return s;
}

// Metrics of an assignment. `data` is the space the clustering was run in.
inline MethodResult evaluate(const Dataset& data, const Assignment& assignment,
                             std::string method) {
  MethodResult r;
  r.method = std::move(method);
  r.assignment = assignment;
  r.fairness = fairness_index(data, assignment);
  r.ss = ss_decomposition(data, assignment);
  if (r.ss.total == 0.0) throw DegenerateDataError("kappa undefined: all points are identical");
  r.kappa = r.ss.between / r.ss.total;
  r.clusters = cluster_stats(data, assignment);
  r.balance_groups = balance_groups(data, assignment);
  r.balances = cluster_balances(data, assignment, r.balance_groups);
  return r;
}

inline bool uses_knn(std::span<const Heuristic> heuristics) {
  return std::find(heuristics.begin(), heuristics.end(), Heuristic::gini) != heuristics.end();
}

// Preprocess, cluster, then run each requested adjustment from the same
// k-means result. config.heuristic is ignored in favour of `heuristics`.
inline RunReport run_pipeline(const Dataset& raw, const RunConfig& config,
                              std::span<const Heuristic> heuristics) {
  const auto start = std::chrono::steady_clock::now();
  config.validate(raw.size(), uses_knn(heuristics));
  const Dataset data = config.standardize ? standardize(raw) : raw;

  RunReport report;
  report.dataset = summarize(raw);
  report.config = config;
  report.heuristics.assign(heuristics.begin(), heuristics.end());

  const auto km = run_kmeans(data, config);
  report.kmeans_iterations = km.iterations;
  report.baseline = evaluate(data, km.assignment, "original");

  for (Heuristic h : heuristics) {
    if (h == Heuristic::none) continue;
    RunConfig c = config;
    c.heuristic = h;
    auto trace = fair_adjust_multi(data, km.assignment, c);
    MethodResult r = evaluate(data, trace.final_assignment, to_string(h));
    r.trace = std::move(trace);
    report.adjusted.push_back(std::move(r));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct SweepRow {
  std::size_t knn_k = 0;
  double fairness = 0.0;
  double kappa = 0.0;
  std::size_t switches = 0;
  Termination reason = Termination::balanced;
};

// Gini adjustment repeated for each neighbourhood size on one shared k-means
// result.
inline std::vector<SweepRow> sweep_knn(const Dataset& raw, const RunConfig& config,
                                       std::span<const std::size_t> knn_values) {
  config.validate(raw.size(), false);
  for (std::size_t k : knn_values) {
    if (k < 1 || k >= raw.size()) {
      throw ValidityError("knn_k must satisfy 1 <= knn_k < n (knn_k=" + std::to_string(k) +
                          ", n=" + std::to_string(raw.size()) + ")");
    }
  }
  const Dataset data = config.standardize ? standardize(raw) : raw;
  const auto km = run_kmeans(data, config);
  std::vector<SweepRow> rows;
  for (std::size_t k : knn_values) {
    RunConfig c = config;
    c.heuristic = Heuristic::gini;
    c.knn_k = k;
    const auto trace = fair_adjust_multi(data, km.assignment, c);
    rows.push_back({k, fairness_index(data, trace.final_assignment).F,
                    cluster_quality_kappa(data, trace.final_assignment), trace.switches.size(),
                    trace.reason});
  }
  return rows;
}

struct ManifestEntry {
  std::filesystem::path path;
  std::string sensitive_column;
  std::size_t K = 2;
  std::optional<std::string> id_column;
};

// CSV manifest with header path,sensitive_col,k[,id_col]. Relative paths are
// resolved against the manifest's directory. An empty file is an empty
// manifest.
inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const auto records = csv::read_file(path);
  std::vector<ManifestEntry> out;
  if (records.empty()) return out;
  const auto& header = records.front().fields;
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (csv::trim(header[c]) == name) return c;
    }
    if (required) throw SchemaError("manifest column not found: '" + name + "'");
    return std::nullopt;
  };
  const std::size_t path_col = *column("path", true);
  const std::size_t sens_col = *column("sensitive_col", true);
  const std::size_t k_col = *column("k", true);
  const auto id_col = column("id_col", false);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw ParseError("manifest row has " + std::to_string(rec.fields.size()) + " fields",
                       rec.line, 1);
    }
    ManifestEntry e;
    e.path = std::string(csv::trim(rec.fields[path_col]));
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    e.sensitive_column = std::string(csv::trim(rec.fields[sens_col]));
    const auto k = csv::parse_number(rec.fields[k_col]);
    if (!k || *k < 2 || *k != static_cast<double>(static_cast<std::size_t>(*k))) {
      throw ParseError("manifest k must be an integer >= 2", rec.line, k_col + 1);
    }
    e.K = static_cast<std::size_t>(*k);
    if (id_col && !csv::trim(rec.fields[*id_col]).empty()) {
      e.id_column = std::string(csv::trim(rec.fields[*id_col]));
    }
    out.push_back(std::move(e));
  }
  return out;
}

struct BenchRow {
  std::string dataset;
  double original_fairness = 0.0;
  double original_kappa = 0.0;
  double near_foreign_fairness = 0.0;
  double near_foreign_kappa = 0.0;
  double gini_fairness = 0.0;
  double gini_kappa = 0.0;
};

struct BenchFailure {
  std::string dataset;
  std::string message;
};

struct BenchTable {
  std::vector<BenchRow> rows;
  std::vector<BenchFailure> failures;
};

// Original / near-foreign / Gini comparison for each manifest entry. Entries
// that fail to load or run are recorded and skipped.
inline BenchTable bench_table(std::span<const ManifestEntry> manifest, const RunConfig& base) {
  BenchTable table;
  const Heuristic both[] = {Heuristic::near_foreign, Heuristic::gini};
  for (const auto& entry : manifest) {
    const std::string name = entry.path.stem().string();
    try {
      const Dataset data = load_csv(entry.path, {entry.sensitive_column, entry.id_column});
      RunConfig c = base;
      c.K = entry.K;
      const auto report = run_pipeline(data, c, both);
      BenchRow row;
      row.dataset = name;
      row.original_fairness = report.baseline.fairness.F;
      row.original_kappa = report.baseline.kappa;
      row.near_foreign_fairness = report.adjusted[0].fairness.F;
      row.near_foreign_kappa = report.adjusted[0].kappa;
      row.gini_fairness = report.adjusted[1].fairness.F;
      row.gini_kappa = report.adjusted[1].kappa;
      table.rows.push_back(std::move(row));
    } catch (const Error& e) {
      table.failures.push_back({name, e.what()});
    }
  }
  return table;
}

}  // namespace fairkm
