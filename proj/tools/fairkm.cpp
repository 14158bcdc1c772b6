// fairkm: k-means with fairness post-processing.
//
//   fairkm run    --input data.csv --sensitive-col gender --k 2 [--heuristic both]
//   fairkm sweep  --input data.csv --sensitive-col gender --k 2 --knn-sweep 5,10,15
//   fairkm bench  --manifest datasets.csv
//
// Exit codes: 0 success, 1 data error, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairkm/fairkm.hpp"
#include "fairkm/report.hpp"

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

struct Options {
  std::string input;
  std::string sensitive_col;
  std::string id_col;
  std::size_t k = 0;
  std::string heuristic = "both";
  std::size_t knn_k = 10;
  double beta0 = 0.10;
  std::uint64_t seed = 0;
  bool standardize = true;
  bool literal_switch = false;
  std::size_t max_iters = 300;
  std::optional<std::size_t> max_pair_rounds;
  std::string init = "random";
  std::string output;
  std::string format = "json";
  bool timing = false;
  std::vector<std::size_t> knn_sweep;
  std::string manifest;
};

void add_tuning(CLI::App* cmd, Options& o) {
  cmd->add_option("--knn-k", o.knn_k, "neighbourhood size for the gini heuristic")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--beta0", o.beta0, "relative balance tolerance in (0,1)")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", o.seed, "RNG seed for centroid initialisation");
  cmd->add_flag("--standardize,!--no-standardize", o.standardize,
                "z-score features before clustering (default on)");
  cmd->add_flag("--literal-switch", o.literal_switch,
                "switch every ranked candidate instead of imbalance-reducing ones only");
  cmd->add_option("--max-iters", o.max_iters, "k-means iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--max-pair-rounds", o.max_pair_rounds,
                  "cap on pairwise adjustment rounds (default K(K-1)/2)");
  cmd->add_option("--init", o.init, "centroid initialisation")
      ->check(CLI::IsMember({"random", "kmeans++"}));
}

void add_input(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "CSV file with a header row")->required();
  cmd->add_option("--sensitive-col", o.sensitive_col, "column holding the sensitive group")
      ->required();
  cmd->add_option("--id-col", o.id_col, "optional point identifier column");
  cmd->add_option("--k", o.k, "number of clusters")->required()->check(CLI::Range(2, 1 << 30));
}

fairkm::RunConfig make_config(const Options& o) {
  fairkm::RunConfig c;
  c.K = o.k == 0 ? 2 : o.k;
  c.knn_k = o.knn_k;
  c.beta0 = o.beta0;
  c.seed = o.seed;
  c.standardize = o.standardize;
  c.literal_switch = o.literal_switch;
  c.max_kmeans_iters = o.max_iters;
  c.max_pair_rounds = o.max_pair_rounds;
  c.init = o.init == "kmeans++" ? fairkm::InitMethod::kmeans_plus_plus
                                : fairkm::InitMethod::random_points;
  return c;
}

std::vector<fairkm::Heuristic> parse_heuristics(const std::string& name) {
  if (name == "near-foreign") return {fairkm::Heuristic::near_foreign};
  if (name == "gini") return {fairkm::Heuristic::gini};
  if (name == "none") return {};
  return {fairkm::Heuristic::near_foreign, fairkm::Heuristic::gini};
}

fairkm::Dataset load(const Options& o) {
  fairkm::CsvOptions csv{o.sensitive_col, std::nullopt};
  if (!o.id_col.empty()) csv.id_column = o.id_col;
  return fairkm::load_csv(o.input, csv);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fairkm::Error("cannot write output file: " + path);
  out << text;
}

int run_command(const Options& o) {
  const auto data = load(o);
  const auto heuristics = parse_heuristics(o.heuristic);
  const auto report = fairkm::run_pipeline(data, make_config(o), heuristics);
  if (o.format == "csv") {
    emit(fairkm::report_csv(report), o.output);
  } else {
    emit(fairkm::report_json(report, o.timing).dump(2) + "\n", o.output);
  }
  return 0;
}

int sweep_command(const Options& o) {
  const auto data = load(o);
  const auto rows = fairkm::sweep_knn(data, make_config(o), o.knn_sweep);
  emit(fairkm::sweep_csv(rows), o.output);
  return 0;
}

int bench_command(const Options& o) {
  const auto manifest = fairkm::read_manifest(o.manifest);
  const auto table = fairkm::bench_table(manifest, make_config(o));
  std::cout << fairkm::bench_text(table);
  if (!o.output.empty()) emit(fairkm::bench_csv(table), o.output);
  for (const auto& f : table.failures) {
    std::cerr << "fairkm: " << f.dataset << ": " << f.message << '\n';
  }
  return table.failures.empty() ? 0 : kDataError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-means clustering with fairness post-processing"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "cluster, adjust and write a report");
  add_input(run, o);
  add_tuning(run, o);
  run->add_option("--heuristic", o.heuristic, "adjustment heuristic")
      ->check(CLI::IsMember({"near-foreign", "gini", "none", "both"}));
  run->add_option("--output", o.output, "report path (default stdout)");
  run->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_flag("--timing", o.timing, "include wall-clock time in the JSON report");

  auto* sweep = app.add_subcommand("sweep", "gini adjustment over several neighbourhood sizes");
  add_input(sweep, o);
  add_tuning(sweep, o);
  sweep->add_option("--knn-sweep", o.knn_sweep, "comma-separated neighbourhood sizes")
      ->delimiter(',')
      ->required();
  sweep->add_option("--heuristic", o.heuristic, "must be gini")
      ->check(CLI::IsMember({"gini", "both"}));
  sweep->add_option("--output", o.output, "CSV path (default stdout)");

  auto* bench = app.add_subcommand("bench", "original vs adjusted comparison over a manifest");
  bench->add_option("--manifest", o.manifest, "CSV with columns path,sensitive_col,k[,id_col]")
      ->required();
  add_tuning(bench, o);
  bench->add_option("--output", o.output, "also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run) return run_command(o);
    if (*sweep) return sweep_command(o);
    return bench_command(o);
  } catch (const fairkm::Error& e) {
    std::cerr << "fairkm: " << e.what() << '\n';
    return kDataError;
  }
}
