// cubeint: assess query interestingness, run the scaling bench, generate data.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cubeint/cubeint.hpp"

namespace {

using namespace cubeint;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) out.push_back(std::stoull(item));
  if (out.empty()) throw Error(Errc::invalid_argument, "empty size list");
  return out;
}

void emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(Errc::io_error, "cannot write " + out);
  f << j.dump(2) << "\n";
}

struct AssessArgs {
  std::string schema, facts, history, beliefs, goal, expected, expected_labels, labels, beacons;
  std::string query, query_file, metrics, weights = "0.5,0.35,0.15", agg = "average", out;
  double pi = 0.5;
  std::size_t k = 2;
  bool strict_labels = false;
};

AggregationSpec parse_agg(const std::string& s, std::size_t k) {
  if (s == "min") return {AggKind::min, k};
  if (s == "max") return {AggKind::max, k};
  if (s == "average" || s == "avg") return {AggKind::average, k};
  if (s == "median") return {AggKind::median, k};
  if (s == "knn") return {AggKind::knn, k};
  throw Error(Errc::invalid_argument, "unknown aggregation '" + s + "'");
}

int run_assess(const AssessArgs& a) {
  DetailedCube cube = load_dataset(a.schema, a.facts);
  const auto& s = cube.schema();
  SessionContext ctx;
  if (!a.history.empty())
    for (auto& line : parse_session(s, read_text_file(a.history))) ctx.history.append(s, line.query, line.session);
  if (!a.beliefs.empty())
    for (auto& b : parse_beliefs(s, read_text_file(a.beliefs))) ctx.beliefs.add(std::move(b));
  if (!a.goal.empty()) ctx.goals = parse_goals(s, read_text_file(a.goal));
  if (!a.beacons.empty())
    for (auto& line : parse_session(s, read_text_file(a.beacons))) ctx.beacons.push_back(line.query);
  if (!a.expected.empty()) {
    auto in = open_input(a.expected);
    ctx.expected_values = ExpectedValues::load(s, in);
  }
  if (!a.expected_labels.empty()) {
    auto in = open_input(a.expected_labels);
    ctx.expected_labels = ExpectedLabels::load(s, in);
  }
  if (!a.labels.empty()) ctx.labels = parse_label_rules(s, read_text_file(a.labels), a.strict_labels);

  std::string text = a.query;
  if (!a.query_file.empty()) {
    text = read_text_file(a.query_file);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  }
  if (text.empty()) throw Error(Errc::invalid_argument, "no query given (use --query or --query-file)");
  CubeQuery q = parse_query(s, text);

  AssessConfig cfg;
  for (const auto& m : split_list(a.metrics)) cfg.metrics.insert(m);
  cfg.pi = a.pi;
  cfg.k = a.k;
  auto w = split_list(a.weights);
  if (w.size() != 3) throw Error(Errc::invalid_argument, "--weights needs three comma-separated values");
  cfg.weights = {std::stod(w[0]), std::stod(w[1]), std::stod(w[2])};
  cfg.peculiarity_agg = parse_agg(a.agg, a.k);
  emit(interestingness_vector(cube, ctx, q, cfg, print_query(s, q)).json, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query interestingness assessment over hierarchical cubes"};
  app.require_subcommand(1);

  AssessArgs aa;
  auto* assess = app.add_subcommand("assess", "Score one query against a session context");
  assess->add_option("--schema", aa.schema, "Directory of <Dimension>.csv hierarchy files")->required();
  assess->add_option("--facts", aa.facts, "Fact CSV")->required();
  assess->add_option("--history", aa.history, "Session file with past queries");
  assess->add_option("--beliefs", aa.beliefs, "Belief statements, one per line");
  assess->add_option("--goal", aa.goal, "Goal conditions, one per line");
  assess->add_option("--beacons", aa.beacons, "Beacon queries for same-level relevance");
  assess->add_option("--expected", aa.expected, "Expected values CSV");
  assess->add_option("--expected-labels", aa.expected_labels, "Expected labels CSV");
  assess->add_option("--labels", aa.labels, "Label rules");
  assess->add_flag("--strict-labels", aa.strict_labels, "Reject gaps between label intervals");
  auto* qopt = assess->add_option("--query", aa.query, "Query text");
  assess->add_option("--query-file", aa.query_file, "File holding the query text")->excludes(qopt);
  assess->add_option("--metrics", aa.metrics, "Comma list of groups or group.key (default: all)");
  assess->add_option("--pi", aa.pi, "Belief knownness threshold")->check(CLI::Range(0.0, 1.0));
  assess->add_option("--k", aa.k, "k for k-NN peculiarity")->check(CLI::PositiveNumber);
  assess->add_option("--weights", aa.weights, "Syntactic distance weights: filter,levels,measures");
  assess->add_option("--agg", aa.agg, "Peculiarity aggregation: min|max|average|median|knn");
  assess->add_option("--out", aa.out, "Report path (default stdout)");

  BenchConfig bc;
  std::string base_sizes = "10000,100000,1000000", history_sizes = "1,5,10", bench_out;
  auto* bench = app.add_subcommand("bench", "Time PDEN, PDER, Jaccard peculiarity and GBDSR on generated cubes");
  bench->add_option("--base-sizes", base_sizes, "Comma list of fact row counts");
  bench->add_option("--history-sizes", history_sizes, "Comma list of history lengths");
  bench->add_option("--seed", bc.seed, "Generator seed");
  bench->add_option("--reps", bc.reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  bench->add_option("--min-sample-ms", bc.min_sample_ms, "Minimum duration of one timing sample");
  bench->add_option("--out", bench_out, "Report path (default stdout)");

  std::size_t rows = 10000;
  std::uint64_t gen_seed = 7;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a synthetic loan cube");
  gen->add_option("--rows", rows, "Fact rows")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*assess) return run_assess(aa);
    if (*bench) {
      bc.base_sizes = parse_sizes(base_sizes);
      bc.history_sizes = parse_sizes(history_sizes);
      auto rep = run_benchmark(bc, [](const std::string& line) { std::cerr << line << "\n"; });
      for (const auto& c : rep.scaling_checks())
        std::cerr << (c.pass ? "ok   " : "FAIL ") << c.name << ": " << c.detail << "\n";
      emit(rep.to_json(), bench_out);
      return 0;
    }
    if (*gen) {
      write_star(generate_star(rows, gen_seed), gen_out);
      return 0;
    }
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
