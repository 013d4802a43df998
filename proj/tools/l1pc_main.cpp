// Command-line front end: synthetic data generation, single clustering runs,
// and benchmark grids. Exit codes: 0 success, 1 runtime failure (I/O and the
// like), 2 usage error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l1pc/baselines.hpp"
#include "l1pc/bench.hpp"
#include "l1pc/io.hpp"
#include "l1pc/pcm.hpp"
#include "l1pc/synthdata.hpp"

namespace {

using l1pc::Index;

struct GenOptions {
  std::string dist = "normal";
  long long n = 0;
  std::string sizes = "100,100";
  std::string means = "1,-1";
  double sigma = 0;
  double support = 0;
  bool sigma_set = false;
  bool support_set = false;
  std::uint64_t seed = 0;
  std::string out;
  std::string labels;
  bool f32 = false;
  bool binary = false;
  int threads = 1;
};

struct ClusterOptions {
  std::string algo;
  long long k = 0;
  std::string in;
  std::string weights;
  double nu0 = 1.0;
  double delta = 0.1;
  double m = 2.0;
  double eps = 0;
  bool eps_set = false;
  long long max_iters = 100;
  int median_weight_exp = 1;
  std::uint64_t seed = 0;
  std::string out_centers;
  std::string out_labels;
  std::string trace;
  int threads = 1;
};

struct BenchOptions {
  std::string config;
  std::string preset;
  std::string out;
  bool table = false;
  bool timings = false;
  int threads = 0;  // 0 = keep the grid's setting
};

std::pair<double, double> parse_pair(const std::string& text,
                                     const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == text.size())
    throw std::invalid_argument(std::string(what) +
                                " must be two comma-separated values");
  std::size_t used1 = 0, used2 = 0;
  double a, b;
  try {
    a = std::stod(text.substr(0, comma), &used1);
    b = std::stod(text.substr(comma + 1), &used2);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": malformed number in '" +
                                text + "'");
  }
  if (used1 != comma || used2 != text.size() - comma - 1)
    throw std::invalid_argument(std::string(what) + ": malformed number in '" +
                                text + "'");
  return {a, b};
}

int run_gen(const GenOptions& opt) {
  l1pc::synthdata::SyntheticSpec<double> spec;
  spec.dist = l1pc::synthdata::dist_from_string(opt.dist);
  spec.n = static_cast<Index>(opt.n);
  const auto sizes = parse_pair(opt.sizes, "--sizes");
  if (sizes.first != static_cast<long long>(sizes.first) ||
      sizes.second != static_cast<long long>(sizes.second))
    throw std::invalid_argument("--sizes must be integers");
  spec.n1 = static_cast<Index>(sizes.first);
  spec.n2 = static_cast<Index>(sizes.second);
  const auto means = parse_pair(opt.means, "--means");
  spec.mu1 = means.first;
  spec.mu2 = means.second;
  if (opt.sigma_set == opt.support_set)
    throw std::invalid_argument("give exactly one of --sigma or --support");
  spec.sigma = opt.sigma_set ? opt.sigma : 0.0;
  spec.support = opt.support_set ? opt.support : 0.0;
  spec.seed = opt.seed;
  spec.threads = opt.threads;

  const auto labeled = l1pc::synthdata::generate(spec);
  if (opt.binary)
    l1pc::io::write_points_binary(opt.out, labeled.data.points, opt.f32);
  else
    l1pc::io::write_points_csv(opt.out, labeled.data.points, opt.f32);
  if (!opt.labels.empty()) l1pc::io::write_labels(opt.labels, labeled.labels);

  std::printf("wrote %lld points of dimension %lld (%s, %s=%.17g) to %s\n",
              static_cast<long long>(labeled.data.size()),
              static_cast<long long>(labeled.data.dim()),
              l1pc::synthdata::to_string(spec.dist),
              spec.dist == l1pc::synthdata::Dist::normal ? "sigma" : "support",
              spec.dist == l1pc::synthdata::Dist::normal ? spec.sigma
                                                         : spec.support,
              opt.out.c_str());
  return 0;
}

int run_cluster(const ClusterOptions& opt) {
  l1pc::l1core::DataSet<double> data;
  data.points = l1pc::io::read_points(opt.in);
  if (!opt.weights.empty()) {
    data.weights = l1pc::io::read_weights(opt.weights);
    if (data.weights.size() != data.points.rows())
      throw std::invalid_argument("--weights: expected one weight per point");
  } else {
    data.weights = l1pc::Vector<double>::Ones(data.points.rows());
  }

  const Index k = static_cast<Index>(opt.k);
  l1pc::pcm::ClusteringResult<double> result;
  if (opt.algo == "pcm") {
    l1pc::pcm::PcmConfig<double> config;
    config.k = k;
    config.nu0 = opt.nu0;
    config.delta = opt.delta;
    if (opt.eps_set) config.epsilon = opt.eps;
    config.max_iters = static_cast<Index>(opt.max_iters);
    config.median_weight_exponent = opt.median_weight_exp;
    config.seed = opt.seed;
    config.threads = opt.threads;
    result = l1pc::pcm::pcm_fit(data, config);
  } else if (opt.algo == "fcm") {
    l1pc::baselines::FcmConfig<double> config;
    config.k = k;
    config.m = opt.m;
    if (opt.eps_set) config.epsilon = opt.eps;
    config.max_iters = static_cast<Index>(opt.max_iters);
    config.seed = opt.seed;
    config.threads = opt.threads;
    result = l1pc::baselines::fcm_fit(data, config);
  } else {
    l1pc::baselines::KmediansConfig<double> config;
    config.k = k;
    if (opt.eps_set) config.epsilon = opt.eps;
    config.max_iters = static_cast<Index>(opt.max_iters);
    config.seed = opt.seed;
    config.threads = opt.threads;
    result = l1pc::baselines::kmedians_fit(data, config);
  }

  if (!opt.out_centers.empty())
    l1pc::io::write_points_csv(opt.out_centers, result.centers);
  if (!opt.out_labels.empty())
    l1pc::io::write_labels(opt.out_labels, result.hard_labels);
  if (!opt.trace.empty()) l1pc::io::write_trace_csv(opt.trace, result.trace);

  const auto distances =
      l1pc::l1core::distance_matrix(data.points, result.centers);
  l1pc::NeumaierSum<double> hard;
  for (Index i = 0; i < distances.rows(); ++i)
    hard.add(data.weights(i) * distances.row(i).minCoeff());
  std::printf(
      "%s: %lld points, dimension %lld, K=%lld, %lld iterations, %s, "
      "hard objective %.17g\n",
      opt.algo.c_str(), static_cast<long long>(data.size()),
      static_cast<long long>(data.dim()), static_cast<long long>(k),
      static_cast<long long>(result.iterations_run),
      result.converged ? "converged" : "iteration cap reached", hard.value());
  return 0;
}

const char* preset_config(const std::string& name) {
  if (name == "smoke")
    return R"({"dist": "normal", "n": [50], "spread": [0.5], "sizes": [20, 20],
               "repeats": 2, "algos": ["pcm", "fcm", "kmedians"], "seed": 1})";
  if (name == "normal-desk")
    return R"({"dist": "normal", "n": [10000], "spread": [8], "sizes": [100, 100],
               "repeats": 10, "algos": ["pcm", "fcm", "kmedians"], "seed": 271828})";
  if (name == "normal-desk-large")
    return R"({"dist": "normal", "n": [100000], "spread": [16], "sizes": [100, 100],
               "repeats": 10, "algos": ["pcm", "fcm", "kmedians"], "seed": 271828})";
  if (name == "uniform-desk")
    return R"({"dist": "uniform", "n": [10000], "spread": [16, 32], "sizes": [100, 100],
               "repeats": 10, "algos": ["pcm", "fcm", "kmedians"], "seed": 271828})";
  if (name == "normal-long")
    return R"({"dist": "normal", "n": [10000, 100000, 500000, 1000000],
               "spread": [8, 16, 24], "sizes": [100, 100], "repeats": 10,
               "algos": ["pcm", "fcm", "kmedians"], "seed": 271828})";
  throw std::invalid_argument(
      "unknown preset '" + name +
      "' (available: smoke, normal-desk, normal-desk-large, "
      "uniform-desk, normal-long)");
}

int run_bench(const BenchOptions& opt) {
  if (opt.config.empty() == opt.preset.empty())
    throw std::invalid_argument("give exactly one of --config or --preset");
  std::string text;
  if (!opt.config.empty()) {
    std::ifstream in(opt.config, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + opt.config);
    text.assign(std::istreambuf_iterator<char>(in),
                std::istreambuf_iterator<char>());
  } else {
    text = preset_config(opt.preset);
  }
  l1pc::bench::json parsed;
  try {
    parsed = l1pc::bench::json::parse(text);
  } catch (const l1pc::bench::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed grid config: ") +
                                e.what());
  }
  auto grid = l1pc::bench::grid_from_json<double>(parsed);
  if (opt.threads > 0) grid.threads = opt.threads;

  const auto report = l1pc::bench::run_grid(grid);
  const auto j = l1pc::bench::report_to_json(report, opt.timings);
  {
    std::ofstream out(opt.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + opt.out);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("short write to " + opt.out);
  }
  if (opt.table) std::fputs(l1pc::bench::report_to_table(report).c_str(), stdout);
  std::printf("wrote report with %lld cells to %s\n",
              static_cast<long long>(report.cells.size()), opt.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic l1 clustering toolkit"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd =
      app.add_subcommand("gen", "generate a synthetic two-cluster dataset");
  gen_cmd->add_option("--dist", gen.dist, "normal | uniform")
      ->check(CLI::IsMember({"normal", "uniform"}));
  gen_cmd->add_option("--n", gen.n, "dimension")->required();
  gen_cmd->add_option("--sizes", gen.sizes, "cluster sizes N1,N2");
  gen_cmd->add_option("--means", gen.means, "cluster means M1,M2");
  auto* sigma_opt =
      gen_cmd->add_option("--sigma", gen.sigma, "normal standard deviation");
  auto* support_opt =
      gen_cmd->add_option("--support", gen.support, "uniform support width");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out", gen.out, "points file to write")->required();
  gen_cmd->add_option("--labels", gen.labels, "labels file to write");
  gen_cmd->add_flag("--f32", gen.f32, "store coordinates in 32-bit precision");
  gen_cmd->add_flag("--binary", gen.binary,
                    "write the raw binary format instead of CSV");
  gen_cmd->add_option("--threads", gen.threads, "worker threads")
      ->check(CLI::PositiveNumber);

  ClusterOptions cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster a points file");
  cluster_cmd->add_option("--algo", cluster.algo, "pcm | fcm | kmedians")
      ->check(CLI::IsMember({"pcm", "fcm", "kmedians"}))
      ->required();
  cluster_cmd->add_option("--k", cluster.k, "number of clusters")->required();
  cluster_cmd->add_option("--in", cluster.in, "points file (CSV or binary)")
      ->required();
  cluster_cmd->add_option("--weights", cluster.weights,
                          "optional per-point weights file");
  cluster_cmd->add_option("--nu0", cluster.nu0,
                          "initial assignment exponent (pcm)");
  cluster_cmd->add_option("--delta", cluster.delta,
                          "exponent increment per iteration (pcm)");
  cluster_cmd->add_option("--m", cluster.m, "fuzzifier (fcm)");
  auto* eps_opt = cluster_cmd->add_option(
      "--eps", cluster.eps, "movement stop threshold (default 1e-6 * n)");
  cluster_cmd->add_option("--max-iters", cluster.max_iters, "iteration cap");
  cluster_cmd->add_option("--median-weight-exp", cluster.median_weight_exp,
                          "median weight exponent, 1 or 2 (pcm)");
  cluster_cmd->add_option("--seed", cluster.seed, "center init seed");
  cluster_cmd->add_option("--out-centers", cluster.out_centers,
                          "centers file to write");
  cluster_cmd->add_option("--out-labels", cluster.out_labels,
                          "hard labels file to write");
  cluster_cmd->add_option("--trace", cluster.trace,
                          "per-iteration trace file to write");
  cluster_cmd->add_option("--threads", cluster.threads, "worker threads")
      ->check(CLI::PositiveNumber);

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark grid");
  bench_cmd->add_option("--config", bench.config, "grid config JSON file");
  bench_cmd->add_option("--preset", bench.preset,
                        "built-in grid: smoke, normal-desk, "
                        "normal-desk-large, uniform-desk, normal-long");
  bench_cmd->add_option("--out", bench.out, "report JSON file to write")
      ->required();
  bench_cmd->add_flag("--table", bench.table,
                      "also print a plain-text table of cell means");
  bench_cmd->add_flag("--timings", bench.timings,
                      "include wall-clock fields in the report");
  bench_cmd->add_option("--threads", bench.threads,
                        "override the grid's worker thread count")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  gen.sigma_set = sigma_opt->count() > 0;
  gen.support_set = support_opt->count() > 0;
  cluster.eps_set = eps_opt->count() > 0;

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (cluster_cmd->parsed()) return run_cluster(cluster);
    return run_bench(bench);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
