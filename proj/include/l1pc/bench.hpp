#ifndef L1PC_BENCH_HPP
#define L1PC_BENCH_HPP

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "l1pc/baselines.hpp"
#include "l1pc/common.hpp"
#include "l1pc/pcm.hpp"
#include "l1pc/random.hpp"
#include "l1pc/synthdata.hpp"

namespace l1pc::bench {

using json = nlohmann::ordered_json;

enum class Algo { pcm, fcm, kmedians };

inline const char* to_string(Algo algo) {
  switch (algo) {
    case Algo::pcm: return "pcm";
    case Algo::fcm: return "fcm";
    default: return "kmedians";
  }
}

inline Algo algo_from_string(const std::string& name) {
  if (name == "pcm") return Algo::pcm;
  if (name == "fcm") return Algo::fcm;
  if (name == "kmedians") return Algo::kmedians;
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace detail {

// Minimum-cost perfect assignment on a square cost matrix via shortest
// augmenting paths with potentials, O(K^3). Returns row -> column.
inline std::vector<Index> min_cost_assignment(const Matrix<double>& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n + 1), 0);
  std::vector<Index> way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      Index j1 = 0;
      double delta = inf;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur =
            cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
            v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> row_to_col(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] != 0)
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] =
          j - 1;
  return row_to_col;
}

}  // namespace detail

// Percentage of points whose predicted cluster differs from the truth, taken
// at the best bijection between predicted and true labels: exhaustive over
// the K! relabelings for K <= 8, optimal assignment on the K x K confusion
// matrix beyond that.
inline double misclassification_rate(const std::vector<Index>& predicted,
                                     const std::vector<Index>& truth,
                                     Index k) {
  require(predicted.size() == truth.size(),
          "misclassification_rate: length mismatch");
  require(!predicted.empty(), "misclassification_rate: empty labels");
  require(k >= 1, "misclassification_rate: cluster count must be >= 1");
  Matrix<double> confusion = Matrix<double>::Zero(k, k);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const Index p = predicted[i];
    const Index t = truth[i];
    require(p >= 0 && p < k && t >= 0 && t < k,
            "misclassification_rate: label out of range");
    confusion(t, p) += 1.0;
  }
  double best_matches = 0;
  if (k <= 8) {
    std::vector<Index> map(static_cast<std::size_t>(k));
    std::iota(map.begin(), map.end(), Index(0));
    do {
      double matches = 0;
      for (Index p = 0; p < k; ++p)
        matches += confusion(map[static_cast<std::size_t>(p)], p);
      best_matches = std::max(best_matches, matches);
    } while (std::next_permutation(map.begin(), map.end()));
  } else {
    const double top = confusion.maxCoeff();
    Matrix<double> cost = (top - confusion.array()).matrix();
    const auto assign = detail::min_cost_assignment(cost);
    for (Index t = 0; t < k; ++t)
      best_matches += confusion(t, assign[static_cast<std::size_t>(t)]);
  }
  const double total = static_cast<double>(predicted.size());
  return 100.0 * (1.0 - best_matches / total);
}

// Grid of synthetic experiments: the cross product of dimension values and
// spread values (sigma for normal data, support width for uniform), each
// cell repeated with freshly derived seeds and scored per algorithm.
template <class Scalar>
struct ExperimentGrid {
  synthdata::SyntheticSpec<Scalar> base;  // n, spread and seed set per run
  std::vector<Index> dims;
  std::vector<Scalar> spreads;
  Index repeats = 10;
  std::vector<Algo> algos;
  pcm::PcmConfig<Scalar> pcm_config;
  baselines::FcmConfig<Scalar> fcm_config;
  baselines::KmediansConfig<Scalar> kmedians_config;
  std::uint64_t base_seed = 0;
  int threads = 1;
};

struct RunResult {
  double pct = 0;
  double iterations = 0;
  double wall_ms = 0;
  bool failed = false;
  std::string error;
};

struct CellResult {
  std::string algo;
  Index n = 0;
  double spread = 0;
  std::vector<RunResult> runs;
  double mean_pct = 0;
  double mean_iters = 0;
  double wall_ms = 0;
};

struct ExperimentReport {
  json grid_echo;
  std::vector<CellResult> cells;
};

// Seed derivation, stable across grid shapes so any single cell can be rerun
// in isolation: chained splitmix64 over the base seed, the dimension, the
// spread's bit pattern, and the repeat index. Every algorithm sees the same
// dataset within a (cell, repeat) pair and gets its own init seed.
inline std::uint64_t cell_seed(std::uint64_t base_seed, Index n, double spread,
                               Index repeat) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(spread));
  h = splitmix64(h ^ static_cast<std::uint64_t>(repeat));
  return h;
}

inline std::uint64_t algo_seed(std::uint64_t data_seed, Algo algo) {
  return splitmix64(data_seed ^ (0xA150ULL + static_cast<std::uint64_t>(algo)));
}

template <class Scalar>
void validate(const ExperimentGrid<Scalar>& grid) {
  require(!grid.dims.empty(), "experiment grid needs at least one dimension");
  require(!grid.spreads.empty(), "experiment grid needs at least one spread");
  require(!grid.algos.empty(), "experiment grid needs at least one algorithm");
  require(grid.repeats >= 1, "repeats must be at least 1");
  for (const Index n : grid.dims) require(n >= 1, "dimensions must be >= 1");
  for (const Scalar s : grid.spreads)
    require(std::isfinite(s) && s > Scalar(0), "spreads must be positive");
  require(grid.base.n1 >= 1 && grid.base.n2 >= 1,
          "cluster sizes must be at least 1");
}

template <class Scalar>
json grid_to_json(const ExperimentGrid<Scalar>& grid) {
  json j;
  j["dist"] = synthdata::to_string(grid.base.dist);
  j["n"] = grid.dims;
  j["spread"] = grid.spreads;
  j["sizes"] = {grid.base.n1, grid.base.n2};
  j["means"] = {grid.base.mu1, grid.base.mu2};
  j["repeats"] = grid.repeats;
  json algos = json::array();
  for (const Algo a : grid.algos) algos.push_back(to_string(a));
  j["algos"] = algos;
  j["seed"] = grid.base_seed;
  j["pcm"] = {{"nu0", grid.pcm_config.nu0},
              {"delta", grid.pcm_config.delta},
              {"eps", grid.pcm_config.epsilon
                          ? json(*grid.pcm_config.epsilon)
                          : json(nullptr)},
              {"max_iters", grid.pcm_config.max_iters},
              {"median_weight_exp", grid.pcm_config.median_weight_exponent}};
  j["fcm"] = {{"m", grid.fcm_config.m},
              {"eps", grid.fcm_config.epsilon ? json(*grid.fcm_config.epsilon)
                                              : json(nullptr)},
              {"max_iters", grid.fcm_config.max_iters}};
  j["kmedians"] = {{"eps", grid.kmedians_config.epsilon
                              ? json(*grid.kmedians_config.epsilon)
                              : json(nullptr)},
                   {"max_iters", grid.kmedians_config.max_iters}};
  return j;
}

namespace detail {

template <class Scalar>
pcm::ClusteringResult<Scalar> run_algo(const ExperimentGrid<Scalar>& grid,
                                       Algo algo,
                                       const l1core::DataSet<Scalar>& data,
                                       std::uint64_t seed) {
  switch (algo) {
    case Algo::pcm: {
      auto config = grid.pcm_config;
      config.k = 2;
      config.seed = seed;
      config.threads = grid.threads;
      // Spread seeding instead of random point starts: with many coordinates
      // the first update pulls both centers to the global median, and from a
      // random start about a third of the runs never separate afterwards.
      config.init_centers = pcm::farthest_first_centers(data, config.k);
      return pcm::pcm_fit(data, config);
    }
    case Algo::fcm: {
      auto config = grid.fcm_config;
      config.k = 2;
      config.seed = seed;
      config.threads = grid.threads;
      return baselines::fcm_fit(data, config);
    }
    default: {
      auto config = grid.kmedians_config;
      config.k = 2;
      config.seed = seed;
      config.threads = grid.threads;
      return baselines::kmedians_fit(data, config);
    }
  }
}

}  // namespace detail

// Runs every (dimension, spread) cell `repeats` times; each repeat generates
// one dataset shared by all algorithms. Per-run failures are recorded in the
// report and excluded from the cell means. Cells appear ordered by
// dimension, then spread, then algorithm, deterministically.
template <class Scalar>
ExperimentReport run_grid(const ExperimentGrid<Scalar>& grid) {
  validate(grid);
  ExperimentReport report;
  report.grid_echo = grid_to_json(grid);
  for (const Index n : grid.dims) {
    for (const Scalar spread : grid.spreads) {
      std::vector<std::vector<RunResult>> runs(grid.algos.size());
      for (Index r = 0; r < grid.repeats; ++r) {
        const std::uint64_t data_seed =
            cell_seed(grid.base_seed, n, double(spread), r);
        auto spec = grid.base;
        spec.n = n;
        if (spec.dist == synthdata::Dist::normal)
          spec.sigma = spread;
        else
          spec.support = spread;
        spec.seed = data_seed;
        spec.threads = grid.threads;
        const auto labeled = synthdata::generate(spec);
        for (std::size_t a = 0; a < grid.algos.size(); ++a) {
          RunResult run;
          const auto start = std::chrono::steady_clock::now();
          try {
            const auto result =
                detail::run_algo(grid, grid.algos[a], labeled.data,
                                 algo_seed(data_seed, grid.algos[a]));
            run.pct = misclassification_rate(result.hard_labels,
                                             labeled.labels, 2);
            run.iterations = static_cast<double>(result.iterations_run);
          } catch (const std::exception& e) {
            run.failed = true;
            run.error = e.what();
          }
          const auto stop = std::chrono::steady_clock::now();
          run.wall_ms =
              std::chrono::duration<double, std::milli>(stop - start).count();
          runs[a].push_back(std::move(run));
        }
      }
      for (std::size_t a = 0; a < grid.algos.size(); ++a) {
        CellResult cell;
        cell.algo = to_string(grid.algos[a]);
        cell.n = n;
        cell.spread = double(spread);
        cell.runs = std::move(runs[a]);
        double pct_sum = 0, iter_sum = 0, wall_sum = 0;
        Index ok = 0;
        for (const RunResult& run : cell.runs) {
          wall_sum += run.wall_ms;
          if (run.failed) continue;
          pct_sum += run.pct;
          iter_sum += run.iterations;
          ++ok;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        cell.mean_pct = ok > 0 ? pct_sum / double(ok) : nan;
        cell.mean_iters = ok > 0 ? iter_sum / double(ok) : nan;
        cell.wall_ms = wall_sum;
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

// Wall-clock fields are skipped unless asked for, so that repeated runs of
// the same grid serialize to identical bytes.
inline json report_to_json(const ExperimentReport& report,
                           bool include_timings = false) {
  json j;
  j["grid_echo"] = report.grid_echo;
  json cells = json::array();
  for (const CellResult& cell : report.cells) {
    json c;
    c["algo"] = cell.algo;
    c["n"] = cell.n;
    c["spread"] = cell.spread;
    json runs = json::array();
    for (const RunResult& run : cell.runs) {
      json item;
      if (run.failed) {
        item["error"] = run.error;
      } else {
        item["pct"] = run.pct;
        item["iterations"] = run.iterations;
        if (include_timings) item["wall_ms"] = run.wall_ms;
      }
      runs.push_back(std::move(item));
    }
    c["runs"] = std::move(runs);
    c["mean_pct"] = cell.mean_pct;
    c["mean_iters"] = cell.mean_iters;
    if (include_timings) c["wall_ms"] = cell.wall_ms;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

// Plain-text table: one block per algorithm, spreads down the rows and
// dimensions across the columns.
inline std::string report_to_table(const ExperimentReport& report) {
  std::vector<std::string> algos;
  std::vector<Index> dims;
  std::vector<double> spreads;
  for (const CellResult& cell : report.cells) {
    if (std::find(algos.begin(), algos.end(), cell.algo) == algos.end())
      algos.push_back(cell.algo);
    if (std::find(dims.begin(), dims.end(), cell.n) == dims.end())
      dims.push_back(cell.n);
    if (std::find(spreads.begin(), spreads.end(), cell.spread) == spreads.end())
      spreads.push_back(cell.spread);
  }
  std::string out;
  char buf[64];
  for (const std::string& algo : algos) {
    out += "mean misclassification % - " + algo + "\n";
    out += "  spread \\ n";
    for (const Index n : dims) {
      std::snprintf(buf, sizeof buf, " %12lld", static_cast<long long>(n));
      out += buf;
    }
    out += "\n";
    for (const double spread : spreads) {
      std::snprintf(buf, sizeof buf, "  %10.6g", spread);
      out += buf;
      for (const Index n : dims) {
        const CellResult* found = nullptr;
        for (const CellResult& cell : report.cells)
          if (cell.algo == algo && cell.n == n && cell.spread == spread)
            found = &cell;
        if (found)
          std::snprintf(buf, sizeof buf, " %12.2f", found->mean_pct);
        else
          std::snprintf(buf, sizeof buf, " %12s", "-");
        out += buf;
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

namespace detail {

inline void check_keys(const json& j, const char* what,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) ok = true;
    if (!ok)
      throw std::invalid_argument(std::string(what) + ": unknown key '" +
                                  item.key() + "'");
  }
}

}  // namespace detail

// Parses a grid configuration. Unknown keys are rejected so typos cannot
// silently fall back to defaults.
template <class Scalar>
ExperimentGrid<Scalar> grid_from_json(const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("grid config must be a JSON object");
  detail::check_keys(j, "grid config",
                     {"dist", "n", "spread", "sizes", "means", "repeats",
                      "algos", "seed", "threads", "pcm", "fcm", "kmedians"});
  ExperimentGrid<Scalar> grid;
  try {
    grid.base.dist =
        synthdata::dist_from_string(j.value("dist", std::string("normal")));
    if (j.contains("n"))
      for (const auto& v : j.at("n"))
        grid.dims.push_back(static_cast<Index>(v.get<long long>()));
    if (j.contains("spread"))
      for (const auto& v : j.at("spread"))
        grid.spreads.push_back(static_cast<Scalar>(v.get<double>()));
    if (j.contains("sizes")) {
      const auto sizes = j.at("sizes");
      if (!sizes.is_array() || sizes.size() != 2)
        throw std::invalid_argument("sizes must be [N1, N2]");
      grid.base.n1 = static_cast<Index>(sizes[0].get<long long>());
      grid.base.n2 = static_cast<Index>(sizes[1].get<long long>());
    }
    if (j.contains("means")) {
      const auto means = j.at("means");
      if (!means.is_array() || means.size() != 2)
        throw std::invalid_argument("means must be [mu1, mu2]");
      grid.base.mu1 = static_cast<Scalar>(means[0].get<double>());
      grid.base.mu2 = static_cast<Scalar>(means[1].get<double>());
    }
    grid.repeats = static_cast<Index>(j.value("repeats", 10LL));
    if (j.contains("algos"))
      for (const auto& v : j.at("algos"))
        grid.algos.push_back(algo_from_string(v.get<std::string>()));
    else
      grid.algos = {Algo::pcm, Algo::fcm, Algo::kmedians};
    grid.base_seed = j.value("seed", 0ULL);
    grid.threads = static_cast<int>(j.value("threads", 1LL));
    if (j.contains("pcm")) {
      const auto& p = j.at("pcm");
      detail::check_keys(p, "pcm config",
                         {"nu0", "delta", "eps", "max_iters",
                          "median_weight_exp"});
      grid.pcm_config.nu0 = static_cast<Scalar>(p.value("nu0", 1.0));
      grid.pcm_config.delta = static_cast<Scalar>(p.value("delta", 0.1));
      if (p.contains("eps") && !p.at("eps").is_null())
        grid.pcm_config.epsilon = static_cast<Scalar>(p.at("eps").get<double>());
      grid.pcm_config.max_iters =
          static_cast<Index>(p.value("max_iters", 100LL));
      grid.pcm_config.median_weight_exponent =
          static_cast<int>(p.value("median_weight_exp", 1LL));
    }
    if (j.contains("fcm")) {
      const auto& p = j.at("fcm");
      detail::check_keys(p, "fcm config", {"m", "eps", "max_iters"});
      grid.fcm_config.m = static_cast<Scalar>(p.value("m", 2.0));
      if (p.contains("eps") && !p.at("eps").is_null())
        grid.fcm_config.epsilon = static_cast<Scalar>(p.at("eps").get<double>());
      grid.fcm_config.max_iters =
          static_cast<Index>(p.value("max_iters", 100LL));
    }
    if (j.contains("kmedians")) {
      const auto& p = j.at("kmedians");
      detail::check_keys(p, "kmedians config", {"eps", "max_iters"});
      if (p.contains("eps") && !p.at("eps").is_null())
        grid.kmedians_config.epsilon =
            static_cast<Scalar>(p.at("eps").get<double>());
      grid.kmedians_config.max_iters =
          static_cast<Index>(p.value("max_iters", 100LL));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("grid config: ") + e.what());
  }
  validate(grid);
  return grid;
}

}  // namespace l1pc::bench

#endif  // L1PC_BENCH_HPP
