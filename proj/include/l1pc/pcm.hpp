#ifndef L1PC_PCM_HPP
#define L1PC_PCM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "l1pc/common.hpp"
#include "l1pc/l1core.hpp"
#include "l1pc/membership.hpp"
#include "l1pc/random.hpp"

namespace l1pc::pcm {

template <class Scalar>
struct PcmConfig {
  Index k = 2;
  Scalar nu0 = 1;                  // initial assignment exponent
  Scalar delta = Scalar(0.1);      // exponent increment per iteration
  std::optional<Scalar> epsilon;   // movement stop; default 1e-6 * dimension
  Index max_iters = 100;
  int median_weight_exponent = 1;  // 1 or 2: median weights w_i * p_ik^e
  std::uint64_t seed = 0;
  std::optional<Matrix<Scalar>> init_centers;  // default: sampled data points
  int threads = 1;
};

template <class Scalar>
void validate(const PcmConfig<Scalar>& config, Index num_points, Index dim) {
  require(config.k >= 1, "cluster count must be at least 1");
  require(config.k <= num_points, "cluster count cannot exceed point count");
  require(std::isfinite(config.nu0) && config.nu0 >= Scalar(1),
          "initial exponent must be >= 1");
  require(std::isfinite(config.delta) && config.delta >= Scalar(0),
          "exponent increment must be >= 0");
  require(!config.epsilon || (std::isfinite(*config.epsilon) &&
                              *config.epsilon > Scalar(0)),
          "movement threshold must be positive");
  require(config.max_iters >= 1, "iteration cap must be at least 1");
  require(config.median_weight_exponent == 1 ||
              config.median_weight_exponent == 2,
          "median weight exponent must be 1 or 2");
  if (config.init_centers)
    require(config.init_centers->rows() == config.k &&
                config.init_centers->cols() == dim &&
                config.init_centers->allFinite(),
            "provided centers must be a finite K x n matrix");
}

template <class Scalar>
Scalar resolve_epsilon(const std::optional<Scalar>& epsilon, Index dim) {
  return epsilon ? *epsilon : Scalar(1e-6) * Scalar(dim);
}

// Deterministic spread seeding: the first pick is the data point farthest in
// l1 from the per-coordinate weighted median of the data, each later pick is
// the point farthest from its nearest already-chosen center. Ties keep the
// lowest index; picks can coincide only when the data has fewer than k
// distinct points.
template <class Scalar>
Matrix<Scalar> farthest_first_centers(const l1core::DataSet<Scalar>& data,
                                      Index k) {
  l1core::validate(data);
  require(k >= 1, "cluster count must be at least 1");
  require(k <= data.size(), "cluster count cannot exceed point count");
  const Index num_points = data.size();
  const Index n = data.dim();
  Vector<Scalar> reference(n);
  for (Index j = 0; j < n; ++j)
    reference(j) =
        l1core::weighted_median(data.points.col(j), data.weights).value;
  Vector<Scalar> nearest(num_points);
  for (Index i = 0; i < num_points; ++i)
    nearest(i) = l1core::l1_distance(data.points.row(i).transpose(), reference);
  Matrix<Scalar> centers(k, n);
  for (Index c = 0; c < k; ++c) {
    Index pick = 0;
    nearest.maxCoeff(&pick);
    centers.row(c) = data.points.row(pick);
    if (c + 1 == k) break;
    for (Index i = 0; i < num_points; ++i) {
      const Scalar d = l1core::l1_distance(data.points.row(i).transpose(),
                                           centers.row(c).transpose());
      nearest(i) = c == 0 ? d : std::min(nearest(i), d);
    }
  }
  return centers;
}

// One row per iteration of a fitting loop.
template <class Scalar>
struct IterationRecord {
  Scalar nu;               // assignment exponent used (inf = hard assignment)
  Scalar jdf;              // total joint distance value at the start centers
  Scalar soft_objective;   // sum_i w_i sum_k p_ik d_ik at the start centers
  Scalar hard_objective;   // sum_i w_i min_k d_ik at the start centers
  Scalar center_movement;  // sum_k d1(new center k, old center k)
  std::vector<Index> carried;  // clusters whose center was carried over
};

template <class Scalar>
struct IterationTrace {
  std::vector<IterationRecord<Scalar>> records;
};

template <class Scalar>
struct ClusteringResult {
  Matrix<Scalar> centers;  // K x n
  membership::MembershipMatrix<Scalar> memberships;  // at the final centers
  std::vector<Index> hard_labels;
  Index iterations_run = 0;
  IterationTrace<Scalar> trace;
  bool converged = false;
};

namespace detail {

using PermMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

// Per-coordinate ascending sort permutations of the data, built once per fit
// so every median step is a linear walk instead of a fresh sort.
template <class Scalar>
PermMatrix build_coordinate_order(const Matrix<Scalar>& points, int threads) {
  const Index num_points = points.rows();
  const Index n = points.cols();
  PermMatrix perm(num_points, n);
  l1pc::detail::parallel_blocks(n, threads, [&](Index begin, Index end) {
    std::vector<std::pair<Scalar, std::int32_t>> keyed(
        static_cast<std::size_t>(num_points));
    for (Index j = begin; j < end; ++j) {
      const Scalar* column = points.col(j).data();
      for (Index i = 0; i < num_points; ++i)
        keyed[static_cast<std::size_t>(i)] = {column[i],
                                              static_cast<std::int32_t>(i)};
      std::sort(keyed.begin(), keyed.end());
      std::int32_t* out = perm.col(j).data();
      for (Index i = 0; i < num_points; ++i)
        out[i] = keyed[static_cast<std::size_t>(i)].second;
    }
  });
  return perm;
}

// Center update against a prebuilt coordinate order. probs may contain exact
// zeros (underflown memberships); the median walk ignores zero weights. A
// cluster whose total weight is below the vanish threshold keeps its previous
// center and is reported in `carried`.
template <class Scalar>
Matrix<Scalar> update_centers_ordered(const l1core::DataSet<Scalar>& data,
                                      const Matrix<Scalar>& probs,
                                      int weight_exponent,
                                      const Matrix<Scalar>& previous_centers,
                                      const PermMatrix& perm, int threads,
                                      std::vector<Index>* carried_out) {
  const Index num_points = data.size();
  const Index n = data.dim();
  const Index k = probs.cols();
  Matrix<Scalar> centers(k, n);
  Matrix<Scalar> u(num_points, k);
  for (Index c = 0; c < k; ++c) {
    u.col(c) = data.weights.cwiseProduct(probs.col(c));
    if (weight_exponent == 2) u.col(c) = u.col(c).cwiseProduct(probs.col(c));
  }
  std::vector<char> live(static_cast<std::size_t>(k), 1);
  std::vector<Index> carried;
  for (Index c = 0; c < k; ++c) {
    NeumaierSum<Scalar> total;
    for (Index i = 0; i < num_points; ++i) total.add(u(i, c));
    if (!(total.value() >= Scalar(1e-300))) {
      live[static_cast<std::size_t>(c)] = 0;
      centers.row(c) = previous_centers.row(c);
      carried.push_back(c);
    }
  }
  l1pc::detail::parallel_blocks(n, threads, [&](Index begin, Index end) {
    for (Index j = begin; j < end; ++j) {
      const Scalar* column = data.points.col(j).data();
      const std::int32_t* order = perm.col(j).data();
      for (Index c = 0; c < k; ++c) {
        if (!live[static_cast<std::size_t>(c)]) continue;
        const Scalar* weight = u.col(c).data();
        const auto result = l1core::weighted_median_walk<Scalar>(
            num_points, [&](Index i) { return column[i]; },
            [&](Index i) { return weight[i]; },
            [&](Index s) { return static_cast<Index>(order[s]); });
        centers(c, j) = result.value;
      }
    }
  });
  if (carried_out) *carried_out = std::move(carried);
  return centers;
}

}  // namespace detail

// Centers row k gets, per coordinate, the weighted median of that coordinate
// over all points with weights w_i * p_ik^e. The K*n subproblems are
// independent. A cluster with vanished total weight keeps its previous
// center (reported through `carried`).
template <class Scalar, class DerivedP>
Matrix<Scalar> update_centers(const l1core::DataSet<Scalar>& data,
                              const membership::MembershipMatrix<Scalar>& memberships,
                              const PcmConfig<Scalar>& config,
                              const Eigen::MatrixBase<DerivedP>& previous_centers,
                              std::vector<Index>* carried = nullptr) {
  l1core::validate(data);
  const Matrix<Scalar> prev = previous_centers.derived();
  require(memberships.probs.rows() == data.size(),
          "update_centers: membership rows must match point count");
  require(memberships.probs.cols() == prev.rows() && prev.cols() == data.dim(),
          "update_centers: previous centers must be K x n");
  const auto perm = detail::build_coordinate_order(data.points, config.threads);
  return detail::update_centers_ordered(data, memberships.probs,
                                        config.median_weight_exponent, prev,
                                        perm, config.threads, carried);
}

// Per-row argmax; ties resolve to the lowest cluster index.
template <class Scalar>
std::vector<Index> hard_assign(const membership::MembershipMatrix<Scalar>& memberships) {
  const Index num_points = memberships.probs.rows();
  const Index k = memberships.probs.cols();
  require(k >= 1, "hard_assign: no clusters");
  std::vector<Index> labels(static_cast<std::size_t>(num_points));
  for (Index i = 0; i < num_points; ++i) {
    Index best = 0;
    for (Index c = 1; c < k; ++c)
      if (memberships.probs(i, c) > memberships.probs(i, best)) best = c;
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

namespace detail {

template <class Scalar>
Scalar soft_objective(const Matrix<Scalar>& distances,
                      const Matrix<Scalar>& probs,
                      const Vector<Scalar>& weights) {
  NeumaierSum<Scalar> acc;
  for (Index i = 0; i < distances.rows(); ++i) {
    Scalar row = 0;
    for (Index c = 0; c < distances.cols(); ++c)
      row += probs(i, c) * distances(i, c);
    acc.add(weights(i) * row);
  }
  return acc.value();
}

template <class Scalar>
Scalar hard_objective(const Matrix<Scalar>& distances,
                      const Vector<Scalar>& weights) {
  NeumaierSum<Scalar> acc;
  for (Index i = 0; i < distances.rows(); ++i)
    acc.add(weights(i) * distances.row(i).minCoeff());
  return acc.value();
}

template <class Scalar>
Matrix<Scalar> initial_centers(const l1core::DataSet<Scalar>& data, Index k,
                               std::uint64_t seed,
                               const std::optional<Matrix<Scalar>>& provided) {
  if (provided) return *provided;
  Engine engine(seed);
  const auto rows = sample_without_replacement(engine, data.size(), k);
  Matrix<Scalar> centers(k, data.dim());
  for (Index c = 0; c < k; ++c) centers.row(c) = data.points.row(rows[static_cast<std::size_t>(c)]);
  return centers;
}

}  // namespace detail

// Probabilistic l1 clustering: alternate power-probability assignments and
// per-coordinate weighted-median center updates, raising the assignment
// exponent by delta whenever the loop continues. Each iteration records the
// exponent, the joint distance total, soft and hard objectives at its
// starting centers, and the center movement produced by its update. Final
// memberships and labels are recomputed at the final centers.
template <class Scalar>
ClusteringResult<Scalar> pcm_fit(const l1core::DataSet<Scalar>& data,
                                 const PcmConfig<Scalar>& config) {
  l1core::validate(data);
  validate(config, data.size(), data.dim());
  const Index n = data.dim();
  const Scalar epsilon = resolve_epsilon(config.epsilon, n);

  ClusteringResult<Scalar> result;
  Matrix<Scalar> centers = detail::initial_centers(data, config.k, config.seed,
                                                   config.init_centers);
  const auto perm = detail::build_coordinate_order(data.points, config.threads);
  Scalar nu = config.nu0;
  result.trace.records.reserve(static_cast<std::size_t>(config.max_iters));
  for (Index it = 1; it <= config.max_iters; ++it) {
    if (it > 1) nu += config.delta;
    const auto distances = l1core::distance_matrix(data.points, centers);
    const auto memberships =
        membership::membership_matrix(distances, nu, config.threads);

    IterationRecord<Scalar> record;
    record.nu = nu;
    record.jdf = membership::jdf_dataset(distances, data.weights).total;
    record.soft_objective =
        detail::soft_objective(distances, memberships.probs, data.weights);
    record.hard_objective = detail::hard_objective(distances, data.weights);

    Matrix<Scalar> next = detail::update_centers_ordered(
        data, memberships.probs, config.median_weight_exponent, centers, perm,
        config.threads, &record.carried);
    NeumaierSum<Scalar> movement;
    for (Index c = 0; c < config.k; ++c)
      movement.add(l1core::l1_distance(next.row(c), centers.row(c)));
    record.center_movement = movement.value();
    result.trace.records.push_back(std::move(record));

    centers = std::move(next);
    result.iterations_run = it;
    if (result.trace.records.back().center_movement < epsilon) {
      result.converged = true;
      break;
    }
  }
  result.centers = std::move(centers);
  const auto final_distances = l1core::distance_matrix(data.points, result.centers);
  result.memberships =
      membership::membership_matrix(final_distances, nu, config.threads);
  result.hard_labels = hard_assign(result.memberships);
  return result;
}

}  // namespace l1pc::pcm

#endif  // L1PC_PCM_HPP
