#ifndef L1PC_BASELINES_HPP
#define L1PC_BASELINES_HPP

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
#include "l1pc/pcm.hpp"

namespace l1pc::baselines {

template <class Scalar>
struct FcmConfig {
  Index k = 2;
  Scalar m = 2;  // fuzzifier, > 1
  Index max_iters = 100;
  std::optional<Scalar> epsilon;  // movement stop; default 1e-6 * dimension
  std::uint64_t seed = 0;
  std::optional<Matrix<Scalar>> init_centers;
  int threads = 1;
};

template <class Scalar>
void validate(const FcmConfig<Scalar>& config, Index num_points, Index dim) {
  require(config.k >= 1, "cluster count must be at least 1");
  require(config.k <= num_points, "cluster count cannot exceed point count");
  require(std::isfinite(config.m) && config.m > Scalar(1),
          "fuzzifier must be > 1");
  require(!config.epsilon || (std::isfinite(*config.epsilon) &&
                              *config.epsilon > Scalar(0)),
          "movement threshold must be positive");
  require(config.max_iters >= 1, "iteration cap must be at least 1");
  if (config.init_centers)
    require(config.init_centers->rows() == config.k &&
                config.init_centers->cols() == dim &&
                config.init_centers->allFinite(),
            "provided centers must be a finite K x n matrix");
}

// Fuzzy assignment weights: w_ik = 1 / sum_j (d_ik/d_ij)^(2/(m-1)), the
// inverse-power normalization of the distance row with exponent 2/(m-1).
// Rows sum to 1; a zero distance makes its clusters split the row equally.
template <class Scalar>
Matrix<Scalar> fcm_weights(const Matrix<Scalar>& distances, Scalar m,
                           int threads = 1) {
  require(std::isfinite(m) && m > Scalar(1), "fcm_weights: fuzzifier must be > 1");
  require(distances.cols() >= 1, "fcm_weights: no clusters");
  const Scalar exponent = Scalar(2) / (m - Scalar(1));
  const Index num_points = distances.rows();
  const Index k = distances.cols();
  Matrix<Scalar> weights(num_points, k);
  l1pc::detail::parallel_blocks(num_points, threads, [&](Index begin, Index end) {
    std::vector<Scalar> d(static_cast<std::size_t>(k));
    std::vector<Scalar> w(static_cast<std::size_t>(k));
    for (Index i = begin; i < end; ++i) {
      for (Index c = 0; c < k; ++c) d[static_cast<std::size_t>(c)] = distances(i, c);
      membership::inverse_power_row(d.data(), k, exponent, w.data());
      for (Index c = 0; c < k; ++c) weights(i, c) = w[static_cast<std::size_t>(c)];
    }
  });
  return weights;
}

// Fuzzy c-means in the l1 geometry: assignment weights from fcm_weights,
// centers as per-coordinate weighted medians with weights w_i * w_ik^m (the
// l1 minimizer of the fuzzy objective for fixed weights). The trace's
// exponent column records 2/(m-1), the inverse-power exponent actually used.
template <class Scalar>
pcm::ClusteringResult<Scalar> fcm_fit(const l1core::DataSet<Scalar>& data,
                                      const FcmConfig<Scalar>& config) {
  l1core::validate(data);
  validate(config, data.size(), data.dim());
  const Index n = data.dim();
  const Scalar epsilon = pcm::resolve_epsilon(config.epsilon, n);
  const Scalar exponent = Scalar(2) / (config.m - Scalar(1));

  pcm::ClusteringResult<Scalar> result;
  Matrix<Scalar> centers = pcm::detail::initial_centers(
      data, config.k, config.seed, config.init_centers);
  const auto perm =
      pcm::detail::build_coordinate_order(data.points, config.threads);
  result.trace.records.reserve(static_cast<std::size_t>(config.max_iters));
  Matrix<Scalar> fuzzy_pow(data.size(), config.k);
  for (Index it = 1; it <= config.max_iters; ++it) {
    const auto distances = l1core::distance_matrix(data.points, centers);
    const Matrix<Scalar> weights =
        fcm_weights(distances, config.m, config.threads);

    pcm::IterationRecord<Scalar> record;
    record.nu = exponent;
    record.jdf = membership::jdf_dataset(distances, data.weights).total;
    record.soft_objective =
        pcm::detail::soft_objective(distances, weights, data.weights);
    record.hard_objective =
        pcm::detail::hard_objective(distances, data.weights);

    fuzzy_pow = weights.array().pow(config.m).matrix();
    Matrix<Scalar> next = pcm::detail::update_centers_ordered(
        data, fuzzy_pow, 1, centers, perm, config.threads, &record.carried);
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
  const auto final_distances =
      l1core::distance_matrix(data.points, result.centers);
  result.memberships.probs =
      fcm_weights(final_distances, config.m, config.threads);
  result.memberships.nu = exponent;
  result.hard_labels = pcm::hard_assign(result.memberships);
  return result;
}

template <class Scalar>
struct KmediansConfig {
  Index k = 2;
  Index max_iters = 100;
  std::optional<Scalar> epsilon;  // movement stop; default 1e-6 * dimension
  std::uint64_t seed = 0;
  std::optional<Matrix<Scalar>> init_centers;
  int threads = 1;
};

template <class Scalar>
void validate(const KmediansConfig<Scalar>& config, Index num_points,
              Index dim) {
  require(config.k >= 1, "cluster count must be at least 1");
  require(config.k <= num_points, "cluster count cannot exceed point count");
  require(!config.epsilon || (std::isfinite(*config.epsilon) &&
                              *config.epsilon > Scalar(0)),
          "movement threshold must be positive");
  require(config.max_iters >= 1, "iteration cap must be at least 1");
  if (config.init_centers)
    require(config.init_centers->rows() == config.k &&
                config.init_centers->cols() == dim &&
                config.init_centers->allFinite(),
            "provided centers must be a finite K x n matrix");
}

namespace detail {

template <class Scalar>
std::vector<Index> nearest_center_labels(const Matrix<Scalar>& distances) {
  std::vector<Index> labels(static_cast<std::size_t>(distances.rows()));
  for (Index i = 0; i < distances.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < distances.cols(); ++c)
      if (distances(i, c) < distances(i, best)) best = c;
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

}  // namespace detail

// Lloyd-style K-medians in l1: hard-assign each point to its nearest center
// (ties to the lowest index), recompute each center as the per-coordinate
// weighted median of its points, stop on stable labels, small movement, or
// the iteration cap. An emptied cluster keeps its previous center. The
// trace's exponent column is +inf: assignments are hard.
template <class Scalar>
pcm::ClusteringResult<Scalar> kmedians_fit(const l1core::DataSet<Scalar>& data,
                                           const KmediansConfig<Scalar>& config) {
  l1core::validate(data);
  validate(config, data.size(), data.dim());
  const Index n = data.dim();
  const Index num_points = data.size();
  const Scalar epsilon = pcm::resolve_epsilon(config.epsilon, n);
  const Scalar hard_nu = std::numeric_limits<Scalar>::infinity();

  pcm::ClusteringResult<Scalar> result;
  Matrix<Scalar> centers = pcm::detail::initial_centers(
      data, config.k, config.seed, config.init_centers);
  const auto perm =
      pcm::detail::build_coordinate_order(data.points, config.threads);
  result.trace.records.reserve(static_cast<std::size_t>(config.max_iters));
  std::vector<Index> labels;
  Matrix<Scalar> onehot(num_points, config.k);
  for (Index it = 1; it <= config.max_iters; ++it) {
    const auto distances = l1core::distance_matrix(data.points, centers);
    std::vector<Index> next_labels = detail::nearest_center_labels(distances);

    pcm::IterationRecord<Scalar> record;
    record.nu = hard_nu;
    record.jdf = membership::jdf_dataset(distances, data.weights).total;
    record.hard_objective =
        pcm::detail::hard_objective(distances, data.weights);
    record.soft_objective = record.hard_objective;  // one-hot assignments

    if (it > 1 && next_labels == labels) {
      record.center_movement = Scalar(0);
      result.trace.records.push_back(std::move(record));
      result.iterations_run = it;
      result.converged = true;
      break;
    }
    labels = std::move(next_labels);
    onehot.setZero();
    for (Index i = 0; i < num_points; ++i)
      onehot(i, labels[static_cast<std::size_t>(i)]) = Scalar(1);

    Matrix<Scalar> next = pcm::detail::update_centers_ordered(
        data, onehot, 1, centers, perm, config.threads, &record.carried);
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
  const auto final_distances =
      l1core::distance_matrix(data.points, result.centers);
  result.hard_labels = detail::nearest_center_labels(final_distances);
  result.memberships.nu = hard_nu;
  result.memberships.probs.setZero(num_points, config.k);
  for (Index i = 0; i < num_points; ++i)
    result.memberships.probs(i, result.hard_labels[static_cast<std::size_t>(i)]) =
        Scalar(1);
  return result;
}

}  // namespace l1pc::baselines

#endif  // L1PC_BASELINES_HPP
