#ifndef L1PC_L1CORE_HPP
#define L1PC_L1CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <type_traits>
#include <utility>
#include <vector>

#include "l1pc/common.hpp"

namespace l1pc::l1core {

// N weighted points in R^n, one point per row. Column-major storage keeps
// per-coordinate access contiguous, which everything downstream leans on.
template <class Scalar>
struct DataSet {
  Matrix<Scalar> points;   // N x n
  Vector<Scalar> weights;  // length N, strictly positive

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

template <class Scalar>
void validate(const DataSet<Scalar>& data) {
  require(data.points.rows() >= 1 && data.points.cols() >= 1,
          "dataset needs at least one point and one coordinate");
  require(data.weights.size() == data.points.rows(),
          "weight count must equal point count");
  require(data.points.allFinite(), "point coordinates must be finite");
  require(data.weights.allFinite() &&
              (data.weights.array() > Scalar(0)).all(),
          "point weights must be finite and strictly positive");
}

template <class DerivedA, class DerivedB>
typename DerivedA::Scalar l1_distance(const Eigen::MatrixBase<DerivedA>& a,
                                      const Eigen::MatrixBase<DerivedB>& b) {
  require(a.size() == b.size(), "l1_distance: length mismatch");
  return (a.derived() - b.derived()).cwiseAbs().sum();
}

// N x K matrix of l1 distances between every point (row of `points`) and every
// center (row of `centers`). Accumulated coordinate by coordinate so each
// column of the point matrix streams exactly once per center.
template <class Scalar>
Matrix<Scalar> distance_matrix(const Matrix<Scalar>& points,
                               const Matrix<Scalar>& centers) {
  require(points.cols() == centers.cols(),
          "distance_matrix: dimension mismatch between points and centers");
  const Index num_points = points.rows();
  const Index k = centers.rows();
  const Index n = points.cols();
  Matrix<Scalar> d = Matrix<Scalar>::Zero(num_points, k);
  for (Index j = 0; j < n; ++j) {
    const Scalar* column = points.col(j).data();
    for (Index c = 0; c < k; ++c) {
      const Scalar center_j = centers(c, j);
      Scalar* out = d.col(c).data();
      for (Index i = 0; i < num_points; ++i)
        out[i] += std::abs(column[i] - center_j);
    }
  }
  return d;
}

template <class Scalar>
struct WeightedMedianResult {
  Scalar value;       // a minimizer of the weighted absolute-deviation sum
  Index lower_index;  // position in the sorted order of the (lower) median
  Scalar alpha;       // weight split assigned to the left part of the median
  Scalar beta;        // weight split assigned to the right part
  bool is_interval;   // true when every point of a flat interval minimizes
};

// Core walk shared by the plain entry point below and by callers that keep
// their own presorted permutations. `order_at(s)` must enumerate a
// permutation of [0, m) that sorts values ascending (ties in any order).
// Entries with zero weight are tolerated and never selected; they cannot
// change the minimizer set.
//
// The walk groups equal values and tracks the cumulative-weight ratio; the
// first group whose ratio reaches 1/2 holds the median. A ratio of exactly
// 1/2 (within a 1e-12 relative tolerance absorbing accumulation error) means
// the objective is flat up to the next value, and the midpoint is reported
// with is_interval set.
template <class Scalar, class ValueAt, class WeightAt, class OrderAt>
WeightedMedianResult<Scalar> weighted_median_walk(Index m, ValueAt&& value_at,
                                                  WeightAt&& weight_at,
                                                  OrderAt&& order_at) {
  NeumaierSum<Scalar> total;
  for (Index s = 0; s < m; ++s) total.add(weight_at(order_at(s)));
  const Scalar w_total = total.value();
  const Scalar half = Scalar(0.5) * w_total;
  const Scalar tol = Scalar(1e-12) * w_total;

  NeumaierSum<Scalar> cum;
  Index s = 0;
  while (s < m) {
    const Scalar v = value_at(order_at(s));
    const Scalar below = cum.value();
    Index e = s;
    while (e < m && value_at(order_at(e)) == v) {
      cum.add(weight_at(order_at(e)));
      ++e;
    }
    const Scalar upto = cum.value();
    if (upto >= half - tol) {
      WeightedMedianResult<Scalar> result;
      result.lower_index = s;
      if (upto <= half + tol && e < m) {
        const Scalar next = value_at(order_at(e));
        result.value = (v + next) / Scalar(2);
        result.alpha = Scalar(0);
        result.beta = Scalar(0);
        result.is_interval = true;
      } else {
        result.value = v;
        result.alpha = std::max(Scalar(0), half - below);
        result.beta = std::max(Scalar(0), upto - half);
        result.is_interval = false;
      }
      return result;
    }
    s = e;
  }
  throw std::logic_error("weighted_median: cumulative weight never reached 1/2");
}

namespace detail {

template <class Scalar>
void check_median_inputs(const Vector<Scalar>& values,
                         const Vector<Scalar>& weights) {
  require(values.size() >= 1, "weighted_median: empty input");
  require(values.size() == weights.size(),
          "weighted_median: values/weights length mismatch");
  require(values.allFinite(), "weighted_median: values must be finite");
  require(weights.allFinite() && (weights.array() > Scalar(0)).all(),
          "weighted_median: weights must be finite and strictly positive");
}

}  // namespace detail

// Exact weighted median: a minimizer of sum_i weights[i]*|values[i] - c|.
// Deterministic for any input ordering: ties in values sort stably by
// original index, and all accumulation is compensated. Accepts any vector
// expressions; both are evaluated once up front.
template <class DerivedV, class DerivedW>
WeightedMedianResult<typename DerivedV::Scalar> weighted_median(
    const Eigen::MatrixBase<DerivedV>& values,
    const Eigen::MatrixBase<DerivedW>& weights) {
  using Scalar = typename DerivedV::Scalar;
  static_assert(std::is_same_v<Scalar, typename DerivedW::Scalar>,
                "values and weights must share a scalar type");
  const Vector<Scalar> v = values.derived();
  const Vector<Scalar> w = weights.derived();
  detail::check_median_inputs(v, w);
  const Index m = v.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return v(a) < v(b); });
  return weighted_median_walk<Scalar>(
      m, [&](Index i) { return v(i); }, [&](Index i) { return w(i); },
      [&](Index s) { return order[static_cast<std::size_t>(s)]; });
}

template <class DerivedV, class DerivedW>
typename DerivedV::Scalar weighted_median_objective(
    const Eigen::MatrixBase<DerivedV>& values,
    const Eigen::MatrixBase<DerivedW>& weights, typename DerivedV::Scalar c) {
  using Scalar = typename DerivedV::Scalar;
  const Vector<Scalar> v = values.derived();
  const Vector<Scalar> w = weights.derived();
  detail::check_median_inputs(v, w);
  NeumaierSum<Scalar> acc;
  for (Index i = 0; i < v.size(); ++i) acc.add(w(i) * std::abs(v(i) - c));
  return acc.value();
}

}  // namespace l1pc::l1core

#endif  // L1PC_L1CORE_HPP
