#ifndef L1PC_MEMBERSHIP_HPP
#define L1PC_MEMBERSHIP_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "l1pc/common.hpp"
#include "l1pc/l1core.hpp"

namespace l1pc::membership {

// Entry (i, k) holds the l1 distance from point i to center k.
template <class Scalar>
using DistanceMatrix = Matrix<Scalar>;

// N x K matrix of cluster membership probabilities together with the
// exponent that produced them (+inf marks hard one-hot assignments).
template <class Scalar>
struct MembershipMatrix {
  Matrix<Scalar> probs;
  Scalar nu;
};

// Per-point merit values and their total over the dataset.
template <class Scalar>
struct JdfVector {
  Vector<Scalar> per_point;
  Scalar total;
};

// Fills out[0..k) with probabilities proportional to d[j]^(-exponent).
// This single kernel backs both the power probabilities (exponent = nu) and
// the fuzzy-clustering weights (exponent = 2/(m-1)): both are inverse-power
// normalizations of the same distance row.
//
// Evaluated as exp(-exponent*log(d_j/d_min)) so the largest term is exactly
// one and no product over the row can overflow or underflow, even for k up
// to hundreds, exponents up to 1e4, and distances spanning 1e+-100. The
// normalizer is summed in ascending order of the terms, which makes every
// output entry depend only on its own distance and on the multiset of
// distances — permuting the row permutes the result bit for bit.
//
// Rows containing zeros take the limit: the zero-distance entries split the
// whole row equally and every other entry is 0.
template <class Scalar>
void inverse_power_row(const Scalar* d, Index k, Scalar exponent, Scalar* out) {
  require(k >= 1, "inverse_power_row: empty distance row");
  Index zeros = 0;
  for (Index j = 0; j < k; ++j) {
    require(std::isfinite(d[j]) && d[j] >= Scalar(0),
            "distances must be finite and nonnegative");
    if (d[j] == Scalar(0)) ++zeros;
  }
  if (zeros > 0) {
    const Scalar share = Scalar(1) / Scalar(zeros);
    for (Index j = 0; j < k; ++j)
      out[j] = d[j] == Scalar(0) ? share : Scalar(0);
    return;
  }
  Scalar d_min = d[0];
  for (Index j = 1; j < k; ++j) d_min = std::min(d_min, d[j]);
  for (Index j = 0; j < k; ++j)
    out[j] = std::exp(-exponent * std::log(d[j] / d_min));
  std::vector<Scalar> terms(out, out + k);
  std::sort(terms.begin(), terms.end());
  Scalar normalizer = 0;
  for (const Scalar t : terms) normalizer += t;
  for (Index j = 0; j < k; ++j) out[j] /= normalizer;
}

// Membership probabilities of one point from its distance row: p_k
// proportional to the product of the other clusters' distances raised to nu,
// i.e. p_k proportional to d_k^(-nu) after dividing out the common product.
// Accepts any vector expression; it is evaluated once up front.
template <class Derived>
Vector<typename Derived::Scalar> membership_probabilities(
    const Eigen::MatrixBase<Derived>& distances, typename Derived::Scalar nu) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> d = distances.derived();
  require(d.size() >= 1, "membership_probabilities: empty row");
  require(std::isfinite(nu) && nu >= Scalar(1),
          "membership_probabilities: exponent must be >= 1");
  Vector<Scalar> row(d.size());
  inverse_power_row(d.data(), d.size(), nu, row.data());
  return row;
}

// Row-wise membership probabilities for a whole distance matrix. Rows are
// independent, so blocks of rows may run on separate threads with results
// identical to the sequential evaluation.
template <class Scalar>
MembershipMatrix<Scalar> membership_matrix(const DistanceMatrix<Scalar>& distances,
                                           Scalar nu, int threads = 1) {
  require(distances.cols() >= 1, "membership_matrix: no clusters");
  require(std::isfinite(nu) && nu >= Scalar(1),
          "membership_matrix: exponent must be >= 1");
  const Index num_points = distances.rows();
  const Index k = distances.cols();
  MembershipMatrix<Scalar> result;
  result.nu = nu;
  result.probs.resize(num_points, k);
  detail::parallel_blocks(num_points, threads, [&](Index begin, Index end) {
    std::vector<Scalar> d(static_cast<std::size_t>(k));
    std::vector<Scalar> p(static_cast<std::size_t>(k));
    for (Index i = begin; i < end; ++i) {
      for (Index c = 0; c < k; ++c) d[static_cast<std::size_t>(c)] = distances(i, c);
      inverse_power_row(d.data(), k, nu, p.data());
      for (Index c = 0; c < k; ++c) result.probs(i, c) = p[static_cast<std::size_t>(c)];
    }
  });
  return result;
}

// Joint distance value of one point: weight divided by the sum of reciprocal
// distances, i.e. weight/K times the harmonic mean of the distances. A zero
// distance gives 0 by continuity.
template <class Derived>
typename Derived::Scalar jdf_point(const Eigen::MatrixBase<Derived>& distances,
                                   typename Derived::Scalar weight) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> row = distances.derived();
  require(row.size() >= 1, "jdf_point: empty row");
  require(std::isfinite(weight) && weight > Scalar(0),
          "jdf_point: weight must be finite and positive");
  NeumaierSum<Scalar> recip;
  for (Index j = 0; j < row.size(); ++j) {
    const Scalar d = row(j);
    require(std::isfinite(d) && d >= Scalar(0),
            "jdf_point: distances must be finite and nonnegative");
    if (d == Scalar(0)) return Scalar(0);
    recip.add(Scalar(1) / d);
  }
  return weight / recip.value();
}

// Per-point joint distance values plus their total: the merit function whose
// decrease the clustering iteration traces.
template <class DerivedD, class DerivedW>
JdfVector<typename DerivedD::Scalar> jdf_dataset(
    const Eigen::MatrixBase<DerivedD>& distances,
    const Eigen::MatrixBase<DerivedW>& weights) {
  using Scalar = typename DerivedD::Scalar;
  require(distances.rows() == weights.size(),
          "jdf_dataset: weight count must match row count");
  const Vector<Scalar> w = weights.derived();
  JdfVector<Scalar> result;
  result.per_point.resize(distances.rows());
  NeumaierSum<Scalar> total;
  Vector<Scalar> row(distances.cols());
  for (Index i = 0; i < distances.rows(); ++i) {
    row = distances.derived().row(i).transpose();
    const Scalar v = jdf_point(row, w(i));
    result.per_point(i) = v;
    total.add(v);
  }
  result.total = total.value();
  return result;
}

// Inverse-distance-weighted interpolation: convex combination of `values`
// with the nu = 1 membership probabilities as coefficients. Interpolates
// exactly at zero distance.
template <class DerivedD, class DerivedV>
typename DerivedD::Scalar idw_interpolate(
    const Eigen::MatrixBase<DerivedD>& distances,
    const Eigen::MatrixBase<DerivedV>& values) {
  using Scalar = typename DerivedD::Scalar;
  require(distances.size() == values.size(),
          "idw_interpolate: length mismatch");
  const Vector<Scalar> lambda = membership_probabilities(distances, Scalar(1));
  const Vector<Scalar> v = values.derived();
  NeumaierSum<Scalar> acc;
  for (Index j = 0; j < v.size(); ++j) acc.add(lambda(j) * v(j));
  return acc.value();
}

}  // namespace l1pc::membership

#endif  // L1PC_MEMBERSHIP_HPP
