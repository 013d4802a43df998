#ifndef L1PC_COMMON_HPP
#define L1PC_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <vector>

namespace l1pc {

using Index = Eigen::Index;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// K x n matrix of cluster centers, one center per row.
template <class Scalar>
using CenterSet = Matrix<Scalar>;

inline void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

// Neumaier compensated accumulator. Keeps long prefix sums accurate enough
// that cumulative-weight ratios stay within the 1e-12 comparison tolerance
// for N in the thousands.
template <class Scalar>
class NeumaierSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_ = 0;
  Scalar comp_ = 0;
};

template <class Scalar, class Range>
Scalar compensated_sum(const Range& xs) {
  NeumaierSum<Scalar> acc;
  for (const auto& x : xs) acc.add(static_cast<Scalar>(x));
  return acc.value();
}

namespace detail {

// Runs fn(begin, end) over a block partition of [0, count). Each block writes
// disjoint state only, so results do not depend on the schedule.
template <class Fn>
void parallel_blocks(Index count, int threads, Fn&& fn) {
  if (count <= 0) return;
  const int usable =
      static_cast<int>(std::min<Index>(count, threads < 1 ? 1 : threads));
  if (usable <= 1) {
    fn(Index(0), count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(usable);
  const Index chunk = (count + usable - 1) / usable;
  for (int t = 0; t < usable; ++t) {
    const Index begin = Index(t) * chunk;
    const Index end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

}  // namespace l1pc

#endif  // L1PC_COMMON_HPP
