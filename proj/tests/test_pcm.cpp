#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "l1pc/l1core.hpp"
#include "l1pc/pcm.hpp"
#include "l1pc/random.hpp"

using l1pc::Engine;
using l1pc::Index;
using l1pc::Matrix;
using l1pc::Vector;
namespace l1core = l1pc::l1core;
namespace mem = l1pc::membership;
namespace pcm = l1pc::pcm;

namespace {

l1core::DataSet<double> random_dataset(Engine& eng, Index num_points, Index dim,
                                    double lo = -3, double hi = 3) {
  l1core::DataSet<double> data;
  data.points.resize(num_points, dim);
  for (Index i = 0; i < num_points; ++i)
    for (Index j = 0; j < dim; ++j)
      data.points(i, j) = l1pc::uniform_in(eng, lo, hi);
  data.weights = Vector<double>::Ones(num_points);
  return data;
}

// Two 1-D groups around -mu and +mu with uniform jitter.
l1core::DataSet<double> two_groups(Engine& eng, Index per_group, double mu,
                                   double jitter) {
  l1core::DataSet<double> data;
  data.points.resize(2 * per_group, 1);
  for (Index i = 0; i < per_group; ++i)
    data.points(i, 0) = -mu + l1pc::uniform_in(eng, -jitter, jitter);
  for (Index i = per_group; i < 2 * per_group; ++i)
    data.points(i, 0) = mu + l1pc::uniform_in(eng, -jitter, jitter);
  data.weights = Vector<double>::Ones(2 * per_group);
  return data;
}

double coordinate_objective(const l1core::DataSet<double>& data,
                            const Matrix<double>& probs, int exponent, Index c,
                            Index j, double theta) {
  double total = 0;
  for (Index i = 0; i < data.size(); ++i) {
    double u = data.weights(i) * probs(i, c);
    if (exponent == 2) u *= probs(i, c);
    total += u * std::fabs(data.points(i, j) - theta);
  }
  return total;
}

// Bitwise equality via the raw storage (shapes must match).
bool matrices_identical(const Matrix<double>& a, const Matrix<double>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     sizeof(double) * std::size_t(a.size())) == 0;
}

bool traces_equal(const pcm::IterationTrace<double>& a,
                  const pcm::IterationTrace<double>& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    const auto& x = a.records[t];
    const auto& y = b.records[t];
    if (std::memcmp(&x.nu, &y.nu, sizeof x.nu) != 0) return false;
    if (std::memcmp(&x.jdf, &y.jdf, sizeof x.jdf) != 0) return false;
    if (std::memcmp(&x.soft_objective, &y.soft_objective, sizeof x.soft_objective) != 0)
      return false;
    if (std::memcmp(&x.hard_objective, &y.hard_objective, sizeof x.hard_objective) != 0)
      return false;
    if (std::memcmp(&x.center_movement, &y.center_movement,
                    sizeof x.center_movement) != 0)
      return false;
    if (x.carried != y.carried) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("update_centers with one cluster is the plain weighted median") {
  Engine eng(40);
  auto data = random_dataset(eng, 23, 4);
  for (Index i = 0; i < data.size(); ++i)
    data.weights(i) = l1pc::uniform_in(eng, 0.2, 3);
  mem::MembershipMatrix<double> ones{Matrix<double>::Ones(23, 1), 1.0};
  pcm::PcmConfig<double> config;
  config.k = 1;
  const Matrix<double> prev = Matrix<double>::Zero(1, 4);
  const auto centers = pcm::update_centers(data, ones, config, prev);
  for (Index j = 0; j < 4; ++j) {
    const Vector<double> column = data.points.col(j);
    const auto direct = l1core::weighted_median(column, data.weights);
    CHECK(centers(0, j) == direct.value);
  }
}

TEST_CASE("identity memberships reproduce the points") {
  Matrix<double> points(2, 3);
  points << 1, 2, 3, -4, 0, 7;
  l1core::DataSet<double> data{points, Vector<double>::Ones(2)};
  mem::MembershipMatrix<double> identity{Matrix<double>::Identity(2, 2), 1.0};
  pcm::PcmConfig<double> config;
  config.k = 2;
  const auto centers =
      pcm::update_centers(data, identity, config, Matrix<double>::Zero(2, 3));
  CHECK(matrices_identical(centers, points));
}

TEST_CASE("updated centers minimize every per-coordinate objective") {
  Engine eng(41);
  for (int exponent : {1, 2}) {
    for (int rep = 0; rep < 40; ++rep) {
      const Index num_points = 5;
      auto data = random_dataset(eng, num_points, 3);
      for (Index i = 0; i < num_points; ++i)
        data.weights(i) = l1pc::uniform_in(eng, 0.1, 2);
      Matrix<double> probs(num_points, 2);
      for (Index i = 0; i < num_points; ++i) {
        const double p = l1pc::uniform_in(eng, 0.01, 0.99);
        probs(i, 0) = p;
        probs(i, 1) = 1 - p;
      }
      pcm::PcmConfig<double> config;
      config.k = 2;
      config.median_weight_exponent = exponent;
      mem::MembershipMatrix<double> m{probs, 1.0};
      const auto centers =
          pcm::update_centers(data, m, config, Matrix<double>::Zero(2, 3));
      for (Index c = 0; c < 2; ++c) {
        for (Index j = 0; j < 3; ++j) {
          double best = std::numeric_limits<double>::infinity();
          for (Index i = 0; i < num_points; ++i)
            best = std::min(best, coordinate_objective(data, probs, exponent, c,
                                                       j, data.points(i, j)));
          const double at_center = coordinate_objective(data, probs, exponent,
                                                        c, j, centers(c, j));
          CHECK(at_center <= best + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("a cluster with vanished weight keeps its previous center") {
  Engine eng(42);
  auto data = random_dataset(eng, 8, 2);
  Matrix<double> probs(8, 2);
  probs.col(0).setOnes();
  probs.col(1).setZero();
  mem::MembershipMatrix<double> m{probs, 1.0};
  pcm::PcmConfig<double> config;
  config.k = 2;
  Matrix<double> prev(2, 2);
  prev << 0, 0, 41.5, -7.25;
  std::vector<Index> carried;
  const auto centers = pcm::update_centers(data, m, config, prev, &carried);
  REQUIRE(carried.size() == 1);
  CHECK(carried[0] == 1);
  CHECK(centers(1, 0) == 41.5);
  CHECK(centers(1, 1) == -7.25);
  const auto live = l1core::weighted_median(data.points.col(0), data.weights);
  CHECK(centers(0, 0) == live.value);
}

TEST_CASE("update_centers validates shapes") {
  Engine eng(43);
  auto data = random_dataset(eng, 6, 2);
  pcm::PcmConfig<double> config;
  config.k = 2;
  mem::MembershipMatrix<double> wrong_rows{Matrix<double>::Ones(5, 2), 1.0};
  CHECK_THROWS_AS((void)pcm::update_centers(data, wrong_rows, config,
                                            Matrix<double>::Zero(2, 2)),
                  std::invalid_argument);
  mem::MembershipMatrix<double> ok{Matrix<double>::Ones(6, 2) * 0.5, 1.0};
  CHECK_THROWS_AS((void)pcm::update_centers(data, ok, config,
                                            Matrix<double>::Zero(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("config validation") {
  pcm::PcmConfig<double> config;
  config.k = 5;
  CHECK_THROWS_AS(pcm::validate(config, 4, 2), std::invalid_argument);
  config.k = 2;
  config.nu0 = 0.5;
  CHECK_THROWS_AS(pcm::validate(config, 10, 2), std::invalid_argument);
  config.nu0 = 1;
  config.delta = -0.1;
  CHECK_THROWS_AS(pcm::validate(config, 10, 2), std::invalid_argument);
  config.delta = 0;
  config.epsilon = 0.0;
  CHECK_THROWS_AS(pcm::validate(config, 10, 2), std::invalid_argument);
  config.epsilon.reset();
  config.median_weight_exponent = 3;
  CHECK_THROWS_AS(pcm::validate(config, 10, 2), std::invalid_argument);
  config.median_weight_exponent = 1;
  config.init_centers = Matrix<double>::Zero(2, 3);
  CHECK_THROWS_AS(pcm::validate(config, 10, 2), std::invalid_argument);
  config.init_centers = Matrix<double>::Zero(2, 2);
  CHECK_NOTHROW(pcm::validate(config, 10, 2));
  CHECK(pcm::resolve_epsilon<double>(std::nullopt, 500) == 5e-4);
  CHECK(pcm::resolve_epsilon<double>(0.125, 500) == 0.125);
}

TEST_CASE("farthest_first_centers walks outward from the median") {
  Matrix<double> points(4, 1);
  points << 0, 1, 2, 10;
  Vector<double> weights(4);
  weights << 1, 3, 1, 1;  // median sits strictly at 1
  l1core::DataSet<double> data{points, weights};
  const auto two = pcm::farthest_first_centers(data, 2);
  REQUIRE(two.rows() == 2);
  REQUIRE(two.cols() == 1);
  CHECK(two(0, 0) == 10.0);  // farthest from the median
  CHECK(two(1, 0) == 0.0);   // farthest from the first pick
  const auto three = pcm::farthest_first_centers(data, 3);
  CHECK(three(0, 0) == 10.0);
  CHECK(three(1, 0) == 0.0);
  CHECK(three(2, 0) == 2.0);  // largest nearest-center distance: min(8, 2)
  CHECK_THROWS_AS(pcm::farthest_first_centers(data, 0), std::invalid_argument);
  CHECK_THROWS_AS(pcm::farthest_first_centers(data, 5), std::invalid_argument);
}

TEST_CASE("farthest_first_centers breaks ties toward the lowest index") {
  Matrix<double> points(3, 1);
  points << -5, 0, 5;
  l1core::DataSet<double> data{points, Vector<double>::Ones(3)};
  const auto centers = pcm::farthest_first_centers(data, 2);
  CHECK(centers(0, 0) == -5.0);  // tied with +5, earlier row wins
  CHECK(centers(1, 0) == 5.0);
}

TEST_CASE("distinct points with matching centers are a fixed point") {
  Matrix<double> points(3, 2);
  points << 0, 0, 10, 0, 0, 10;
  l1core::DataSet<double> data{points, Vector<double>::Ones(3)};
  pcm::PcmConfig<double> config;
  config.k = 3;
  config.init_centers = points;
  const auto result = pcm::pcm_fit(data, config);
  CHECK(result.converged);
  CHECK(result.iterations_run == 1);
  CHECK(matrices_identical(result.centers, points));
  REQUIRE(result.trace.records.size() == 1);
  CHECK(result.trace.records[0].hard_objective == 0.0);
  CHECK(result.trace.records[0].center_movement == 0.0);
  for (Index i = 0; i < 3; ++i) {
    CHECK(result.hard_labels[std::size_t(i)] == i);
    CHECK(result.memberships.probs(i, i) == 1.0);
  }
}

TEST_CASE("well separated one-dimensional groups are recovered exactly") {
  Engine eng(44);
  auto data = two_groups(eng, 12, 5.0, 0.5);
  pcm::PcmConfig<double> config;
  config.k = 2;
  Matrix<double> init(2, 1);
  init << -1, 1;
  config.init_centers = init;
  const auto result = pcm::pcm_fit(data, config);
  CHECK(result.converged);
  CHECK(result.centers(0, 0) < -4.0);
  CHECK(result.centers(1, 0) > 4.0);
  for (Index i = 0; i < 12; ++i) CHECK(result.hard_labels[std::size_t(i)] == 0);
  for (Index i = 12; i < 24; ++i) CHECK(result.hard_labels[std::size_t(i)] == 1);
}

TEST_CASE("trace bookkeeping: exponent schedule, bounds, confinement") {
  Engine eng(45);
  auto data = random_dataset(eng, 50, 3);
  pcm::PcmConfig<double> config;
  config.k = 3;
  config.nu0 = 1.5;
  config.delta = 0.25;
  config.max_iters = 12;
  config.seed = 7;
  const auto result = pcm::pcm_fit(data, config);
  REQUIRE(result.iterations_run >= 1);
  REQUIRE(result.trace.records.size() == std::size_t(result.iterations_run));
  for (Index t = 0; t < result.iterations_run; ++t) {
    const auto& record = result.trace.records[std::size_t(t)];
    CHECK(record.nu == doctest::Approx(1.5 + 0.25 * double(t)).epsilon(1e-12));
    // The soft objective averages distances, the hard one takes row minima,
    // and the joint distance value is below both.
    CHECK(record.soft_objective >= record.hard_objective - 1e-12);
    CHECK(record.jdf <= record.soft_objective + 1e-12);
    CHECK(record.jdf >= 0.0);
  }
  CHECK(result.memberships.nu ==
        result.trace.records.back().nu);
  // Medians live inside the per-coordinate data range.
  for (Index j = 0; j < 3; ++j) {
    const double lo = data.points.col(j).minCoeff();
    const double hi = data.points.col(j).maxCoeff();
    for (Index c = 0; c < 3; ++c) {
      CHECK(result.centers(c, j) >= lo);
      CHECK(result.centers(c, j) <= hi);
    }
  }
  // Labels agree with the row argmax of the final memberships.
  const auto relabeled = pcm::hard_assign(result.memberships);
  CHECK(relabeled == result.hard_labels);
}

TEST_CASE("theorem mode drives the joint distance value down") {
  Engine eng(46);
  for (int rep = 0; rep < 5; ++rep) {
    auto data = two_groups(eng, 20, 2.0, 3.0);  // heavy overlap
    pcm::PcmConfig<double> config;
    config.k = 2;
    config.nu0 = 1;
    config.delta = 0;
    config.median_weight_exponent = 2;
    config.max_iters = 15;
    config.seed = std::uint64_t(rep);
    const auto result = pcm::pcm_fit(data, config);
    const auto& records = result.trace.records;
    for (std::size_t t = 1; t < records.size(); ++t)
      CHECK(records[t].jdf <= records[t - 1].jdf * (1 + 1e-12) + 1e-12);
  }
}

TEST_CASE("fits are bitwise deterministic and thread-count invariant") {
  Engine eng(47);
  auto data = random_dataset(eng, 60, 4);
  pcm::PcmConfig<double> config;
  config.k = 3;
  config.delta = 0.2;
  config.max_iters = 10;
  config.seed = 99;
  const auto a = pcm::pcm_fit(data, config);
  const auto b = pcm::pcm_fit(data, config);
  CHECK(matrices_identical(a.centers, b.centers));
  CHECK(a.hard_labels == b.hard_labels);
  CHECK(a.iterations_run == b.iterations_run);
  CHECK(traces_equal(a.trace, b.trace));
  config.threads = 4;
  const auto c = pcm::pcm_fit(data, config);
  CHECK(matrices_identical(a.centers, c.centers));
  CHECK(a.hard_labels == c.hard_labels);
  CHECK(traces_equal(a.trace, c.trace));
  CHECK(matrices_identical(a.memberships.probs, c.memberships.probs));
}

TEST_CASE("doubling the data doubles the centers exactly") {
  Engine eng(48);
  auto data = two_groups(eng, 15, 2.0, 2.5);
  l1core::DataSet<double> scaled{(2.0 * data.points.array()).matrix(),
                                 data.weights};
  pcm::PcmConfig<double> config;
  config.k = 2;
  config.delta = 0.1;
  config.max_iters = 6;
  config.epsilon = 1e-300;  // run a fixed number of iterations in both fits
  Matrix<double> init(2, 1);
  init << -1, 1;
  config.init_centers = init;
  const auto base = pcm::pcm_fit(data, config);
  config.init_centers = (2.0 * init.array()).matrix();
  const auto doubled = pcm::pcm_fit(scaled, config);
  CHECK(base.iterations_run == doubled.iterations_run);
  CHECK(matrices_identical(doubled.centers, (2.0 * base.centers.array()).matrix()));
  CHECK(doubled.hard_labels == base.hard_labels);
  CHECK(matrices_identical(doubled.memberships.probs, base.memberships.probs));
}

TEST_CASE("a tiny movement threshold forces the iteration cap") {
  // Overlapping 3-D groups chosen so the medians keep shifting well past the
  // cap; with this data the run does not converge within 8 iterations.
  Engine eng(49);
  l1core::DataSet<double> data;
  const Index per = 20;
  data.points.resize(2 * per, 3);
  for (Index i = 0; i < 2 * per; ++i)
    for (Index j = 0; j < 3; ++j)
      data.points(i, j) = (i < per ? -1.0 : 1.0) + l1pc::uniform_in(eng, -2, 2);
  data.weights = Vector<double>::Ones(2 * per);
  pcm::PcmConfig<double> config;
  config.k = 2;
  config.delta = 0.2;
  config.max_iters = 5;
  config.epsilon = 1e-300;
  config.seed = 3;
  const auto result = pcm::pcm_fit(data, config);
  CHECK(result.iterations_run == 5);
  CHECK(result.trace.records.size() == 5);
  CHECK(!result.converged);
}

TEST_CASE("hard_assign breaks ties toward the lowest index") {
  Matrix<double> probs(2, 4);
  probs.row(0) << 0.25, 0.25, 0.25, 0.25;
  probs.row(1) << 0.2, 0.3, 0.3, 0.2;
  mem::MembershipMatrix<double> m{probs, 1.0};
  const auto labels = pcm::hard_assign(m);
  CHECK(labels[0] == 0);
  CHECK(labels[1] == 1);
}

TEST_CASE("a huge exponent reduces to nearest-center labels") {
  Engine eng(50);
  auto data = random_dataset(eng, 40, 2);
  pcm::PcmConfig<double> config;
  config.k = 3;
  config.nu0 = 1e3;
  config.delta = 0;
  config.max_iters = 8;
  config.seed = 11;
  const auto result = pcm::pcm_fit(data, config);
  const auto distances = l1core::distance_matrix(data.points, result.centers);
  for (Index i = 0; i < data.size(); ++i) {
    Index nearest = 0;
    for (Index c = 1; c < 3; ++c)
      if (distances(i, c) < distances(i, nearest)) nearest = c;
    CHECK(result.hard_labels[std::size_t(i)] == nearest);
  }
}
