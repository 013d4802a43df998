#ifndef L1PC_SYNTHDATA_HPP
#define L1PC_SYNTHDATA_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "l1pc/common.hpp"
#include "l1pc/l1core.hpp"
#include "l1pc/random.hpp"

namespace l1pc::synthdata {

enum class Dist { normal, uniform };

inline const char* to_string(Dist dist) {
  return dist == Dist::normal ? "normal" : "uniform";
}

inline Dist dist_from_string(const std::string& name) {
  if (name == "normal") return Dist::normal;
  if (name == "uniform") return Dist::uniform;
  throw std::invalid_argument("unknown distribution: " + name);
}

// Two-cluster generator: cluster 0 holds n1 points around mu1, cluster 1
// holds n2 points around mu2, every coordinate drawn i.i.d. from the chosen
// family. sigma applies to the normal family, support (the full width of the
// interval) to the uniform one; exactly one of them must be set.
template <class Scalar>
struct SyntheticSpec {
  Dist dist = Dist::normal;
  Index n = 1;
  Index n1 = 1;
  Index n2 = 1;
  Scalar mu1 = 1;
  Scalar mu2 = -1;
  Scalar sigma = 0;
  Scalar support = 0;
  std::uint64_t seed = 0;
  int threads = 1;
};

template <class Scalar>
void validate(const SyntheticSpec<Scalar>& spec) {
  require(spec.n >= 1, "dimension must be at least 1");
  require(spec.n1 >= 1 && spec.n2 >= 1, "cluster sizes must be at least 1");
  require(std::isfinite(spec.mu1) && std::isfinite(spec.mu2),
          "cluster means must be finite");
  require(std::isfinite(spec.sigma) && spec.sigma >= Scalar(0) &&
              std::isfinite(spec.support) && spec.support >= Scalar(0),
          "sigma and support must be finite and nonnegative");
  if (spec.dist == Dist::normal)
    require(spec.sigma > Scalar(0) && spec.support == Scalar(0),
            "normal data takes sigma (and no support)");
  else
    require(spec.support > Scalar(0) && spec.sigma == Scalar(0),
            "uniform data takes support (and no sigma)");
}

template <class Scalar>
struct LabeledDataSet {
  l1core::DataSet<Scalar> data;
  std::vector<Index> labels;
};

// Deterministic generation: point i draws from its own substream derived
// from (seed, i), so the dataset is bit-identical for a given seed no matter
// how generation is split across threads.
template <class Scalar>
LabeledDataSet<Scalar> generate(const SyntheticSpec<Scalar>& spec) {
  validate(spec);
  const Index num_points = spec.n1 + spec.n2;
  LabeledDataSet<Scalar> out;
  out.data.points.resize(num_points, spec.n);
  out.data.weights = Vector<Scalar>::Ones(num_points);
  out.labels.resize(static_cast<std::size_t>(num_points));
  for (Index i = 0; i < num_points; ++i)
    out.labels[static_cast<std::size_t>(i)] = i < spec.n1 ? 0 : 1;

  detail::parallel_blocks(num_points, spec.threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      Engine engine(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
      const Scalar mu = i < spec.n1 ? spec.mu1 : spec.mu2;
      if (spec.dist == Dist::normal) {
        for (Index j = 0; j < spec.n; ++j)
          out.data.points(i, j) =
              mu + spec.sigma * static_cast<Scalar>(standard_normal(engine));
      } else {
        const Scalar lo = mu - spec.support / Scalar(2);
        const Scalar hi = mu + spec.support / Scalar(2);
        for (Index j = 0; j < spec.n; ++j)
          out.data.points(i, j) =
              static_cast<Scalar>(uniform_in(engine, double(lo), double(hi)));
      }
    }
  });
  return out;
}

}  // namespace l1pc::synthdata

#endif  // L1PC_SYNTHDATA_HPP
