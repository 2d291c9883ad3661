#pragma once

#include <initializer_list>

#include "edci/core_types.hpp"
#include "edci/synth_bench.hpp"

namespace fixture {

inline edci::Vector vec(std::initializer_list<double> v) {
  edci::Vector out(static_cast<edci::Index>(v.size()));
  edci::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Unimodal daily prices. With batteries whose energy bounds are reached by
// a partial-power hour, the surrogate vertex is nondegenerate.
inline edci::TimeSeries single_cycle_prices(edci::Index days, std::uint64_t seed) {
  edci::bench::ExogenousSpec es;
  es.days = days;
  es.seed = seed;
  es.price_shape = edci::bench::PriceShape::SingleCycle;
  return edci::bench::synthesize_exogenous(es).price;
}

// Two batteries with a nondegenerate response under single_cycle_prices(2, 3).
inline edci::VbTheta interior_theta() { return edci::VbTheta({{1.3, 2.71, -1.9}, {0.7, 1.13, -0.37}}); }

}  // namespace fixture

namespace fixture {

// Noiseless scenario the two-battery surrogate reproduces exactly: 9 days,
// single-cycle prices, flat PL.
inline edci::bench::GroundTruth representable_truth(std::uint64_t seed, edci::Index days = 9) {
  auto spec = edci::bench::BenchSpec::representable();
  spec.seed = seed;
  edci::bench::ExogenousSpec es;
  es.days = days;
  es.seed = seed + 6;
  es.price_shape = edci::bench::PriceShape::SingleCycle;
  return edci::bench::generate(spec, edci::bench::synthesize_exogenous(es));
}

}  // namespace fixture
