#pragma once

#include <vector>

#include "protoset/pattern.hpp"
#include "protoset/rng.hpp"

namespace testutil {

inline protoset::Pattern random_pattern(std::size_t k, std::size_t d,
                                        protoset::Rng& rng, double lo = 0.0,
                                        double hi = 1.0) {
  protoset::Pattern p;
  p.points.assign(k, std::vector<double>(d));
  for (auto& pt : p.points)
    for (auto& c : pt) c = rng.uniform(lo, hi);
  return p;
}

// Weighted pattern with positive-total integer weights summing to `total`.
inline protoset::Pattern random_weighted_pattern(std::size_t k, std::size_t d,
                                                 long long total,
                                                 protoset::Rng& rng) {
  protoset::Pattern p = random_pattern(k, d, rng);
  p.weights.assign(k, 0);
  for (long long unit = 0; unit < total; ++unit)
    p.weights[rng.index(k)] += 1;
  return p;
}

inline protoset::Pattern single_point(double x) {
  protoset::Pattern p;
  p.points = {{x}};
  return p;
}

inline protoset::Instance gaussian_instance(std::size_t n, std::size_t k,
                                            std::size_t d,
                                            protoset::Rng& rng) {
  protoset::Instance inst;
  inst.patterns.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    protoset::Pattern p;
    p.points.assign(k, std::vector<double>(d));
    for (auto& pt : p.points)
      for (auto& c : pt) c = rng.normal();
    inst.patterns.push_back(std::move(p));
  }
  return inst;
}

}  // namespace testutil
