#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "protoset/common.hpp"

namespace protoset {

// A pattern: k points in R^d, optionally with non-negative integer point
// weights summing to the instance-wide total W.
struct Pattern {
  std::vector<std::vector<double>> points;
  std::vector<long long> weights;  // empty = unweighted

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
  bool weighted() const { return !weights.empty(); }

  long long total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0LL);
  }
};

// The solver's output shares the pattern shape.
using Prototype = Pattern;

inline void validate_pattern(const Pattern& p) {
  check_data(!p.points.empty(), "pattern must contain at least one point");
  std::size_t d = p.points.front().size();
  check_data(d >= 1, "points must have dimension >= 1");
  for (const auto& pt : p.points) {
    check_data(pt.size() == d, "all points in a pattern must share dimension");
    for (double c : pt)
      check_data(std::isfinite(c), "pattern coordinates must be finite");
  }
  if (p.weighted()) {
    check_data(p.weights.size() == p.points.size(),
               "weight count must match point count");
    for (long long w : p.weights)
      check_data(w >= 0, "point weights must be non-negative");
    check_data(p.total_weight() > 0, "total pattern weight must be positive");
  }
}

// An ordered collection of n patterns sharing k, d, and (if weighted) total
// weight W. pattern_weights carries per-pattern multipliers (coreset weights);
// empty means all ones.
struct Instance {
  std::vector<Pattern> patterns;
  std::vector<double> pattern_weights;  // empty = uniform 1.0

  std::size_t size() const { return patterns.size(); }
  std::size_t k() const { return patterns.empty() ? 0 : patterns.front().size(); }
  std::size_t dim() const { return patterns.empty() ? 0 : patterns.front().dim(); }
  bool weighted() const { return !patterns.empty() && patterns.front().weighted(); }

  long long total_weight() const {
    return patterns.empty() ? 0 : patterns.front().total_weight();
  }

  double pattern_weight(std::size_t i) const {
    return pattern_weights.empty() ? 1.0 : pattern_weights[i];
  }
};

inline void validate_instance(const Instance& inst) {
  check_data(!inst.patterns.empty(), "instance must contain at least one pattern");
  std::size_t k = inst.k();
  std::size_t d = inst.dim();
  bool weighted = inst.weighted();
  long long w_total = weighted ? inst.total_weight() : 0;
  for (const auto& p : inst.patterns) {
    validate_pattern(p);
    check_data(p.size() == k, "all patterns must share k");
    check_data(p.dim() == d, "all patterns must share d");
    check_data(p.weighted() == weighted,
               "patterns must be uniformly weighted or unweighted");
    if (weighted)
      check_data(p.total_weight() == w_total,
                 "all patterns must share the total weight W");
  }
  if (!inst.pattern_weights.empty()) {
    check_data(inst.pattern_weights.size() == inst.patterns.size(),
               "per-pattern weight count must match n");
    for (double w : inst.pattern_weights)
      check_data(w >= 0 && std::isfinite(w),
                 "per-pattern weights must be finite and non-negative");
  }
}

inline void check_compatible(const Pattern& a, const Pattern& b) {
  check_data(a.size() == b.size(), "patterns must share k");
  check_data(a.dim() == b.dim(), "patterns must share d");
}

}  // namespace protoset
