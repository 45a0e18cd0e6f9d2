#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "protoset/parallel.hpp"
#include "protoset/pattern.hpp"
#include "protoset/prototype.hpp"
#include "protoset/rng.hpp"

namespace protoset {

// Rademacher projection: entries +-1/sqrt(m), reproducible from the seed.
struct Projection {
  std::vector<double> matrix;  // row-major, target_dim x source_dim
  std::size_t source_dim = 0;
  std::size_t target_dim = 0;
  std::uint64_t seed = 0;

  double at(std::size_t row, std::size_t col) const {
    return matrix[row * source_dim + col];
  }
};

// ceil(C * ln(n*k) / eps^2), capped at d (at which point projection is a
// no-op and callers may skip it).
inline std::size_t jl_target_dim(std::size_t n, std::size_t k, double eps,
                                 std::size_t d, double constant = 4.0) {
  check_config(eps > 0.0 && eps < 1.0, "jl_target_dim requires 0 < eps < 1");
  double m = constant * std::log(static_cast<double>(n) * static_cast<double>(k)) /
             (eps * eps);
  std::size_t target = static_cast<std::size_t>(std::max(1.0, std::ceil(m)));
  return std::min(target, d);
}

inline Projection make_projection(std::size_t d, std::size_t m,
                                  std::uint64_t seed) {
  check_config(m >= 1 && m <= d, "projection target dim must be in [1, d]");
  Projection proj;
  proj.source_dim = d;
  proj.target_dim = m;
  proj.seed = seed;
  proj.matrix.resize(m * d);
  Rng rng(seed);
  double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (auto& entry : proj.matrix)
    entry = (rng.next_u64() & 1ULL) ? scale : -scale;
  return proj;
}

inline std::vector<double> project_point(const Projection& proj,
                                         const std::vector<double>& x) {
  check_data(x.size() == proj.source_dim, "point dimension mismatch");
  std::vector<double> out(proj.target_dim, 0.0);
  for (std::size_t r = 0; r < proj.target_dim; ++r) {
    const double* row = proj.matrix.data() + r * proj.source_dim;
    double acc = 0.0;
    for (std::size_t c = 0; c < proj.source_dim; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  return out;
}

inline Pattern project_pattern(const Projection& proj, const Pattern& p) {
  Pattern out;
  out.weights = p.weights;
  out.points.reserve(p.size());
  for (const auto& pt : p.points) out.points.push_back(project_point(proj, pt));
  return out;
}

// Projects every pattern with one shared matrix; weights and order preserved.
inline std::pair<Instance, Projection> jl_project(const Instance& inst,
                                                  std::size_t m,
                                                  std::uint64_t seed) {
  validate_instance(inst);
  check_config(m >= 1 && m <= inst.dim(),
               "jl_project target dim must be in [1, d]");
  Projection proj = make_projection(inst.dim(), m, seed);
  Instance out;
  out.pattern_weights = inst.pattern_weights;
  out.patterns.resize(inst.size());
  parallel_for(inst.size(), [&](std::size_t i) {
    out.patterns[i] = project_pattern(proj, inst.patterns[i]);
  });
  return {std::move(out), std::move(proj)};
}

// Lifts a low-dimensional prototype back to R^d: one matching pass of every
// projected pattern against lowQ, then the exact per-slot update applied to
// the original points. No further solves.
inline Prototype lift_solution(const Instance& original,
                               const Instance& projected,
                               const Prototype& low_q, Metric m) {
  check_data(original.size() == projected.size(),
             "original/projected instance size mismatch");
  check_data(low_q.size() == projected.k() && low_q.dim() == projected.dim(),
             "low prototype shape mismatch");
  auto matches = match_all(projected, low_q, m);
  auto [lifted, empty] = update_prototype(original, matches, std::nullopt, m);
  (void)empty;
  if (m == Metric::Emd2) lifted.weights = low_q.weights;
  return lifted;
}

}  // namespace protoset
