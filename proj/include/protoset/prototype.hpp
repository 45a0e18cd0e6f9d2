#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "protoset/matching.hpp"
#include "protoset/parallel.hpp"
#include "protoset/pattern.hpp"
#include "protoset/rng.hpp"

namespace protoset {

// One pattern's certified matching against a prototype: a permutation for
// bijective metrics, a flow matrix for EMD.
struct PatternMatch {
  double cost = 0.0;
  std::vector<int> perm;                      // pattern point j -> slot perm[j]
  std::vector<std::vector<long long>> flow;   // flow[j][l]: point j -> slot l
};

struct SolveReport {
  Prototype prototype;
  std::vector<double> objective_history;  // objective at the start of each round
  int rounds = 0;
  bool converged = false;
  bool had_empty_slot = false;
};

namespace detail {

inline PatternMatch match_pattern(const Pattern& p, const Prototype& q,
                                  Metric m) {
  PatternMatch pm;
  if (is_flow_metric(m)) {
    FlowResult fr = emd(p, q, m);
    pm.cost = fr.cost;
    pm.flow = std::move(fr.flow);
  } else {
    MatchResult mr = match_cost(p, q, m);
    pm.cost = mr.cost;
    pm.perm = std::move(mr.permutation);
  }
  return pm;
}

inline double weighted_lower_median(std::vector<std::pair<double, double>>& vals) {
  std::sort(vals.begin(), vals.end());
  double total = 0.0;
  for (const auto& [v, w] : vals) total += w;
  double half = total / 2.0;
  double cum = 0.0;
  for (const auto& [v, w] : vals) {
    cum += w;
    if (cum >= half) return v;
  }
  return vals.back().first;
}

}  // namespace detail

// Exact matchings of all patterns against q, parallel across patterns.
inline std::vector<PatternMatch> match_all(const Instance& inst,
                                           const Prototype& q, Metric m) {
  std::vector<PatternMatch> out(inst.size());
  parallel_for(inst.size(),
               [&](std::size_t i) { out[i] = detail::match_pattern(inst.patterns[i], q, m); });
  return out;
}

// Total weighted matching cost of the instance against q (fixed-order sum,
// so results do not depend on thread count).
inline double objective(const Instance& inst, const Prototype& q, Metric m) {
  validate_instance(inst);
  auto matches = match_all(inst, q, m);
  double total = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i)
    total += inst.pattern_weight(i) * matches[i].cost;
  check_numeric(std::isfinite(total), "objective is non-finite");
  return total;
}

// Boosted random initialization: samples `trials` pattern indices uniformly
// with replacement and keeps the one with the lowest objective when used as
// the prototype. The returned value is that pivot's total cost.
inline std::pair<std::size_t, double> pick_init(const Instance& inst,
                                                int trials, Rng& rng,
                                                Metric m) {
  check_data(inst.size() >= 1, "pick_init requires a non-empty instance");
  check_config(trials >= 1, "pick_init requires trials >= 1");
  std::size_t best_idx = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    std::size_t idx = rng.index(inst.size());
    double obj = objective(inst, inst.patterns[idx], m);
    if (obj < best_obj) {
      best_obj = obj;
      best_idx = idx;
    }
  }
  return {best_idx, best_obj};
}

// Exact per-slot minimizer given fixed matchings. SquaredL2: weighted mean.
// L1: coordinate-wise weighted lower median. Emd2: flow-weighted mean with
// the prototype weights kept fixed. A slot with zero matched mass keeps the
// previous point (any location is optimal there); without a previous
// prototype the global mean is used. Returns the flag alongside.
inline std::pair<Prototype, bool> update_prototype(
    const Instance& inst, const std::vector<PatternMatch>& matches,
    const std::optional<Prototype>& previous, Metric m) {
  check_data(matches.size() == inst.size(),
             "one matching per pattern required");
  check_config(m != Metric::Emd1,
               "no exact prototype update rule for emd1 (geometric median)");
  std::size_t k = inst.k();
  std::size_t d = inst.dim();
  Prototype out;
  out.points.assign(k, std::vector<double>(d, 0.0));
  bool empty_slot = false;

  std::vector<double> global_mean(d, 0.0);
  double global_mass = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    double w = inst.pattern_weight(i);
    const Pattern& p = inst.patterns[i];
    for (std::size_t j = 0; j < k; ++j) {
      double pw = w * (p.weighted() ? static_cast<double>(p.weights[j]) : 1.0);
      global_mass += pw;
      for (std::size_t c = 0; c < d; ++c)
        global_mean[c] += pw * p.points[j][c];
    }
  }
  if (global_mass > 0)
    for (std::size_t c = 0; c < d; ++c) global_mean[c] /= global_mass;

  if (m == Metric::L1) {
    // vals[l][c]: (coordinate value, weight) of every point matched to slot l.
    std::vector<std::vector<std::vector<std::pair<double, double>>>> vals(
        k, std::vector<std::vector<std::pair<double, double>>>(d));
    for (std::size_t i = 0; i < inst.size(); ++i) {
      double w = inst.pattern_weight(i);
      const auto& perm = matches[i].perm;
      for (std::size_t j = 0; j < k; ++j) {
        if (w <= 0) continue;
        std::size_t slot = static_cast<std::size_t>(perm[j]);
        for (std::size_t c = 0; c < d; ++c)
          vals[slot][c].emplace_back(inst.patterns[i].points[j][c], w);
      }
    }
    for (std::size_t l = 0; l < k; ++l) {
      if (vals[l].empty() || vals[l][0].empty()) {
        empty_slot = true;
        out.points[l] = previous ? previous->points[l] : global_mean;
        continue;
      }
      for (std::size_t c = 0; c < d; ++c)
        out.points[l][c] = detail::weighted_lower_median(vals[l][c]);
    }
  } else {
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < inst.size(); ++i) {
      double w = inst.pattern_weight(i);
      const Pattern& p = inst.patterns[i];
      if (m == Metric::Emd2) {
        const auto& flow = matches[i].flow;
        for (std::size_t j = 0; j < k; ++j)
          for (std::size_t l = 0; l < k; ++l) {
            double f = w * static_cast<double>(flow[j][l]);
            if (f <= 0) continue;
            mass[l] += f;
            for (std::size_t c = 0; c < d; ++c)
              out.points[l][c] += f * p.points[j][c];
          }
      } else {
        const auto& perm = matches[i].perm;
        for (std::size_t j = 0; j < k; ++j) {
          std::size_t slot = static_cast<std::size_t>(perm[j]);
          mass[slot] += w;
          for (std::size_t c = 0; c < d; ++c)
            out.points[slot][c] += w * p.points[j][c];
        }
      }
    }
    for (std::size_t l = 0; l < k; ++l) {
      if (mass[l] > 0) {
        for (std::size_t c = 0; c < d; ++c) out.points[l][c] /= mass[l];
      } else {
        empty_slot = true;
        out.points[l] = previous ? previous->points[l] : global_mean;
      }
    }
  }

  // Emd2 keeps the prototype weights fixed; the caller supplies them via the
  // previous prototype (or sets them afterwards when lifting).
  if (m == Metric::Emd2 && previous) out.weights = previous->weights;
  for (const auto& pt : out.points)
    for (double c : pt)
      check_numeric(std::isfinite(c), "prototype update produced non-finite value");
  return {std::move(out), empty_slot};
}

// Alternating minimization: repeat {exact matchings to the current prototype;
// exact per-slot update} until the relative objective improvement drops below
// rel_tol or max_rounds is reached.
inline SolveReport alternating_minimize(const Instance& inst,
                                        const Prototype& init, int max_rounds,
                                        double rel_tol, Metric m) {
  validate_instance(inst);
  validate_pattern(init);
  check_data(init.size() == inst.k() && init.dim() == inst.dim(),
             "init prototype shape mismatch");
  check_config(max_rounds >= 1, "max_rounds must be >= 1");
  check_config(rel_tol >= 0, "rel_tol must be >= 0");
  check_config(m != Metric::Emd1,
               "alternating_minimize supports sq, l1, and emd2 only");

  SolveReport report;
  report.prototype = init;
  double prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < max_rounds; ++round) {
    auto matches = match_all(inst, report.prototype, m);
    double obj = 0.0;
    for (std::size_t i = 0; i < matches.size(); ++i)
      obj += inst.pattern_weight(i) * matches[i].cost;
    check_numeric(std::isfinite(obj), "objective became non-finite");
    report.objective_history.push_back(obj);
    report.rounds = round + 1;
    if (round > 0) {
      double improvement = (prev - obj) / std::max(prev, 1e-300);
      if (improvement < rel_tol) {
        report.converged = true;
        break;
      }
    }
    if (obj == 0.0) {
      report.converged = true;
      break;
    }
    auto [next, empty] =
        update_prototype(inst, matches, report.prototype, m);
    report.had_empty_slot = report.had_empty_slot || empty;
    report.prototype = std::move(next);
    prev = obj;
  }
  return report;
}

}  // namespace protoset
