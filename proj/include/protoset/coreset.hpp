#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "protoset/io.hpp"
#include "protoset/matching.hpp"
#include "protoset/parallel.hpp"
#include "protoset/pattern.hpp"
#include "protoset/prototype.hpp"
#include "protoset/rng.hpp"

namespace protoset {

enum class CostMode { Exact, Approx };

inline CostMode parse_cost_mode(const std::string& s) {
  if (s == "exact") return CostMode::Exact;
  if (s == "approx") return CostMode::Approx;
  throw ConfigError("unknown cost mode '" + s + "' (expected exact|approx)");
}

// Per-pattern sensitivity upper bounds anchored at a pivot pattern:
//   t_i = lead(alpha) * M(P_i, P_pivot) / delta_tilde + (4*alpha + 16) / n
// where lead = 8(alpha+1) for squared-distance metrics and 2(alpha+1) for
// the plain-triangle metrics (l1, emd1).
struct SensitivityProfile {
  std::size_t pivot = 0;
  double alpha = 3.0;
  double delta_tilde = 0.0;            // sum of costs to the pivot
  std::vector<double> costs_to_pivot;  // exact or approximate
  std::vector<double> t_upper;
  double t_sum = 0.0;
  Metric metric = Metric::SquaredL2;
  CostMode cost_mode = CostMode::Exact;
  bool degenerate = false;  // all costs zero -> uniform fallback
};

inline double sensitivity_lead(double alpha, Metric m) {
  bool squared = (m == Metric::SquaredL2 || m == Metric::Emd2);
  return (squared ? 8.0 : 2.0) * (alpha + 1.0);
}

inline SensitivityProfile sensitivities(const Instance& inst, std::size_t pivot,
                                        double alpha, CostMode mode,
                                        Metric m) {
  validate_instance(inst);
  check_config(alpha > 1.0, "sensitivities requires alpha > 1");
  check_data(pivot < inst.size(), "pivot index out of range");

  SensitivityProfile prof;
  prof.pivot = pivot;
  prof.alpha = alpha;
  prof.metric = m;
  prof.cost_mode = mode;

  std::size_t n = inst.size();
  const Pattern& anchor = inst.patterns[pivot];
  prof.costs_to_pivot.assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    if (i == pivot) return;  // cost to itself is 0
    prof.costs_to_pivot[i] =
        mode == CostMode::Exact
            ? pattern_distance(inst.patterns[i], anchor, m)
            : approx_pattern_distance(inst.patterns[i], anchor, m);
  });
  for (double c : prof.costs_to_pivot) prof.delta_tilde += c;

  double lead = sensitivity_lead(alpha, m);
  double tail = (4.0 * alpha + 16.0) / static_cast<double>(n);
  prof.t_upper.assign(n, 0.0);
  if (prof.delta_tilde <= 0.0) {
    // all patterns identical: the bound's first term degenerates to 0/0 and
    // its limit is the floor term.
    prof.degenerate = true;
    for (std::size_t i = 0; i < n; ++i) prof.t_upper[i] = tail;
  } else {
    for (std::size_t i = 0; i < n; ++i)
      prof.t_upper[i] =
          lead * prof.costs_to_pivot[i] / prof.delta_tilde + tail;
  }
  for (double t : prof.t_upper) prof.t_sum += t;
  return prof;
}

struct CoresetEntry {
  std::size_t index = 0;
  double weight = 0.0;  // (1/r) * (T / t_index)
};

struct Coreset {
  std::vector<CoresetEntry> entries;  // duplicates kept as separate entries
  std::size_t sample_size = 0;
  double t_sum = 0.0;
  double alpha = 3.0;
  std::size_t pivot = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;  // FNV-1a of the source instance's canonical bytes
};

// r i.i.d. draws with replacement from the distribution t_i / T; each drawn
// index gets the weight (1/r)(T/t_i).
inline Coreset sample_coreset(const SensitivityProfile& prof, std::size_t r,
                              Rng& rng, const std::string& fingerprint = "") {
  check_config(r >= 1, "sample_coreset requires r >= 1");
  std::size_t n = prof.t_upper.size();
  check_data(n >= 1, "empty sensitivity profile");

  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += prof.t_upper[i];
    cdf[i] = acc;
  }

  Coreset cs;
  cs.sample_size = r;
  cs.t_sum = prof.t_sum;
  cs.alpha = prof.alpha;
  cs.pivot = prof.pivot;
  cs.seed = rng.seed();
  cs.fingerprint = fingerprint;
  cs.entries.reserve(r);
  for (std::size_t s = 0; s < r; ++s) {
    double u = rng.uniform() * acc;
    std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= n) idx = n - 1;
    double w = prof.t_sum / (static_cast<double>(r) * prof.t_upper[idx]);
    cs.entries.push_back({idx, w});
  }
  return cs;
}

// The coreset viewed as a weighted instance (duplicates stay separate).
inline Instance coreset_instance(const Instance& inst, const Coreset& cs) {
  Instance out;
  out.patterns.reserve(cs.entries.size());
  out.pattern_weights.reserve(cs.entries.size());
  for (const auto& e : cs.entries) {
    check_data(e.index < inst.size(), "coreset index out of range");
    out.patterns.push_back(inst.patterns[e.index]);
    out.pattern_weights.push_back(e.weight);
  }
  return out;
}

// Weighted estimator of the full objective: sum over entries of w_l * M(P_l, Q).
inline double weighted_objective(const Instance& inst, const Coreset& cs,
                                 const Prototype& q, Metric m) {
  if (!cs.fingerprint.empty())
    check_data(cs.fingerprint == instance_fingerprint(inst),
               "coreset fingerprint does not match instance");
  std::vector<double> costs(cs.entries.size(), 0.0);
  parallel_for(cs.entries.size(), [&](std::size_t i) {
    costs[i] = pattern_distance(inst.patterns[cs.entries[i].index], q, m);
  });
  double total = 0.0;
  for (std::size_t i = 0; i < cs.entries.size(); ++i)
    total += cs.entries[i].weight * costs[i];
  check_numeric(std::isfinite(total), "weighted objective is non-finite");
  return total;
}

// ceil(C * (kd/eps^2) * ln(max(kd/eps, e))); callers clamp to [1, n].
inline std::size_t recommended_size(std::size_t k, std::size_t d, double eps,
                                    double constant = 0.5) {
  check_config(k >= 1 && d >= 1, "recommended_size requires k, d >= 1");
  check_config(eps > 0.0 && eps < 1.0, "recommended_size requires 0 < eps < 1");
  double kd = static_cast<double>(k * d);
  double size = constant * (kd / (eps * eps)) *
                std::log(std::max(kd / eps, std::exp(1.0)));
  return static_cast<std::size_t>(std::max(1.0, std::ceil(size)));
}

namespace detail {

// Perturbs the pivot pattern so the identity assignment costs at most
// `budget` under the metric, which upper-bounds the matching cost.
inline Prototype perturb_within(const Pattern& anchor, double budget, Rng& rng,
                                Metric m) {
  Prototype q = anchor;
  std::size_t k = anchor.size(), d = anchor.dim();
  std::vector<std::vector<double>> noise(k, std::vector<double>(d));
  double raw = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t c = 0; c < d; ++c) noise[j][c] = rng.normal();
  if (m == Metric::L1) {
    for (const auto& row : noise)
      for (double x : row) raw += std::abs(x);
  } else if (m == Metric::Emd2) {
    for (std::size_t j = 0; j < k; ++j) {
      double sq = 0.0;
      for (double x : noise[j]) sq += x * x;
      raw += static_cast<double>(anchor.weights[j]) * sq;
    }
  } else {
    for (const auto& row : noise)
      for (double x : row) raw += x * x;
  }
  if (raw <= 0.0) return q;
  double target = rng.uniform() * budget;
  double scale = (m == Metric::L1) ? target / raw : std::sqrt(target / raw);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t c = 0; c < d; ++c) q.points[j][c] += scale * noise[j][c];
  return q;
}

}  // namespace detail

// Empirical coreset check: probes candidate prototypes inside the region the
// sampling analysis covers (matching cost to the pivot at most 4L/n), plus
// the alternating-minimization output, and reports the worst relative error
// between the full and weighted objectives.
inline double validate_coreset(const Instance& inst, const Coreset& cs,
                               int probes, Rng& rng, Metric m) {
  validate_instance(inst);
  check_config(probes >= 1, "validate_coreset requires probes >= 1");
  std::size_t n = inst.size();
  const Pattern& anchor = inst.patterns[cs.pivot];

  std::vector<double> to_pivot(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    if (i == cs.pivot) return;
    to_pivot[i] = pattern_distance(inst.patterns[i], anchor, m);
  });
  double big_l = 0.0;
  for (double c : to_pivot) big_l += c;
  double budget = 4.0 * big_l / static_cast<double>(n);

  std::vector<Prototype> candidates;
  candidates.reserve(static_cast<std::size_t>(probes) + 1);
  for (int p = 0; p < probes; ++p)
    candidates.push_back(detail::perturb_within(anchor, budget, rng, m));
  if (m != Metric::Emd1)
    candidates.push_back(
        alternating_minimize(inst, anchor, 20, 1e-6, m).prototype);

  double worst = 0.0;
  for (const auto& q : candidates) {
    double full = objective(inst, q, m);
    double est = weighted_objective(inst, cs, q, m);
    if (full == 0.0) {
      if (est != 0.0) worst = std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, std::abs(full - est) / full);
  }
  return worst;
}

// --- coreset sidecar (JSON Lines) ---

inline std::string coreset_to_jsonl(const Coreset& cs) {
  std::ostringstream os;
  json meta;
  meta["meta"]["r"] = cs.sample_size;
  meta["meta"]["T"] = cs.t_sum;
  meta["meta"]["alpha"] = cs.alpha;
  meta["meta"]["pivot"] = cs.pivot;
  meta["meta"]["seed"] = cs.seed;
  meta["meta"]["fingerprint"] = cs.fingerprint;
  os << meta.dump() << '\n';
  for (const auto& e : cs.entries) {
    json line;
    line["index"] = e.index;
    line["weight"] = e.weight;
    os << line.dump() << '\n';
  }
  return os.str();
}

inline void write_coreset(const std::filesystem::path& path,
                          const Coreset& cs) {
  atomic_write(path, coreset_to_jsonl(cs));
}

inline Coreset read_coreset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_data(in.good(), "cannot open " + path.string());
  std::string line;
  check_data(static_cast<bool>(std::getline(in, line)),
             "empty coreset file: " + path.string());
  json meta = json::parse(line);
  check_data(meta.contains("meta"), "coreset file missing meta header");
  Coreset cs;
  cs.sample_size = meta["meta"].at("r").get<std::size_t>();
  cs.t_sum = meta["meta"].at("T").get<double>();
  cs.alpha = meta["meta"].at("alpha").get<double>();
  cs.pivot = meta["meta"].at("pivot").get<std::size_t>();
  cs.seed = meta["meta"].at("seed").get<std::uint64_t>();
  cs.fingerprint = meta["meta"].at("fingerprint").get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json row = json::parse(line);
    CoresetEntry e;
    e.index = row.at("index").get<std::size_t>();
    e.weight = row.at("weight").get<double>();
    check_data(e.weight > 0, "coreset weights must be positive");
    cs.entries.push_back(e);
  }
  check_data(cs.entries.size() == cs.sample_size,
             "coreset entry count does not match meta r");
  return cs;
}

}  // namespace protoset
