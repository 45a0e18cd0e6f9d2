#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "protoset/common.hpp"
#include "protoset/pattern.hpp"

namespace protoset {

// SquaredL2 and L1 apply to unweighted matching; Emd1 / Emd2 to weighted
// flows. Emd1 uses Euclidean ground distances, Emd2 their squares; L1 uses
// the Manhattan distance (so the per-slot median update stays exact).
enum class Metric { SquaredL2, L1, Emd1, Emd2 };

inline bool is_flow_metric(Metric m) {
  return m == Metric::Emd1 || m == Metric::Emd2;
}

inline std::string metric_name(Metric m) {
  switch (m) {
    case Metric::SquaredL2: return "sq";
    case Metric::L1: return "l1";
    case Metric::Emd1: return "emd1";
    case Metric::Emd2: return "emd2";
  }
  return "?";
}

inline Metric parse_metric(const std::string& s) {
  if (s == "sq") return Metric::SquaredL2;
  if (s == "l1") return Metric::L1;
  if (s == "emd1") return Metric::Emd1;
  if (s == "emd2") return Metric::Emd2;
  throw ConfigError("unknown metric '" + s + "' (expected sq|l1|emd1|emd2)");
}

inline double ground_cost(const std::vector<double>& a,
                          const std::vector<double>& b, Metric m) {
  double acc = 0.0;
  switch (m) {
    case Metric::SquaredL2:
    case Metric::Emd2:
      for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
      }
      return acc;
    case Metric::Emd1:
      for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
      }
      return std::sqrt(acc);
    case Metric::L1:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
  }
  return acc;
}

struct MatchResult {
  double cost = 0.0;
  std::vector<int> permutation;  // point j of A pairs with permutation[j] of B
};

struct FlowResult {
  double cost = 0.0;
  std::vector<std::vector<long long>> flow;  // flow[j][l]: A_j -> B_l
};

namespace detail {

inline std::vector<std::vector<double>> cost_matrix(const Pattern& a,
                                                    const Pattern& b,
                                                    Metric m) {
  std::size_t k = a.size();
  std::vector<std::vector<double>> c(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      c[i][j] = ground_cost(a.points[i], b.points[j], m);
  return c;
}

// Kuhn-Munkres with row/column potentials, shortest augmenting paths, O(k^3).
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Successive-shortest-paths min-cost flow with potentials; integer
// capacities, non-negative double costs.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : graph_(nodes) {}

  void add_edge(int from, int to, long long cap, double cost) {
    graph_[from].push_back({to, cap, cost, static_cast<int>(graph_[to].size())});
    graph_[to].push_back({from, 0, -cost, static_cast<int>(graph_[from].size()) - 1});
  }

  // Sends exactly `amount` from s to t; throws if infeasible.
  double solve(int s, int t, long long amount) {
    const double inf = std::numeric_limits<double>::infinity();
    int n = static_cast<int>(graph_.size());
    std::vector<double> pot(n, 0.0);
    double total = 0.0;
    while (amount > 0) {
      std::vector<double> dist(n, inf);
      std::vector<int> prev_node(n, -1), prev_edge(n, -1);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      dist[s] = 0.0;
      pq.emplace(0.0, s);
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u] + 1e-12) continue;
        for (std::size_t e = 0; e < graph_[u].size(); ++e) {
          const Edge& edge = graph_[u][e];
          if (edge.cap <= 0) continue;
          double reduced = std::max(0.0, edge.cost + pot[u] - pot[edge.to]);
          if (dist[u] + reduced < dist[edge.to] - 1e-15) {
            dist[edge.to] = dist[u] + reduced;
            prev_node[edge.to] = u;
            prev_edge[edge.to] = static_cast<int>(e);
            pq.emplace(dist[edge.to], edge.to);
          }
        }
      }
      check_data(dist[t] < inf, "flow problem infeasible (unequal totals?)");
      for (int v = 0; v < n; ++v)
        if (dist[v] < inf) pot[v] += dist[v];
      long long bottleneck = amount;
      for (int v = t; v != s; v = prev_node[v])
        bottleneck = std::min(bottleneck, graph_[prev_node[v]][prev_edge[v]].cap);
      for (int v = t; v != s; v = prev_node[v]) {
        Edge& e = graph_[prev_node[v]][prev_edge[v]];
        e.cap -= bottleneck;
        graph_[v][e.rev].cap += bottleneck;
        total += static_cast<double>(bottleneck) * e.cost;
      }
      amount -= bottleneck;
    }
    return total;
  }

  long long edge_flow(int from, std::size_t edge_index) const {
    const Edge& e = graph_[from][edge_index];
    return graph_[e.to][e.rev].cap;  // reverse capacity accumulates the flow
  }

 private:
  struct Edge {
    int to;
    long long cap;
    double cost;
    int rev;
  };
  std::vector<std::vector<Edge>> graph_;
};

}  // namespace detail

// Exact minimum matching cost between two unweighted k-point sets (Eq-style
// definition: minimum over bijections of summed ground costs).
inline MatchResult match_cost(const Pattern& a, const Pattern& b, Metric m) {
  check_data(!is_flow_metric(m), "match_cost expects sq or l1 metric");
  validate_pattern(a);
  validate_pattern(b);
  check_compatible(a, b);
  check_data(!a.weighted() && !b.weighted(),
             "match_cost expects unweighted patterns");
  auto cost = detail::cost_matrix(a, b, m);
  MatchResult res;
  res.permutation = detail::hungarian(cost);
  for (std::size_t j = 0; j < a.size(); ++j)
    res.cost += cost[j][res.permutation[j]];
  return res;
}

// Exhaustive oracle: enumerates all k! bijections. Refuses k > 8.
inline MatchResult brute_force_match(const Pattern& a, const Pattern& b,
                                     Metric m) {
  check_data(!is_flow_metric(m), "brute_force_match expects sq or l1 metric");
  validate_pattern(a);
  validate_pattern(b);
  check_compatible(a, b);
  check_data(a.size() <= 8, "brute_force_match refuses k > 8");
  auto cost = detail::cost_matrix(a, b, m);
  std::size_t k = a.size();
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  MatchResult best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += cost[j][perm[j]];
    if (total < best.cost) {
      best.cost = total;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Greedy feasible matching: scans A in input order, pairing each point with
// its nearest unmatched point of B (ties to the lowest index). Returns an
// upper bound on the exact cost; deterministic, O(k^2 d).
inline double approx_match_cost(const Pattern& a, const Pattern& b, Metric m) {
  check_data(!is_flow_metric(m), "approx_match_cost expects sq or l1 metric");
  validate_pattern(a);
  validate_pattern(b);
  check_compatible(a, b);
  std::size_t k = a.size();
  std::vector<char> taken(k, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (taken[j]) continue;
      double c = ground_cost(a.points[i], b.points[j], m);
      if (c < best) {
        best = c;
        best_j = j;
      }
    }
    taken[best_j] = 1;
    total += best;
  }
  return total;
}

// Exact earth mover's distance between equal-total-weight patterns, solved as
// integral min-cost flow on the complete bipartite graph.
inline FlowResult emd(const Pattern& a, const Pattern& b, Metric m) {
  check_data(is_flow_metric(m), "emd expects emd1 or emd2 metric");
  validate_pattern(a);
  validate_pattern(b);
  check_compatible(a, b);
  check_data(a.weighted() && b.weighted(), "emd expects weighted patterns");
  long long w = a.total_weight();
  check_data(w == b.total_weight(), "emd requires equal total weights");
  check_data(w > 0, "emd requires positive total weight");

  int k = static_cast<int>(a.size());
  int source = 0, sink = 2 * k + 1;
  detail::MinCostFlow mcf(2 * k + 2);
  std::vector<std::size_t> edge_base(k);
  for (int j = 0; j < k; ++j) mcf.add_edge(source, 1 + j, a.weights[j], 0.0);
  for (int j = 0; j < k; ++j) {
    edge_base[j] = 1;  // edge 0 on node 1+j is the reverse of the source arc
    for (int l = 0; l < k; ++l)
      mcf.add_edge(1 + j, 1 + k + l, w,
                   ground_cost(a.points[j], b.points[l], m));
  }
  for (int l = 0; l < k; ++l) mcf.add_edge(1 + k + l, sink, b.weights[l], 0.0);

  FlowResult res;
  res.cost = mcf.solve(source, sink, w);
  res.flow.assign(k, std::vector<long long>(k, 0));
  for (int j = 0; j < k; ++j)
    for (int l = 0; l < k; ++l)
      res.flow[j][l] = mcf.edge_flow(1 + j, edge_base[j] + static_cast<std::size_t>(l));
  return res;
}

// Greedy feasible flow: pushes each source's weight to the nearest sinks with
// remaining capacity. Upper bound on the exact EMD.
inline double approx_emd_cost(const Pattern& a, const Pattern& b, Metric m) {
  check_data(is_flow_metric(m), "approx_emd_cost expects emd1 or emd2");
  validate_pattern(a);
  validate_pattern(b);
  check_compatible(a, b);
  check_data(a.total_weight() == b.total_weight(),
             "approx_emd_cost requires equal total weights");
  std::size_t k = a.size();
  std::vector<long long> remaining = b.weights;
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    long long need = a.weights[j];
    while (need > 0) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_l = 0;
      for (std::size_t l = 0; l < k; ++l) {
        if (remaining[l] <= 0) continue;
        double c = ground_cost(a.points[j], b.points[l], m);
        if (c < best) {
          best = c;
          best_l = l;
        }
      }
      long long moved = std::min(need, remaining[best_l]);
      total += static_cast<double>(moved) * best;
      remaining[best_l] -= moved;
      need -= moved;
    }
  }
  return total;
}

// Matching cost through whichever kernel applies to the metric.
inline double pattern_distance(const Pattern& a, const Pattern& b, Metric m) {
  return is_flow_metric(m) ? emd(a, b, m).cost : match_cost(a, b, m).cost;
}

inline double approx_pattern_distance(const Pattern& a, const Pattern& b,
                                      Metric m) {
  return is_flow_metric(m) ? approx_emd_cost(a, b, m)
                           : approx_match_cost(a, b, m);
}

// Checks the metric's triangle-style inequalities on a concrete triple, with
// 1e-9 slack scaled by the operand magnitudes. SquaredL2/Emd2: relaxed
// triangle M(A,B) <= 2M(A,C)+2M(C,B) and the eps-form
// |M(A,B)-M(A,C)| <= (1+1/eps)M(B,C)+eps*M(A,B). L1/Emd1: plain triangle.
inline bool verify_match_triangle(const Pattern& a, const Pattern& b,
                                  const Pattern& c, double eps, Metric m) {
  check_config(eps > 0, "verify_match_triangle requires eps > 0");
  double ab = pattern_distance(a, b, m);
  double ac = pattern_distance(a, c, m);
  double cb = pattern_distance(c, b, m);
  double scale = std::max({1.0, ab, ac, cb});
  double slack = 1e-9 * scale;
  if (m == Metric::L1 || m == Metric::Emd1)
    return ab <= ac + cb + slack;
  bool relaxed = ab <= 2.0 * ac + 2.0 * cb + slack;
  double bc = pattern_distance(b, c, m);
  bool eps_form =
      std::abs(ab - ac) <= (1.0 + 1.0 / eps) * bc + eps * ab + slack;
  return relaxed && eps_form;
}

}  // namespace protoset
