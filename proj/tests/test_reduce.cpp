#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "protoset/reduce.hpp"
#include "test_util.hpp"

using namespace protoset;
using testutil::gaussian_instance;
using testutil::random_pattern;

TEST_CASE("jl_target_dim follows the log(nk)/eps^2 rule and caps at d") {
  std::size_t m = jl_target_dim(1000, 5, 0.3, 100000);
  double expected = std::ceil(4.0 * std::log(5000.0) / 0.09);
  CHECK(m == static_cast<std::size_t>(expected));
  CHECK(jl_target_dim(1000, 5, 0.3, 10) == 10);  // cap at d
  CHECK(jl_target_dim(2, 1, 0.9, 50) >= 1);
  CHECK_THROWS_AS(jl_target_dim(10, 2, 0.0, 5), ConfigError);
  CHECK_THROWS_AS(jl_target_dim(10, 2, 1.0, 5), ConfigError);
}

TEST_CASE("projection matrices are Rademacher and seed-deterministic") {
  Projection a = make_projection(20, 6, 99);
  Projection b = make_projection(20, 6, 99);
  Projection c = make_projection(20, 6, 100);
  CHECK(a.matrix == b.matrix);
  CHECK(a.matrix != c.matrix);
  double scale = 1.0 / std::sqrt(6.0);
  int plus = 0;
  for (double e : a.matrix) {
    CHECK(std::abs(std::abs(e) - scale) < 1e-15);
    if (e > 0) ++plus;
  }
  // both signs appear
  CHECK(plus > 0);
  CHECK(plus < static_cast<int>(a.matrix.size()));
  CHECK_THROWS_AS(make_projection(5, 6, 1), ConfigError);
  CHECK_THROWS_AS(make_projection(5, 0, 1), ConfigError);
}

TEST_CASE("project_point is the plain matrix-vector product") {
  Projection proj = make_projection(4, 2, 7);
  std::vector<double> x = {1.0, -2.0, 0.5, 3.0};
  auto y = project_point(proj, x);
  REQUIRE(y.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < 4; ++c) acc += proj.at(r, c) * x[c];
    CHECK(y[r] == doctest::Approx(acc));
  }
  std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_AS(project_point(proj, wrong), DataError);
}

TEST_CASE("random projections roughly preserve pairwise squared distances") {
  const std::size_t d = 400, m = 160, pts = 30;
  Rng rng(31);
  std::vector<std::vector<double>> xs(pts, std::vector<double>(d));
  for (auto& x : xs)
    for (auto& v : x) v = rng.normal();
  Projection proj = make_projection(d, m, 77);
  std::vector<std::vector<double>> ys(pts);
  for (std::size_t i = 0; i < pts; ++i) ys[i] = project_point(proj, xs[i]);

  int ok = 0, total = 0;
  for (std::size_t i = 0; i < pts; ++i)
    for (std::size_t j = i + 1; j < pts; ++j) {
      double orig = 0.0, low = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        double t = xs[i][c] - xs[j][c];
        orig += t * t;
      }
      for (std::size_t c = 0; c < m; ++c) {
        double t = ys[i][c] - ys[j][c];
        low += t * t;
      }
      ++total;
      if (std::abs(low - orig) <= 0.5 * orig) ++ok;
    }
  CHECK(ok >= static_cast<int>(0.95 * total));
}

TEST_CASE("jl_project keeps order, weights and shapes") {
  Rng rng(41);
  Instance inst;
  for (int i = 0; i < 6; ++i)
    inst.patterns.push_back(testutil::random_weighted_pattern(3, 10, 9, rng));
  inst.pattern_weights = {1.0, 2.0, 1.0, 0.5, 1.0, 1.0};
  auto [low, proj] = jl_project(inst, 4, 55);
  CHECK(proj.target_dim == 4);
  CHECK(proj.source_dim == 10);
  REQUIRE(low.size() == 6);
  CHECK(low.pattern_weights == inst.pattern_weights);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(low.patterns[i].dim() == 4);
    CHECK(low.patterns[i].weights == inst.patterns[i].weights);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(low.patterns[i].points[j] ==
            project_point(proj, inst.patterns[i].points[j]));
  }
  CHECK_THROWS_AS(jl_project(inst, 11, 1), ConfigError);
}

TEST_CASE("lifting recovers the prototype on identical patterns") {
  Rng rng(43);
  Pattern p = random_pattern(3, 8, rng);
  Instance inst;
  for (int i = 0; i < 5; ++i) inst.patterns.push_back(p);
  auto [low, proj] = jl_project(inst, 3, 9);
  Prototype lifted =
      lift_solution(inst, low, low.patterns[0], Metric::SquaredL2);
  REQUIRE(lifted.size() == 3);
  REQUIRE(lifted.dim() == 8);
  CHECK(objective(inst, lifted, Metric::SquaredL2) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lifting applies the optimal per-slot update for fixed matchings") {
  Rng rng(44);
  Instance inst = gaussian_instance(25, 3, 12, rng);
  auto [low, proj] = jl_project(inst, 5, 13);
  Prototype low_q = project_pattern(proj, random_pattern(3, 12, rng));
  Prototype lifted = lift_solution(inst, low, low_q, Metric::SquaredL2);

  auto matches = match_all(low, low_q, Metric::SquaredL2);
  auto [expected, empty] =
      update_prototype(inst, matches, std::nullopt, Metric::SquaredL2);
  (void)empty;
  REQUIRE(lifted.size() == expected.size());
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t c = 0; c < 12; ++c)
      CHECK(lifted.points[l][c] == doctest::Approx(expected.points[l][c]));
}

TEST_CASE("lifting a good projected solution stays close to the full optimum") {
  Rng rng(45);
  Instance inst = gaussian_instance(60, 3, 64, rng);
  Rng init_rng(3);
  auto [idx, obj0] = pick_init(inst, 5, init_rng, Metric::SquaredL2);
  (void)obj0;
  SolveReport full =
      alternating_minimize(inst, inst.patterns[idx], 50, 1e-6, Metric::SquaredL2);

  std::size_t m = jl_target_dim(60, 3, 0.5, 64);
  auto [low, proj] = jl_project(inst, m, 21);
  SolveReport lowrep = alternating_minimize(low, low.patterns[idx], 50, 1e-6,
                                            Metric::SquaredL2);
  Prototype lifted = lift_solution(inst, low, lowrep.prototype, Metric::SquaredL2);
  double lifted_obj = objective(inst, lifted, Metric::SquaredL2);
  double full_obj = full.objective_history.back();
  REQUIRE(full_obj > 0.0);
  CHECK(lifted_obj <= 2.0 * full_obj);
}

TEST_CASE("emd2 lifting carries the prototype weights") {
  Rng rng(46);
  Instance inst;
  for (int i = 0; i < 8; ++i)
    inst.patterns.push_back(testutil::random_weighted_pattern(3, 6, 9, rng));
  auto [low, proj] = jl_project(inst, 3, 8);
  Prototype lifted = lift_solution(inst, low, low.patterns[2], Metric::Emd2);
  CHECK(lifted.weights == low.patterns[2].weights);
  CHECK(lifted.total_weight() == 9);
}
