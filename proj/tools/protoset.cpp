// Command-line front end: dataset generation, coreset construction, prototype
// solving, JL projection, experiment runs, and self-checks.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "protoset/coreset.hpp"
#include "protoset/harness.hpp"
#include "protoset/io.hpp"
#include "protoset/matching.hpp"
#include "protoset/prototype.hpp"
#include "protoset/reduce.hpp"

namespace {

using namespace protoset;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

Prototype read_prototype(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_data(in.good(), "cannot open " + path.string());
  std::string line;
  Prototype p;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json row = json::parse(line);
    if (row.contains("points")) {
      p.points = row["points"].get<std::vector<std::vector<double>>>();
      if (row.contains("weights"))
        p.weights = row["weights"].get<std::vector<long long>>();
      found = true;
      break;
    }
  }
  check_data(found, "no prototype found in " + path.string());
  validate_pattern(p);
  return p;
}

void write_prototype(const std::filesystem::path& path, const Prototype& p,
                     const json& meta) {
  std::ostringstream os;
  json head;
  head["meta"] = meta;
  os << head.dump() << '\n';
  json line;
  line["points"] = p.points;
  if (p.weighted()) line["weights"] = p.weights;
  os << line.dump() << '\n';
  atomic_write(path, os.str());
}

int cmd_gen(const std::string& type, std::size_t n, std::size_t items,
            std::size_t k, std::size_t dims, std::size_t solutions,
            long long weight, std::uint64_t seed, const std::string& out) {
  Rng rng(derive_seed(seed, "dataset"));
  if (type == "ensemble") {
    auto [inst, labels] =
        gen_ensemble_instance(items, k, dims, solutions, rng);
    write_instance(out, inst);
    std::filesystem::path lab(out);
    lab.replace_extension();
    write_labels(lab.string() + "_labels.json", labels);
    std::cout << "wrote " << inst.size() << " patterns (k=" << inst.k()
              << ", d=" << inst.dim() << ") to " << out << "\n";
  } else if (type == "blobs") {
    auto images = gen_blob_images(n, rng);
    Instance inst;
    for (std::size_t i = 0; i < images.size(); ++i) {
      Rng img_rng = rng.substream(100000 + i);
      inst.patterns.push_back(
          image_to_weighted_pattern(images[i], k, img_rng, weight));
    }
    write_instance(out, inst);
    std::cout << "wrote " << inst.size() << " weighted patterns (k=" << k
              << ", W=" << weight << ") to " << out << "\n";
  } else {
    throw ConfigError("unknown dataset type '" + type + "'");
  }
  return kExitOk;
}

int cmd_coreset(const std::string& in, double fraction, std::size_t size,
                double alpha, int trials, Metric metric, CostMode mode,
                std::uint64_t seed, const std::string& out) {
  Instance inst = read_instance(in);
  Rng pivot_rng(derive_seed(seed, "pivot_0"));
  auto [pivot, obj] = pick_init(inst, trials, pivot_rng, metric);
  (void)obj;
  SensitivityProfile prof = sensitivities(inst, pivot, alpha, mode, metric);
  std::size_t r = size > 0
                      ? size
                      : static_cast<std::size_t>(std::llround(
                            fraction * static_cast<double>(inst.size())));
  r = std::min(std::max<std::size_t>(r, 1), inst.size());
  Rng sample_rng(derive_seed(seed, "sample_0"));
  Coreset cs = sample_coreset(prof, r, sample_rng, instance_fingerprint(inst));
  write_coreset(out, cs);
  std::cout << "coreset: r=" << r << " pivot=" << pivot
            << " T=" << format_double(prof.t_sum) << " -> " << out << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& in, const std::string& coreset_path,
              Metric metric, int trials, int max_rounds, double rel_tol,
              std::uint64_t seed, const std::string& out) {
  Instance inst = read_instance(in);
  Instance target = inst;
  if (!coreset_path.empty()) {
    Coreset cs = read_coreset(coreset_path);
    check_data(cs.fingerprint == instance_fingerprint(inst),
               "coreset does not belong to this instance");
    target = coreset_instance(inst, cs);
  }
  Rng init_rng(derive_seed(seed, "init"));
  auto [idx, obj0] = pick_init(target, trials, init_rng, metric);
  (void)obj0;
  SolveReport report = alternating_minimize(target, target.patterns[idx],
                                            max_rounds, rel_tol, metric);
  double full_obj = objective(inst, report.prototype, metric);
  json meta;
  meta["seed"] = seed;
  meta["metric"] = metric_name(metric);
  meta["rounds"] = report.rounds;
  meta["converged"] = report.converged;
  meta["objective"] = full_obj;
  write_prototype(out, report.prototype, meta);
  std::cout << "solved in " << report.rounds
            << " rounds, objective=" << format_double(full_obj) << " -> "
            << out << "\n";
  return kExitOk;
}

int cmd_project(const std::string& in, const std::string& jl, double eps,
                std::uint64_t seed, const std::string& out) {
  Instance inst = read_instance(in);
  std::size_t m;
  if (jl == "auto") {
    m = jl_target_dim(inst.size(), inst.k(), eps, inst.dim());
  } else {
    m = static_cast<std::size_t>(std::stoull(jl));
    check_config(m >= 1 && m <= inst.dim(), "--jl dim must be in [1, d]");
  }
  if (m >= inst.dim()) {
    write_instance(out, inst);
    std::cout << "target dim " << m << " >= d, projection skipped\n";
    return kExitOk;
  }
  auto [lowered, proj] = jl_project(inst, m, derive_seed(seed, "jl"));
  write_instance(out, lowered);
  std::cout << "projected d=" << inst.dim() << " -> m=" << m
            << " (seed " << proj.seed << ") -> " << out << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& config_path, std::uint64_t seed_override,
             bool have_seed, const std::string& out_override) {
  std::ifstream in(config_path, std::ios::binary);
  check_config(in.good(), "cannot open config " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  ExperimentConfig cfg = parse_config(j);
  if (have_seed) {
    cfg.seed = seed_override;
    cfg.seed_set = true;
  }
  if (!out_override.empty()) cfg.out_path = out_override;
  check_config(!cfg.out_path.empty(), "eval requires an output path");
  ExperimentOutput result = run_experiment(cfg);
  for (const auto& row : result.rows)
    std::cout << row.run_label << ": objective="
              << format_double(row.objective)
              << " normalized=" << format_double(row.normalized_objective)
              << " gt=" << format_double(row.ground_truth_metric) << "\n";
  std::cout << "metrics -> " << cfg.out_path << "\n";
  return kExitOk;
}

// Quick self-checks of the matching inequalities and the estimator.
int cmd_validate(std::uint64_t seed) {
  Rng rng(seed);
  auto random_pattern = [&](std::size_t k, std::size_t d) {
    Pattern p;
    p.points.assign(k, std::vector<double>(d));
    for (auto& pt : p.points)
      for (auto& c : pt) c = rng.uniform();
    return p;
  };
  bool ok = true;

  int violations = 0;
  for (int t = 0; t < 2000; ++t) {
    std::size_t k = 1 + rng.index(5), d = 1 + rng.index(4);
    Pattern a = random_pattern(k, d), b = random_pattern(k, d),
            c = random_pattern(k, d);
    if (!verify_match_triangle(a, b, c, 0.5, Metric::SquaredL2)) ++violations;
    if (!verify_match_triangle(a, b, c, 0.5, Metric::L1)) ++violations;
  }
  std::cout << (violations == 0 ? "PASS" : "FAIL")
            << " triangle inequalities (" << violations << " violations)\n";
  ok = ok && violations == 0;

  // estimator unbiasedness on a small fixed instance
  Instance inst;
  for (int i = 0; i < 40; ++i) inst.patterns.push_back(random_pattern(4, 3));
  Prototype q = random_pattern(4, 3);
  SensitivityProfile prof =
      sensitivities(inst, 0, 3.0, CostMode::Exact, Metric::SquaredL2);
  double exact = objective(inst, q, Metric::SquaredL2);
  double mean = 0.0;
  int draws = 20000;
  for (int s = 0; s < draws; ++s) {
    Rng draw_rng(derive_seed(seed, 777000 + static_cast<std::uint64_t>(s)));
    Coreset cs = sample_coreset(prof, 1, draw_rng);
    mean += weighted_objective(inst, cs, q, Metric::SquaredL2);
  }
  mean /= draws;
  double rel = std::abs(mean - exact) / exact;
  bool est_ok = rel < 0.02;
  std::cout << (est_ok ? "PASS" : "FAIL")
            << " estimator unbiasedness (relative deviation "
            << format_double(rel) << ")\n";
  ok = ok && est_ok;

  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric prototype toolkit: matching kernels, sensitivity "
               "coresets, JL reduction, alternating-minimization solver"};
  app.require_subcommand(1);

  std::string metric_str = "sq", cost_mode_str = "exact";
  std::uint64_t seed = 1;
  std::string in_path, out_path, config_path, coreset_path;
  double fraction = 0.1, eps = 0.3, alpha = 3.0, rel_tol = 1e-6;
  int trials = 3, max_rounds = 100;
  std::string jl = "auto";

  auto* gen = app.add_subcommand("gen", "generate a dataset");
  std::string gen_type = "ensemble";
  std::size_t gen_n = 300, gen_items = 500, gen_k = 10, gen_dims = 10,
              gen_solutions = 200;
  long long gen_weight = 1000;
  gen->add_option("--type", gen_type, "ensemble|blobs");
  gen->add_option("--n", gen_n, "pattern count (blobs)");
  gen->add_option("--items", gen_items, "items to cluster (ensemble)");
  gen->add_option("--k", gen_k, "clusters / points per pattern");
  gen->add_option("--dims", gen_dims, "ambient dimension (ensemble)");
  gen->add_option("--solutions", gen_solutions, "clustering runs (ensemble)");
  gen->add_option("--weight", gen_weight, "total weight W (blobs)");
  gen->add_option("--seed", seed, "rng seed");
  gen->add_option("--out", out_path, "output pattern file")->required();

  auto* coreset = app.add_subcommand("coreset", "build a sensitivity coreset");
  std::size_t cs_size = 0;
  coreset->add_option("--in", in_path, "input pattern file")->required();
  coreset->add_option("--fraction", fraction, "coreset fraction of n");
  coreset->add_option("--size", cs_size, "explicit sample size (overrides fraction)");
  coreset->add_option("--alpha", alpha, "sensitivity alpha (> 1)");
  coreset->add_option("--trials", trials, "pivot boosting trials");
  coreset->add_option("--metric", metric_str, "sq|l1|emd1|emd2");
  coreset->add_option("--cost-mode", cost_mode_str, "exact|approx");
  coreset->add_option("--seed", seed, "rng seed");
  coreset->add_option("--out", out_path, "output coreset sidecar")->required();

  auto* solve = app.add_subcommand("solve", "solve for the prototype");
  solve->add_option("--in", in_path, "input pattern file")->required();
  solve->add_option("--coreset", coreset_path, "optional coreset sidecar");
  solve->add_option("--metric", metric_str, "sq|l1|emd2");
  solve->add_option("--trials", trials, "initialization trials");
  solve->add_option("--max-rounds", max_rounds, "solver round cap");
  solve->add_option("--rel-tol", rel_tol, "relative improvement tolerance");
  solve->add_option("--seed", seed, "rng seed");
  solve->add_option("--out", out_path, "output prototype file")->required();

  auto* project = app.add_subcommand("project", "JL-project an instance");
  project->add_option("--in", in_path, "input pattern file")->required();
  project->add_option("--jl", jl, "target dimension or 'auto'");
  project->add_option("--eps", eps, "JL epsilon for auto dimension");
  project->add_option("--seed", seed, "rng seed");
  project->add_option("--out", out_path, "output pattern file")->required();

  auto* eval = app.add_subcommand("eval", "run a configured experiment");
  bool eval_seed_set = false;
  eval->add_option("--config", config_path, "experiment config JSON")->required();
  eval->add_option("--seed", seed, "seed override")
      ->each([&](const std::string&) { eval_seed_set = true; });
  eval->add_option("--out", out_path, "metrics CSV override");

  auto* validate = app.add_subcommand("validate", "run built-in self-checks");
  validate->add_option("--seed", seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(gen_type, gen_n, gen_items, gen_k, gen_dims,
                     gen_solutions, gen_weight, seed, out_path);
    if (coreset->parsed())
      return cmd_coreset(in_path, fraction, cs_size, alpha, trials,
                         parse_metric(metric_str),
                         parse_cost_mode(cost_mode_str), seed, out_path);
    if (solve->parsed())
      return cmd_solve(in_path, coreset_path, parse_metric(metric_str), trials,
                       max_rounds, rel_tol, seed, out_path);
    if (project->parsed())
      return cmd_project(in_path, jl, eps, seed, out_path);
    if (eval->parsed())
      return cmd_eval(config_path, seed, eval_seed_set, out_path);
    if (validate->parsed()) return cmd_validate(seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
