#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "protoset/coreset.hpp"
#include "protoset/io.hpp"
#include "protoset/kmeans.hpp"
#include "protoset/matching.hpp"
#include "protoset/pattern.hpp"
#include "protoset/prototype.hpp"
#include "protoset/reduce.hpp"
#include "protoset/rng.hpp"

namespace protoset {

using Image = std::vector<std::vector<double>>;  // [row][col], >= 0

// ---------------------------------------------------------------------------
// dataset generators
// ---------------------------------------------------------------------------

// Ensemble-clustering instance: `items` points from `clusters` Gaussians,
// clustered `solutions` times by Lloyd's algorithm from different seeds. Each
// clustering becomes a pattern of `clusters` binary membership vectors in
// R^items, so d = items. Returns the instance and the ground-truth labels.
inline std::pair<Instance, std::vector<int>> gen_ensemble_instance(
    std::size_t items, std::size_t clusters, std::size_t dims,
    std::size_t solutions, Rng& rng) {
  check_data(items >= clusters && clusters >= 1,
             "gen_ensemble_instance requires items >= k >= 1");
  check_config(solutions >= 1, "need at least one clustering solution");

  std::vector<std::vector<double>> centers(clusters,
                                           std::vector<double>(dims));
  for (auto& c : centers)
    for (auto& x : c) x = 3.0 * rng.normal();

  std::vector<std::vector<double>> points(items, std::vector<double>(dims));
  std::vector<int> labels(items);
  for (std::size_t i = 0; i < items; ++i) {
    int lab = static_cast<int>(rng.index(clusters));
    labels[i] = lab;
    for (std::size_t c = 0; c < dims; ++c)
      points[i][c] = centers[lab][c] + rng.normal();
  }

  Instance inst;
  inst.patterns.reserve(solutions);
  for (std::size_t s = 0; s < solutions; ++s) {
    Rng run_rng = rng.substream(1000 + s);
    KMeansResult km = lloyd_kmeans(points, {}, clusters, run_rng);
    Pattern p;
    p.points.assign(clusters, std::vector<double>(items, 0.0));
    for (std::size_t i = 0; i < items; ++i)
      p.points[km.assignment[i]][i] = 1.0;
    inst.patterns.push_back(std::move(p));
  }
  return {std::move(inst), std::move(labels)};
}

// Binary encoding of explicit labels, for tests and ground-truth prototypes.
inline Pattern labels_to_pattern(const std::vector<int>& labels,
                                 std::size_t clusters) {
  Pattern p;
  p.points.assign(clusters, std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    p.points[labels[i]][i] = 1.0;
  return p;
}

// Synthetic digit-like images: a fixed set of Gaussian blobs per generator
// seed, rendered with per-image jitter plus light noise.
inline std::vector<Image> gen_blob_images(std::size_t count, Rng& rng,
                                          std::size_t side = 28,
                                          std::size_t blobs = 3) {
  check_config(count >= 1 && side >= 8, "bad blob image parameters");
  struct Blob {
    double row, col, amp, sigma;
  };
  std::vector<Blob> base(blobs);
  for (auto& b : base) {
    b.row = rng.uniform(4.0, static_cast<double>(side) - 4.0);
    b.col = rng.uniform(4.0, static_cast<double>(side) - 4.0);
    b.amp = rng.uniform(0.6, 1.0);
    b.sigma = rng.uniform(1.5, 2.5);
  }
  std::vector<Image> images;
  images.reserve(count);
  for (std::size_t im = 0; im < count; ++im) {
    std::vector<Blob> jittered = base;
    for (auto& b : jittered) {
      b.row += 0.7 * rng.normal();
      b.col += 0.7 * rng.normal();
    }
    Image img(side, std::vector<double>(side, 0.0));
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c) {
        double v = 0.0;
        for (const auto& b : jittered) {
          double dr = static_cast<double>(r) - b.row;
          double dc = static_cast<double>(c) - b.col;
          v += b.amp * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
        }
        v += 0.01 * rng.uniform();
        img[r][c] = v < 0.02 ? 0.0 : v;
      }
    images.push_back(std::move(img));
  }
  return images;
}

// PGM loader (plain P2 and binary P5).
inline Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_data(in.good(), "cannot open " + path.string());
  std::string magic;
  in >> magic;
  check_data(magic == "P2" || magic == "P5", "not a PGM file: " + path.string());
  auto next_token = [&]() -> long {
    for (;;) {
      int c = in.peek();
      check_data(c != EOF, "truncated PGM: " + path.string());
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        long v;
        in >> v;
        return v;
      }
    }
  };
  long w = next_token(), h = next_token(), maxval = next_token();
  check_data(w > 0 && h > 0 && maxval > 0, "bad PGM header: " + path.string());
  Image img(h, std::vector<double>(w, 0.0));
  if (magic == "P2") {
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) img[r][c] = static_cast<double>(next_token());
  } else {
    in.get();  // single whitespace after maxval
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        int byte = in.get();
        check_data(byte != EOF, "truncated PGM data: " + path.string());
        img[r][c] = static_cast<double>(byte);
      }
  }
  return img;
}

// ---------------------------------------------------------------------------
// image -> weighted pattern
// ---------------------------------------------------------------------------

namespace detail {

// Largest-remainder rounding of non-negative reals to integers summing to W.
inline std::vector<long long> round_to_total(const std::vector<double>& raw,
                                             long long total) {
  double sum = 0.0;
  for (double v : raw) sum += v;
  check_data(sum > 0, "cannot round an all-zero mass vector");
  std::vector<long long> out(raw.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double scaled = raw[i] / sum * static_cast<double>(total);
    out[i] = static_cast<long long>(std::floor(scaled));
    assigned += out[i];
    remainders.emplace_back(-(scaled - std::floor(scaled)), i);
  }
  std::sort(remainders.begin(), remainders.end());
  for (long long leftover = total - assigned; leftover > 0; --leftover)
    out[remainders[static_cast<std::size_t>(total - assigned - leftover)].second] += 1;
  return out;
}

}  // namespace detail

// Represents an image as k weighted 2D points: weighted k-means on the pixel
// coordinates, cluster weights = per-cluster intensity sums, rounded so the
// totals match the shared target W exactly.
inline Pattern image_to_weighted_pattern(const Image& image, std::size_t k,
                                         Rng& rng, long long total_weight) {
  check_config(k >= 1, "image_to_weighted_pattern requires k >= 1");
  check_config(total_weight > 0, "total weight must be positive");
  std::vector<std::vector<double>> coords;
  std::vector<double> intensity;
  for (std::size_t r = 0; r < image.size(); ++r)
    for (std::size_t c = 0; c < image[r].size(); ++c) {
      check_data(image[r][c] >= 0 && std::isfinite(image[r][c]),
                 "image intensities must be finite and non-negative");
      if (image[r][c] > 0) {
        coords.push_back({static_cast<double>(c), static_cast<double>(r)});
        intensity.push_back(image[r][c]);
      }
    }
  check_data(!coords.empty(), "image has no positive pixel");
  check_data(coords.size() >= k, "fewer positive pixels than k");

  KMeansResult km = lloyd_kmeans(coords, intensity, k, rng);
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < coords.size(); ++i)
    mass[km.assignment[i]] += intensity[i];

  Pattern p;
  p.points = std::move(km.centers);
  p.weights = detail::round_to_total(mass, total_weight);
  return p;
}

// ---------------------------------------------------------------------------
// ground-truth metrics
// ---------------------------------------------------------------------------

// Percentage of items whose argmax membership slot disagrees with the ground
// truth, after the best slot/label alignment (Hungarian on the agreement
// counts). Ties in the argmax go to the lowest slot.
inline double misclustered_percentage(const Prototype& proto,
                                      const std::vector<int>& truth) {
  std::size_t items = proto.dim();
  std::size_t k = proto.size();
  check_data(items == truth.size(), "prototype dimension must equal item count");
  int max_label = 0;
  for (int t : truth) {
    check_data(t >= 0, "labels must be non-negative");
    max_label = std::max(max_label, t);
  }
  std::size_t kk = std::max(k, static_cast<std::size_t>(max_label) + 1);

  std::vector<int> pred(items, 0);
  for (std::size_t i = 0; i < items; ++i) {
    double best = proto.points[0][i];
    int best_j = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (proto.points[j][i] > best) {
        best = proto.points[j][i];
        best_j = static_cast<int>(j);
      }
    pred[i] = best_j;
  }

  std::vector<std::vector<double>> cost(kk, std::vector<double>(kk, 0.0));
  for (std::size_t i = 0; i < items; ++i)
    cost[pred[i]][truth[i]] -= 1.0;  // maximize agreement
  std::vector<int> align = protoset::detail::hungarian(cost);
  double agreed = 0.0;
  for (std::size_t j = 0; j < kk; ++j) agreed -= cost[j][align[j]];
  return 100.0 * (static_cast<double>(items) - agreed) /
         static_cast<double>(items);
}

// x/Ave: matching cost between the full-data prototype and the coreset
// prototype, over the average matching cost of the input patterns to the
// full-data prototype.
inline double x_over_ave(const Prototype& full_proto,
                         const Prototype& coreset_proto, const Instance& inst,
                         Metric m) {
  double x = pattern_distance(full_proto, coreset_proto, m);
  double ave = objective(inst, full_proto, m) / static_cast<double>(inst.size());
  if (ave == 0.0) {
    check_data(x == 0.0, "x/Ave undefined: zero average cost, nonzero x");
    return 0.0;
  }
  return x / ave;
}

// ---------------------------------------------------------------------------
// experiment configuration + runner
// ---------------------------------------------------------------------------

struct DatasetSpec {
  enum class Kind { Ensemble, Blobs, File };
  Kind kind = Kind::Ensemble;
  // ensemble
  std::size_t items = 500;
  std::size_t clusters = 10;
  std::size_t dims = 10;
  std::size_t solutions = 200;
  // blob images
  std::size_t count = 300;
  std::size_t image_k = 30;
  long long image_weight = 1000;
  std::size_t image_side = 28;
  // file
  std::string path;
  std::string labels_path;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  Metric metric = Metric::SquaredL2;
  std::vector<double> fractions{0.05, 0.10, 0.20, 0.30};
  double alpha = 3.0;
  int trials = 3;
  double eps = 0.3;
  bool jl = false;
  std::size_t jl_dim = 0;  // 0 = auto via jl_target_dim(eps_jl)
  double eps_jl = 0.3;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int max_rounds = 100;
  double rel_tol = 1e-6;
  CostMode cost_mode = CostMode::Exact;
  std::string out_path;
  // Wall-clock columns can be disabled to make the CSV fully deterministic.
  bool record_time = true;
};

inline void validate_config(const ExperimentConfig& cfg) {
  check_config(cfg.seed_set, "config must set an explicit seed");
  check_config(!cfg.fractions.empty(), "at least one coreset fraction required");
  double prev = 0.0;
  for (double f : cfg.fractions) {
    check_config(f > 0.0 && f <= 1.0, "fractions must lie in (0, 1]");
    check_config(f >= prev, "fractions must be sorted ascending");
    prev = f;
  }
  check_config(cfg.alpha > 1.0, "alpha must be > 1");
  check_config(cfg.trials >= 1, "trials must be >= 1");
  check_config(cfg.max_rounds >= 1, "max_rounds must be >= 1");
  check_config(cfg.rel_tol >= 0.0, "rel_tol must be >= 0");
  if (cfg.jl)
    check_config(cfg.metric == Metric::SquaredL2 || cfg.metric == Metric::Emd2,
                 "JL projection applies to squared-distance metrics only");
}

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("dataset")) {
      const json& d = j["dataset"];
      std::string type = d.value("type", "ensemble");
      if (type == "ensemble") {
        cfg.dataset.kind = DatasetSpec::Kind::Ensemble;
        cfg.dataset.items = d.value("items", cfg.dataset.items);
        cfg.dataset.clusters = d.value("k", cfg.dataset.clusters);
        cfg.dataset.dims = d.value("dims", cfg.dataset.dims);
        cfg.dataset.solutions = d.value("solutions", cfg.dataset.solutions);
      } else if (type == "blobs") {
        cfg.dataset.kind = DatasetSpec::Kind::Blobs;
        cfg.dataset.count = d.value("count", cfg.dataset.count);
        cfg.dataset.image_k = d.value("k", cfg.dataset.image_k);
        cfg.dataset.image_weight = d.value("weight", cfg.dataset.image_weight);
        cfg.dataset.image_side = d.value("side", cfg.dataset.image_side);
      } else if (type == "file") {
        cfg.dataset.kind = DatasetSpec::Kind::File;
        cfg.dataset.path = d.at("path").get<std::string>();
        cfg.dataset.labels_path = d.value("labels", std::string());
      } else {
        throw ConfigError("unknown dataset type '" + type + "'");
      }
    }
    if (j.contains("metric")) cfg.metric = parse_metric(j["metric"]);
    if (j.contains("fractions"))
      cfg.fractions = j["fractions"].get<std::vector<double>>();
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.eps = j.value("eps", cfg.eps);
    if (j.contains("jl")) {
      if (j["jl"].is_string()) {
        std::string v = j["jl"].get<std::string>();
        if (v == "auto") {
          cfg.jl = true;
          cfg.jl_dim = 0;
        } else if (v == "off") {
          cfg.jl = false;
        } else {
          throw ConfigError("jl must be 'auto', 'off', or a dimension");
        }
      } else {
        cfg.jl = true;
        cfg.jl_dim = j["jl"].get<std::size_t>();
      }
    }
    cfg.eps_jl = j.value("eps_jl", cfg.eps_jl);
    if (j.contains("seed")) {
      cfg.seed = j["seed"].get<std::uint64_t>();
      cfg.seed_set = true;
    }
    cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
    cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
    if (j.contains("cost_mode"))
      cfg.cost_mode = parse_cost_mode(j["cost_mode"]);
    cfg.out_path = j.value("out", cfg.out_path);
    cfg.record_time = j.value("record_time", cfg.record_time);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

struct MetricsRow {
  std::string run_label;
  double fraction = 1.0;
  double objective = 0.0;
  double normalized_objective = 1.0;
  double wall_time_s = 0.0;
  double normalized_time = 1.0;
  double ground_truth_metric = 0.0;
  std::uint64_t seed = 0;
};

inline std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "run_label,fraction,objective,normalized_objective,wall_time_s,"
        "normalized_time,ground_truth_metric,seed\n";
  for (const auto& r : rows) {
    os << r.run_label << ',' << format_double(r.fraction) << ','
       << format_double(r.objective) << ','
       << format_double(r.normalized_objective) << ','
       << format_double(r.wall_time_s) << ','
       << format_double(r.normalized_time) << ','
       << format_double(r.ground_truth_metric) << ',' << r.seed << '\n';
  }
  return os.str();
}

struct ExperimentOutput {
  std::vector<MetricsRow> rows;
  Prototype baseline_prototype;
  std::vector<Prototype> coreset_prototypes;
  std::vector<Coreset> coresets;
  std::vector<std::vector<double>> objective_histories;  // baseline first
};

namespace detail {

inline Instance build_dataset(const ExperimentConfig& cfg,
                              std::vector<int>& labels, bool& have_labels) {
  Rng data_rng(derive_seed(cfg.seed, "dataset"));
  switch (cfg.dataset.kind) {
    case DatasetSpec::Kind::Ensemble: {
      auto [inst, lab] =
          gen_ensemble_instance(cfg.dataset.items, cfg.dataset.clusters,
                                cfg.dataset.dims, cfg.dataset.solutions,
                                data_rng);
      labels = std::move(lab);
      have_labels = true;
      return std::move(inst);
    }
    case DatasetSpec::Kind::Blobs: {
      auto images = gen_blob_images(cfg.dataset.count, data_rng,
                                    cfg.dataset.image_side);
      Instance inst;
      inst.patterns.reserve(images.size());
      for (std::size_t i = 0; i < images.size(); ++i) {
        Rng img_rng = data_rng.substream(100000 + i);
        inst.patterns.push_back(image_to_weighted_pattern(
            images[i], cfg.dataset.image_k, img_rng, cfg.dataset.image_weight));
      }
      have_labels = false;
      return inst;
    }
    case DatasetSpec::Kind::File: {
      Instance inst = read_instance(cfg.dataset.path);
      if (!cfg.dataset.labels_path.empty()) {
        labels = read_labels(cfg.dataset.labels_path);
        have_labels = true;
      } else {
        have_labels = false;
      }
      return inst;
    }
  }
  throw ConfigError("unreachable dataset kind");
}

}  // namespace detail

// Runs the full coreset-vs-baseline comparison: a full-data solve, then one
// solve per coreset fraction (the coreset row's wall time includes pivot
// selection, sensitivities, and sampling). All randomness derives from
// cfg.seed via labeled substreams.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  using Clock = std::chrono::steady_clock;

  std::vector<int> labels;
  bool have_labels = false;
  Instance inst = detail::build_dataset(cfg, labels, have_labels);
  validate_instance(inst);
  std::size_t n = inst.size();
  std::string fingerprint = instance_fingerprint(inst);

  // optional JL projection of the working instance
  Instance working;
  std::optional<Projection> proj;
  if (cfg.jl) {
    std::size_t m = cfg.jl_dim > 0
                        ? std::min(cfg.jl_dim, inst.dim())
                        : jl_target_dim(n, inst.k(), cfg.eps_jl, inst.dim());
    if (m < inst.dim()) {
      auto [lowered, p] = jl_project(inst, m, derive_seed(cfg.seed, "jl"));
      working = std::move(lowered);
      proj = std::move(p);
    }
  }
  const Instance& solve_inst = proj ? working : inst;

  auto solve_on = [&](const Instance& target, std::uint64_t init_seed) {
    Rng init_rng(init_seed);
    auto [idx, obj] = pick_init(target, cfg.trials, init_rng, cfg.metric);
    (void)obj;
    return alternating_minimize(target, target.patterns[idx], cfg.max_rounds,
                                cfg.rel_tol, cfg.metric);
  };
  auto to_full_dim = [&](const Prototype& q) {
    return proj ? lift_solution(inst, working, q, cfg.metric) : q;
  };

  ExperimentOutput out;

  // baseline on full data
  auto t0 = Clock::now();
  SolveReport base_report = solve_on(solve_inst, derive_seed(cfg.seed, "init_full"));
  Prototype base_proto = to_full_dim(base_report.prototype);
  double base_time =
      std::chrono::duration<double>(Clock::now() - t0).count();
  double base_obj = objective(inst, base_proto, cfg.metric);
  out.baseline_prototype = base_proto;
  out.objective_histories.push_back(base_report.objective_history);

  MetricsRow base_row;
  base_row.run_label = "full";
  base_row.fraction = 1.0;
  base_row.objective = base_obj;
  base_row.normalized_objective = 1.0;
  base_row.wall_time_s = cfg.record_time ? base_time : 0.0;
  base_row.normalized_time = 1.0;
  base_row.ground_truth_metric =
      have_labels ? misclustered_percentage(base_proto, labels) : 0.0;
  base_row.seed = cfg.seed;
  out.rows.push_back(base_row);

  // One pivot and one sensitivity profile serve every fraction: the sampling
  // distribution does not depend on r, so the construction is shared
  // preprocessing rather than per-fraction work.
  Rng pivot_rng(derive_seed(cfg.seed, "pivot"));
  auto [pivot, pivot_obj] = pick_init(solve_inst, cfg.trials, pivot_rng, cfg.metric);
  (void)pivot_obj;
  SensitivityProfile prof =
      sensitivities(solve_inst, pivot, cfg.alpha, cfg.cost_mode, cfg.metric);

  for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
    double f = cfg.fractions[fi];
    auto tf = Clock::now();

    std::size_t r = static_cast<std::size_t>(std::llround(
        f * static_cast<double>(n)));
    r = std::min(std::max<std::size_t>(r, 1), n);
    Rng sample_rng(derive_seed(cfg.seed, "sample_" + std::to_string(fi)));
    Coreset cs = sample_coreset(prof, r, sample_rng, fingerprint);

    Instance cs_inst = coreset_instance(solve_inst, cs);
    SolveReport cs_report = solve_on(
        cs_inst, derive_seed(cfg.seed, "init_coreset_" + std::to_string(fi)));
    Prototype cs_proto = to_full_dim(cs_report.prototype);
    double cs_time = std::chrono::duration<double>(Clock::now() - tf).count();
    double cs_obj = objective(inst, cs_proto, cfg.metric);

    MetricsRow row;
    row.run_label =
        "coreset_" + format_double(std::round(f * 1000.0) / 10.0) + "pct";
    row.fraction = f;
    row.objective = cs_obj;
    // a zero-objective baseline reports ratio 1.0 by convention
    row.normalized_objective = base_obj == 0.0 ? 1.0 : cs_obj / base_obj;
    row.wall_time_s = cfg.record_time ? cs_time : 0.0;
    row.normalized_time =
        cfg.record_time && base_time > 0.0 ? cs_time / base_time : 1.0;
    row.ground_truth_metric =
        have_labels ? misclustered_percentage(cs_proto, labels)
                    : x_over_ave(base_proto, cs_proto, inst, cfg.metric);
    row.seed = cfg.seed;
    out.rows.push_back(row);
    out.coreset_prototypes.push_back(std::move(cs_proto));
    out.coresets.push_back(std::move(cs));
    out.objective_histories.push_back(cs_report.objective_history);
  }

  if (!cfg.out_path.empty()) {
    std::filesystem::path csv_path(cfg.out_path);
    atomic_write(csv_path, metrics_to_csv(out.rows));

    std::filesystem::path stem = csv_path;
    stem.replace_extension();

    std::ostringstream protos;
    json meta;
    meta["meta"]["seed"] = cfg.seed;
    meta["meta"]["metric"] = metric_name(cfg.metric);
    meta["meta"]["alpha"] = cfg.alpha;
    meta["meta"]["trials"] = cfg.trials;
    meta["meta"]["max_rounds"] = cfg.max_rounds;
    meta["meta"]["rel_tol"] = cfg.rel_tol;
    meta["meta"]["cost_mode"] =
        cfg.cost_mode == CostMode::Exact ? "exact" : "approx";
    meta["meta"]["jl_dim"] = proj ? proj->target_dim : 0;
    meta["meta"]["jl_seed"] = proj ? proj->seed : 0;
    protos << meta.dump() << '\n';
    auto dump_proto = [&](const std::string& label, const Prototype& p) {
      json line;
      line["label"] = label;
      line["points"] = p.points;
      if (p.weighted()) line["weights"] = p.weights;
      protos << line.dump() << '\n';
    };
    dump_proto("full", out.baseline_prototype);
    for (std::size_t fi = 0; fi < out.coreset_prototypes.size(); ++fi)
      dump_proto(out.rows[fi + 1].run_label, out.coreset_prototypes[fi]);
    atomic_write(stem.string() + "_prototypes.jsonl", protos.str());

    for (std::size_t fi = 0; fi < out.coresets.size(); ++fi)
      write_coreset(stem.string() + "_" + out.rows[fi + 1].run_label + ".jsonl",
                    out.coresets[fi]);
  }
  return out;
}

}  // namespace protoset
