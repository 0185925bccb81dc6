#include "gwdr/run.hpp"

#include "gwdr/affinity.hpp"
#include "gwdr/barycenter.hpp"
#include "gwdr/embedding.hpp"
#include "gwdr/matrix_io.hpp"
#include "gwdr/metrics.hpp"
#include "gwdr/solver.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace gwdr {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct LoadedData {
  DataMatrix X;
  std::optional<LabelVector> truth;
};

LoadedData load_data(const RunConfig& config) {
  if (config.blobs) {
    BlobData blobs = make_blobs(*config.blobs);
    return LoadedData{std::move(blobs.X), std::move(blobs.labels)};
  }
  if (config.input_path.empty()) throw ConfigError("no input: set input path or blobs spec");
  if (!fs::exists(config.input_path)) throw ConfigError(config.input_path + ": no such file");
  DataMatrix X(read_csv_matrix(config.input_path));
  std::optional<LabelVector> truth;
  if (!config.labels_path.empty()) {
    if (!fs::exists(config.labels_path)) throw ConfigError(config.labels_path + ": no such file");
    truth = read_csv_labels(config.labels_path);
    if (truth->size() != static_cast<std::size_t>(X.samples()))
      throw ConfigError("labels length does not match the sample count");
  }
  return LoadedData{std::move(X), std::move(truth)};
}

Matrix build_kernel(const DataMatrix& X, const KernelConfig& kc) {
  switch (kc.kind) {
    case KernelKind::gram: return gram_kernel(X).values;
    case KernelKind::mds: return mds_kernel(X).values;
    case KernelKind::laplacian: return graph_laplacian(knn_graph(X, kc.knn)).values;
    case KernelKind::sne: return sne_affinity(X, Perplexity(kc.xi)).values;
    case KernelKind::entropic: return entropic_affinity(X, Perplexity(kc.xi)).values;
  }
  throw ConfigError("unknown kernel kind");
}

json config_echo(const RunConfig& c) {
  json j;
  j["input"] = c.input_path;
  j["labels"] = c.labels_path;
  j["task"] = to_string(c.task);
  j["kernel"] = {{"kind", to_string(c.kernel.kind)}, {"xi", c.kernel.xi}, {"knn", c.kernel.knn}};
  j["n"] = c.n;
  j["d"] = c.d;
  j["loss"] = to_string(c.loss);
  j["model"] = to_string(c.model);
  j["alpha"] = c.alpha;
  j["alpha_grid"] = c.alpha_grid.empty() ? default_alpha_grid() : c.alpha_grid;
  j["seeds"] = c.seeds;
  j["solver"] = {{"max_cg_iters", c.solver.max_cg_iters},
                 {"rel_tol", c.solver.rel_tol},
                 {"restarts", c.solver.restarts},
                 {"step_policy",
                  c.solver.step_policy == StepPolicy::armijo ? "armijo" : "exact_quadratic"}};
  j["gwdr"] = {{"lr", c.adam.lr},
               {"beta1", c.adam.beta1},
               {"beta2", c.adam.beta2},
               {"eps", c.adam.eps},
               {"z_steps_per_block", c.z_steps_per_block},
               {"bcd_iters", c.bcd_iters}};
  j["output_dir"] = c.output_dir;
  j["image_rows"] = c.image_rows;
  j["image_width"] = c.image_width;
  if (c.blobs) {
    j["blobs"] = {{"samples", c.blobs->samples},
                  {"clusters", c.blobs->clusters},
                  {"dim", c.blobs->dim},
                  {"separation", c.blobs->separation},
                  {"seed", c.blobs->seed}};
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw CsvError(path.string() + ": cannot open for writing");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// flat metrics object; keys needing ground truth are present only when it is
struct SeedMetrics {
  int effective_clusters = 0;
  std::optional<double> ari, homogeneity_score, silhouette_score;

  json to_json() const {
    json j;
    j["effective_clusters"] = effective_clusters;
    if (ari) j["ari"] = *ari;
    if (homogeneity_score) j["homogeneity"] = *homogeneity_score;
    if (silhouette_score) j["silhouette"] = *silhouette_score;
    return j;
  }
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  SeedMetrics metrics;
  double final_cost = 0.0;
  double solve_seconds = 0.0;
};

json aggregate_metrics(const std::vector<SeedOutcome>& outcomes) {
  auto stat = [&](auto getter) -> std::optional<json> {
    std::vector<double> vals;
    for (const auto& o : outcomes) {
      const auto v = getter(o);
      if (v) vals.push_back(*v);
    }
    if (vals.empty()) return std::nullopt;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    return json{{"mean", mean}, {"std", std::sqrt(var)}};
  };

  json agg;
  if (auto a = stat([](const SeedOutcome& o) { return o.metrics.ari; })) agg["ari"] = *a;
  if (auto h = stat([](const SeedOutcome& o) { return o.metrics.homogeneity_score; }))
    agg["homogeneity"] = *h;
  if (auto s = stat([](const SeedOutcome& o) { return o.metrics.silhouette_score; }))
    agg["silhouette"] = *s;
  if (auto e = stat([](const SeedOutcome& o) {
        return std::optional<double>(static_cast<double>(o.metrics.effective_clusters));
      }))
    agg["effective_clusters"] = *e;
  if (auto c = stat([](const SeedOutcome& o) { return std::optional<double>(o.final_cost); }))
    agg["final_cost"] = *c;
  return agg;
}

json metrics_document(const std::vector<SeedOutcome>& outcomes) {
  json per_seed = json::array();
  for (const auto& o : outcomes) {
    json row;
    row["seed"] = o.seed;
    row["metrics"] = o.metrics.to_json();
    row["final_cost"] = o.final_cost;
    per_seed.push_back(row);
  }
  return json{{"per_seed", per_seed}, {"aggregate", aggregate_metrics(outcomes)}};
}

SeedMetrics sample_metrics(const HardClustering& clustering,
                           const std::optional<LabelVector>& truth) {
  SeedMetrics m;
  m.effective_clusters = clustering.effective_clusters;
  if (truth) {
    m.ari = adjusted_rand_index(*truth, clustering.labels);
    m.homogeneity_score = homogeneity(*truth, clustering.labels);
  }
  return m;
}

// silhouette over nonempty prototypes labeled by their plurality class
void add_prototype_silhouette(SeedMetrics& m, const Matrix& Z, const TransportPlan& plan,
                              const std::optional<LabelVector>& truth) {
  if (!truth) return;
  const LabelVector proto = prototype_labels(plan, *truth);
  const Vector c = plan.col_marginal();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < Z.rows(); ++j)
    if (c(j) > kEmptyColumnMass && proto[static_cast<std::size_t>(j)] >= 0) keep.push_back(j);
  std::set<int> distinct;
  for (Eigen::Index j : keep) distinct.insert(proto[static_cast<std::size_t>(j)]);
  if (keep.size() < 2 || distinct.size() < 2) return;
  Matrix pts(static_cast<Eigen::Index>(keep.size()), Z.cols());
  LabelVector labs(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pts.row(static_cast<Eigen::Index>(r)) = Z.row(keep[r]);
    labs[r] = proto[static_cast<std::size_t>(keep[r])];
  }
  m.silhouette_score = silhouette(pts, labs);
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

void write_mean_images(const fs::path& dir, const std::string& tag, const Matrix& prototypes,
                       const Vector& weights, int image_width) {
  if (image_width < 1 || prototypes.cols() % image_width != 0)
    throw ConfigError("image_width must divide the feature dimension");
  const Eigen::Index rows = prototypes.cols() / image_width;
  for (Eigen::Index j = 0; j < prototypes.rows(); ++j) {
    if (weights(j) <= kEmptyColumnMass) continue;
    Matrix img(rows, image_width);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index q = 0; q < image_width; ++q) img(r, q) = prototypes(j, r * image_width + q);
    write_csv_matrix((dir / ("prototype_image_" + tag + "_p" + std::to_string(j) + ".csv")).string(),
                     img);
  }
}

GwdrOptions gwdr_options(const RunConfig& config, std::uint64_t seed, double alpha) {
  GwdrOptions opts;
  opts.solver = config.solver;
  opts.solver.seed = seed;
  opts.adam = config.adam;
  opts.z_steps_per_block = config.z_steps_per_block;
  opts.bcd_iters = config.bcd_iters;
  opts.alpha = FusedWeights(alpha);
  return opts;
}

SeedOutcome run_cluster_seed(const RunConfig& config, const LoadedData& data, const Matrix& C,
                             const Vector& h, std::uint64_t seed, const fs::path& out) {
  const auto t0 = Clock::now();
  SolverOptions opts = config.solver;
  opts.seed = seed;

  SeedOutcome outcome;
  outcome.seed = seed;
  const std::string tag = seed_tag(seed);

  if (config.task == TaskKind::cluster_srgwb) {
    SrgwBarycenterResult result = solve_srgw_barycenter(C, h, config.n, config.loss, opts);
    const HardClustering clustering = hard_assignments(result.plan);
    outcome.metrics = sample_metrics(clustering, data.truth);
    outcome.final_cost = result.report.final_cost;
    write_csv_labels((out / ("labels_" + tag + ".csv")).string(), clustering.labels);
    write_csv_matrix((out / ("structure_" + tag + ".csv")).string(), result.graph.structure);
    write_csv_vector((out / ("weights_" + tag + ".csv")).string(), result.graph.weights);
    write_text(out / ("report_" + tag + ".json"), to_json(result.report) + "\n");
  } else {
    SrgwResult result = solve_srgwi(C, h, config.n, config.loss, opts);
    const HardClustering clustering = hard_assignments(result.plan);
    outcome.metrics = sample_metrics(clustering, data.truth);
    outcome.final_cost = result.report.final_cost;
    write_csv_labels((out / ("labels_" + tag + ".csv")).string(), clustering.labels);
    write_csv_vector((out / ("weights_" + tag + ".csv")).string(), result.plan.col_marginal());
    write_text(out / ("report_" + tag + ".json"), to_json(result.report) + "\n");
  }
  outcome.solve_seconds = seconds_since(t0);
  return outcome;
}

SeedOutcome run_gwdr_seed(const RunConfig& config, const LoadedData& data, const Matrix& C,
                          const Vector& h, std::uint64_t seed, double alpha, const fs::path& out,
                          bool write_files) {
  const auto t0 = Clock::now();
  const bool fused = config.task == TaskKind::fgwdr || config.task == TaskKind::alpha_grid;
  const GwdrOptions opts = gwdr_options(config, seed, fused ? alpha : 1.0);

  Embedding embedding{Matrix(), config.model};
  std::optional<TransportPlan> plan;
  Vector weights;
  Matrix prototypes;
  SolveReport report;

  if (fused) {
    FgwdrResult r =
        solve_fgwdr(C, data.X, h, config.n, config.d, config.model, config.loss, opts);
    embedding = std::move(r.embedding);
    plan = std::move(r.plan);
    weights = r.graph.weights;
    prototypes = std::move(r.feature_prototypes);
    report = std::move(r.report);
  } else {
    GwdrResult r = solve_gwdr(C, h, config.n, config.d, config.model, config.loss, opts);
    embedding = std::move(r.embedding);
    plan = std::move(r.plan);
    weights = r.graph.weights;
    prototypes = feature_barycenter(data.X.values, *plan);
    report = std::move(r.report);
  }

  const HardClustering clustering = hard_assignments(*plan);
  SeedOutcome outcome;
  outcome.seed = seed;
  outcome.metrics = sample_metrics(clustering, data.truth);
  add_prototype_silhouette(outcome.metrics, embedding.Z, *plan, data.truth);
  outcome.final_cost = report.final_cost;

  if (write_files) {
    const std::string tag = seed_tag(seed);
    write_csv_matrix((out / ("embeddings_" + tag + ".csv")).string(), embedding.Z);
    write_csv_vector((out / ("weights_" + tag + ".csv")).string(), weights);
    write_csv_labels((out / ("labels_" + tag + ".csv")).string(), clustering.labels);
    write_csv_matrix((out / ("prototypes_" + tag + ".csv")).string(), prototypes);
    write_text(out / ("report_" + tag + ".json"), to_json(report) + "\n");

    Matrix plot = embedding.Z;
    if (plot.cols() < 2) {
      plot.conservativeResize(Eigen::NoChange, 2);
      plot.col(1).setZero();
    }
    LabelVector colors = data.truth ? prototype_labels(*plan, *data.truth)
                                    : LabelVector(static_cast<std::size_t>(plot.rows()), -1);
    write_text(out / ("plot_" + tag + ".svg"), svg_scatter(plot, weights, colors));
    if (config.image_rows) write_mean_images(out, tag, prototypes, weights, config.image_width);
  }
  outcome.solve_seconds = seconds_since(t0);
  return outcome;
}

std::vector<SeedOutcome> run_seeds_concurrently(
    const RunConfig& config, const std::function<SeedOutcome(std::uint64_t)>& worker) {
  std::vector<std::future<SeedOutcome>> futures;
  futures.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds)
    futures.push_back(std::async(std::launch::async, worker, seed));
  std::vector<SeedOutcome> outcomes;
  outcomes.reserve(futures.size());
  for (auto& f : futures) outcomes.push_back(f.get());
  return outcomes;
}

json run_alpha_grid_task(const RunConfig& config, const LoadedData& data, const Matrix& C,
                         const Vector& h, const fs::path& out, json& stage_timings) {
  if (!data.truth)
    throw ConfigError("alpha_grid needs ground-truth labels (homogeneity is part of the score)");
  const std::vector<double>& grid =
      config.alpha_grid.empty() ? default_alpha_grid() : config.alpha_grid;

  json rows = json::array();
  double best_score = -std::numeric_limits<double>::infinity();
  double alpha_star = grid.empty() ? 0.0 : grid.front();

  for (double alpha : grid) {
    const auto t0 = Clock::now();
    const std::vector<SeedOutcome> outcomes = run_seeds_concurrently(
        config, [&](std::uint64_t seed) {
          return run_gwdr_seed(config, data, C, h, seed, alpha, out, /*write_files=*/false);
        });

    double homog_sum = 0.0, silh_sum = 0.0;
    int homog_count = 0, silh_count = 0;
    for (const auto& o : outcomes) {
      if (o.metrics.homogeneity_score) {
        homog_sum += *o.metrics.homogeneity_score;
        ++homog_count;
      }
      if (o.metrics.silhouette_score) {
        silh_sum += *o.metrics.silhouette_score;
        ++silh_count;
      }
    }
    const double homog = homog_count > 0 ? homog_sum / homog_count : 0.0;
    const double silh = silh_count > 0 ? silh_sum / silh_count : 0.0;
    const double score = homog + silh;

    json row;
    row["alpha"] = alpha;
    row["homogeneity"] = homog;
    row["silhouette"] = silh;
    row["score"] = score;
    row["per_seed"] = metrics_document(outcomes)["per_seed"];
    rows.push_back(row);

    if (score > best_score) {
      best_score = score;
      alpha_star = alpha;
    }
    stage_timings.push_back(
        {{"name", "alpha_" + format_double(alpha)}, {"seconds", seconds_since(t0)}});
  }

  json doc;
  doc["grid"] = rows;
  doc["alpha_star"] = alpha_star;
  doc["best_score"] = best_score;
  write_json(out / "alpha_grid.json", doc);
  return doc;
}

}  // namespace

void execute(const RunConfig& config) {
  const auto t_total = Clock::now();
  config.solver.validate();
  if (config.n < 1) throw ConfigError("n must be positive");
  if (config.d < 1) throw ConfigError("d must be positive");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw ConfigError("alpha outside [0,1]");

  const fs::path out(config.output_dir);
  fs::create_directories(out);

  json stage_timings = json::array();

  const auto t_load = Clock::now();
  const LoadedData data = load_data(config);
  if (config.n > data.X.samples()) throw ConfigError("n exceeds the sample count");
  stage_timings.push_back({{"name", "load"}, {"seconds", seconds_since(t_load)}});

  const auto t_kernel = Clock::now();
  const Matrix C = build_kernel(data.X, config.kernel);
  stage_timings.push_back({{"name", "kernel"}, {"seconds", seconds_since(t_kernel)}});

  const Vector h =
      Vector::Constant(data.X.samples(), 1.0 / static_cast<double>(data.X.samples()));

  if (config.task == TaskKind::alpha_grid) {
    run_alpha_grid_task(config, data, C, h, out, stage_timings);
  } else if (config.task == TaskKind::cluster_srgwb || config.task == TaskKind::cluster_srgwi) {
    const std::vector<SeedOutcome> outcomes = run_seeds_concurrently(
        config,
        [&](std::uint64_t seed) { return run_cluster_seed(config, data, C, h, seed, out); });
    for (const auto& o : outcomes)
      stage_timings.push_back(
          {{"name", "solve_" + seed_tag(o.seed)}, {"seconds", o.solve_seconds}});
    write_json(out / "metrics.json", metrics_document(outcomes));
  } else {
    const std::vector<SeedOutcome> outcomes = run_seeds_concurrently(
        config, [&](std::uint64_t seed) {
          return run_gwdr_seed(config, data, C, h, seed, config.alpha, out, /*write_files=*/true);
        });
    for (const auto& o : outcomes)
      stage_timings.push_back(
          {{"name", "solve_" + seed_tag(o.seed)}, {"seconds", o.solve_seconds}});
    write_json(out / "metrics.json", metrics_document(outcomes));
  }

  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_echo(config);
  manifest["timings"] = {{"total_seconds", seconds_since(t_total)}, {"stages", stage_timings}};
  write_json(out / "manifest.json", manifest);
}

}  // namespace gwdr
