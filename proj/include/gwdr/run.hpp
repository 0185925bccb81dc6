#pragma once

#include "gwdr/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gwdr {

inline constexpr const char* kVersion = "0.1.0";

enum class TaskKind { cluster_srgwb, cluster_srgwi, gwdr, fgwdr, alpha_grid };
enum class KernelKind { gram, mds, laplacian, sne, entropic };

struct KernelConfig {
  KernelKind kind = KernelKind::mds;
  double xi = 30.0;  // perplexity (sne / entropic)
  int knn = 10;      // neighborhood size (laplacian)
};

struct BlobSpec {
  int samples = 300;
  int clusters = 3;
  int dim = 10;
  double separation = 10.0;
  std::uint64_t seed = 0;
};

struct BlobData {
  DataMatrix X;
  LabelVector labels;
};

/// Isotropic unit-variance Gaussian blobs with pairwise center distance
/// `separation`; labels assigned round-robin.
BlobData make_blobs(const BlobSpec& spec);

struct RunConfig {
  std::string input_path;         // data CSV (one sample per row)
  std::string labels_path;        // optional ground-truth labels CSV
  std::optional<BlobSpec> blobs;  // built-in generator instead of a file
  TaskKind task = TaskKind::cluster_srgwb;
  KernelConfig kernel;
  int n = 2;
  int d = 2;
  LossKind loss = LossKind::L2;
  EmbeddingModel model = EmbeddingModel::gram;
  double alpha = 1.0;
  std::vector<double> alpha_grid;  // empty: default grid
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  SolverOptions solver;
  AdamOptions adam;
  int z_steps_per_block = 50;
  int bcd_iters = 30;
  std::string output_dir = "out";
  bool image_rows = false;  // write per-prototype mean images as matrices
  int image_width = 0;      // row length of one image row block
};

/// The grid used when RunConfig::alpha_grid is empty.
const std::vector<double>& default_alpha_grid();

std::string to_string(TaskKind t);
std::string to_string(KernelKind k);
std::string to_string(LossKind l);
std::string to_string(EmbeddingModel m);
TaskKind task_from_string(const std::string& s);
KernelKind kernel_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);
EmbeddingModel model_from_string(const std::string& s);

RunConfig parse_config_json(const std::string& path);

/// Runs the configured task, writing outputs and a manifest under
/// output_dir. Returns the process exit code (0 ok).
void execute(const RunConfig& config);

/// SVG scatter of 2-D points: marker area proportional to weight, color by
/// label (-1 or missing labels render gray). Zero-weight points are omitted.
std::string svg_scatter(const Matrix& points, const Vector& weights, const LabelVector& labels);

}  // namespace gwdr
