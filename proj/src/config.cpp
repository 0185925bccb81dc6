#include "gwdr/run.hpp"

#include <json.hpp>

#include <fstream>

namespace gwdr {

const std::vector<double>& default_alpha_grid() {
  static const std::vector<double> grid{0.0,  0.000001, 0.0003, 0.005,   0.1,      0.25, 0.5,
                                        0.75, 0.9,      0.995,  0.9997, 0.999999, 1.0};
  return grid;
}

std::string to_string(TaskKind t) {
  switch (t) {
    case TaskKind::cluster_srgwb: return "cluster_srgwb";
    case TaskKind::cluster_srgwi: return "cluster_srgwi";
    case TaskKind::gwdr: return "gwdr";
    case TaskKind::fgwdr: return "fgwdr";
    case TaskKind::alpha_grid: return "alpha_grid";
  }
  return "?";
}

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::gram: return "gram";
    case KernelKind::mds: return "mds";
    case KernelKind::laplacian: return "laplacian";
    case KernelKind::sne: return "sne";
    case KernelKind::entropic: return "entropic";
  }
  return "?";
}

std::string to_string(LossKind l) { return l == LossKind::L2 ? "l2" : "kl"; }

std::string to_string(EmbeddingModel m) {
  switch (m) {
    case EmbeddingModel::gram: return "gram";
    case EmbeddingModel::student: return "student";
    case EmbeddingModel::student_doubly_stochastic: return "student_doubly_stochastic";
  }
  return "?";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "cluster_srgwb") return TaskKind::cluster_srgwb;
  if (s == "cluster_srgwi") return TaskKind::cluster_srgwi;
  if (s == "gwdr") return TaskKind::gwdr;
  if (s == "fgwdr") return TaskKind::fgwdr;
  if (s == "alpha_grid") return TaskKind::alpha_grid;
  throw ConfigError("unknown task: " + s);
}

KernelKind kernel_from_string(const std::string& s) {
  if (s == "gram") return KernelKind::gram;
  if (s == "mds") return KernelKind::mds;
  if (s == "laplacian") return KernelKind::laplacian;
  if (s == "sne") return KernelKind::sne;
  if (s == "entropic") return KernelKind::entropic;
  throw ConfigError("unknown kernel: " + s);
}

LossKind loss_from_string(const std::string& s) {
  if (s == "l2") return LossKind::L2;
  if (s == "kl") return LossKind::KL;
  throw ConfigError("unknown loss: " + s);
}

EmbeddingModel model_from_string(const std::string& s) {
  if (s == "gram") return EmbeddingModel::gram;
  if (s == "student") return EmbeddingModel::student;
  if (s == "student_doubly_stochastic") return EmbeddingModel::student_doubly_stochastic;
  throw ConfigError("unknown model: " + s);
}

RunConfig parse_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  RunConfig c;
  try {
    if (j.contains("input")) c.input_path = j["input"].get<std::string>();
    if (j.contains("labels")) c.labels_path = j["labels"].get<std::string>();
    if (j.contains("task")) c.task = task_from_string(j["task"].get<std::string>());
    if (j.contains("kernel")) {
      const auto& k = j["kernel"];
      if (k.is_string()) {
        c.kernel.kind = kernel_from_string(k.get<std::string>());
      } else {
        if (k.contains("kind")) c.kernel.kind = kernel_from_string(k["kind"].get<std::string>());
        if (k.contains("xi")) c.kernel.xi = k["xi"].get<double>();
        if (k.contains("knn")) c.kernel.knn = k["knn"].get<int>();
      }
    }
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("d")) c.d = j["d"].get<int>();
    if (j.contains("loss")) c.loss = loss_from_string(j["loss"].get<std::string>());
    if (j.contains("model")) c.model = model_from_string(j["model"].get<std::string>());
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("alpha_grid")) c.alpha_grid = j["alpha_grid"].get<std::vector<double>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("image_rows")) c.image_rows = j["image_rows"].get<bool>();
    if (j.contains("image_width")) c.image_width = j["image_width"].get<int>();
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      if (s.contains("max_cg_iters")) c.solver.max_cg_iters = s["max_cg_iters"].get<int>();
      if (s.contains("rel_tol")) c.solver.rel_tol = s["rel_tol"].get<double>();
      if (s.contains("restarts")) c.solver.restarts = s["restarts"].get<int>();
      if (s.contains("step_policy"))
        c.solver.step_policy = s["step_policy"].get<std::string>() == "armijo"
                                   ? StepPolicy::armijo
                                   : StepPolicy::exact_quadratic;
    }
    if (j.contains("gwdr")) {
      const auto& g = j["gwdr"];
      if (g.contains("lr")) c.adam.lr = g["lr"].get<double>();
      if (g.contains("beta1")) c.adam.beta1 = g["beta1"].get<double>();
      if (g.contains("beta2")) c.adam.beta2 = g["beta2"].get<double>();
      if (g.contains("eps")) c.adam.eps = g["eps"].get<double>();
      if (g.contains("z_steps_per_block"))
        c.z_steps_per_block = g["z_steps_per_block"].get<int>();
      if (g.contains("bcd_iters")) c.bcd_iters = g["bcd_iters"].get<int>();
    }
    if (j.contains("blobs")) {
      const auto& b = j["blobs"];
      BlobSpec spec;
      if (b.contains("samples")) spec.samples = b["samples"].get<int>();
      if (b.contains("clusters")) spec.clusters = b["clusters"].get<int>();
      if (b.contains("dim")) spec.dim = b["dim"].get<int>();
      if (b.contains("separation")) spec.separation = b["separation"].get<double>();
      if (b.contains("seed")) spec.seed = b["seed"].get<std::uint64_t>();
      c.blobs = spec;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

}  // namespace gwdr
