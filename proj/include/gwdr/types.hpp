#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gwdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Column masses at or below this are treated as exactly zero (empty prototype).
inline constexpr double kEmptyColumnMass = 1e-12;

enum class LossKind { L2, KL };

enum class AffinityKind {
  gram,
  mds,
  laplacian,
  sne_row_stochastic,
  entropic_doubly_stochastic,
  student,
  student_doubly_stochastic,
};

enum class StudentNormalize { none, doubly_stochastic };

enum class EmbeddingModel { gram, student, student_doubly_stochastic };

enum class StepPolicy { exact_quadratic, armijo };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input dataset, one sample per row.
struct DataMatrix {
  Matrix values;

  explicit DataMatrix(Matrix v) : values(std::move(v)) {
    if (values.rows() < 1 || values.cols() < 1)
      throw std::invalid_argument("DataMatrix: need at least one sample and one feature");
    if (!values.allFinite()) throw std::invalid_argument("DataMatrix: non-finite entry");
  }

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index features() const { return values.cols(); }
};

/// Square similarity matrix with provenance flags. Use make_affinity to get
/// the invariants checked.
struct AffinityMatrix {
  Matrix values;
  AffinityKind kind = AffinityKind::gram;
  bool symmetric = false;
  bool nonnegative = false;
};

AffinityMatrix make_affinity(Matrix values, AffinityKind kind, bool symmetric, bool nonnegative);

/// Target effective neighbor count for neighbor-embedding affinities.
struct Perplexity {
  double xi;

  explicit Perplexity(double value) : xi(value) {
    if (!(xi > 1.0)) throw std::invalid_argument("Perplexity: xi must exceed 1");
  }
};

/// Coupling with a fixed row marginal h; the column marginal is free.
struct TransportPlan {
  Matrix values;        // N x n, nonnegative, rows sum to h
  Vector row_marginal;  // h, simplex vector of length N

  TransportPlan(Matrix T, Vector h) : values(std::move(T)), row_marginal(std::move(h)) {
    if (values.rows() != row_marginal.size())
      throw std::invalid_argument("TransportPlan: marginal length mismatch");
    if ((values.array() < 0.0).any())
      throw std::invalid_argument("TransportPlan: negative entry");
    if (std::abs(row_marginal.sum() - 1.0) > 1e-9)
      throw std::invalid_argument("TransportPlan: row marginal must lie on the simplex");
    const double err = (values.rowwise().sum() - row_marginal).cwiseAbs().maxCoeff();
    if (!(err <= 1e-9))
      throw std::invalid_argument("TransportPlan: row sums deviate from marginal by " +
                                  std::to_string(err));
  }

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index prototypes() const { return values.cols(); }
  Vector col_marginal() const { return values.colwise().sum().transpose(); }
};

/// Interpolation weight between the structure term and the feature term.
struct FusedWeights {
  double alpha = 1.0;

  FusedWeights() = default;
  explicit FusedWeights(double a) : alpha(a) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("FusedWeights: alpha outside [0,1]");
  }
};

struct SolverOptions {
  int max_cg_iters = 200;
  double rel_tol = 1e-9;
  std::uint64_t seed = 0;
  int restarts = 1;
  StepPolicy step_policy = StepPolicy::exact_quadratic;

  void validate() const {
    if (max_cg_iters < 1) throw std::invalid_argument("SolverOptions: max_cg_iters >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("SolverOptions: rel_tol > 0");
    if (restarts < 1) throw std::invalid_argument("SolverOptions: restarts >= 1");
  }
};

struct SolveReport {
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_trace;
};

/// Target graph of a semi-relaxed barycenter: structure plus free node weights.
struct BarycenterGraph {
  Matrix structure;  // n x n, rows/cols of zero-weight prototypes are exactly 0
  Vector weights;    // hbar, sums to 1
};

struct HardClustering {
  std::vector<int> labels;
  int effective_clusters = 0;
};

/// Low-dimensional prototype coordinates plus the model mapping them to an
/// affinity matrix.
struct Embedding {
  Matrix Z;  // n x d
  EmbeddingModel model = EmbeddingModel::gram;

  Eigen::Index prototypes() const { return Z.rows(); }
  Eigen::Index dimension() const { return Z.cols(); }
};

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct GwdrOptions {
  SolverOptions solver;
  AdamOptions adam;
  int z_steps_per_block = 50;
  int bcd_iters = 30;
  FusedWeights alpha{1.0};

  void validate() const {
    solver.validate();
    if (z_steps_per_block < 1) throw std::invalid_argument("GwdrOptions: z_steps_per_block >= 1");
    if (bcd_iters < 1) throw std::invalid_argument("GwdrOptions: bcd_iters >= 1");
    if (!(adam.lr > 0.0)) throw std::invalid_argument("GwdrOptions: lr > 0");
  }
};

using LabelVector = std::vector<int>;

}  // namespace gwdr
