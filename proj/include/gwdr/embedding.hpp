#pragma once

#include "gwdr/barycenter.hpp"
#include "gwdr/types.hpp"

namespace gwdr {

/// i.i.d. standard normal coordinates, deterministic per seed.
Embedding init_embeddings(int n, int d, std::uint64_t seed,
                          EmbeddingModel model = EmbeddingModel::gram);

/// Affinity induced by the embedding: Z Z^T for the gram model, otherwise the
/// (optionally normalized) student kernel.
AffinityMatrix embedding_affinity(const Embedding& E);

/// Gradient of the GW objective in the embedding coordinates, at fixed plan.
/// For the doubly-stochastic student model the Sinkhorn scaling vector is
/// treated as a constant (frozen duals).
Matrix z_gradient(const Matrix& C_X, const Vector& h, const Embedding& E, const TransportPlan& T,
                  LossKind loss);

/// Frozen-duals objective in Z at fixed T, for gradient checks: alpha-free GW
/// part only, with the Sinkhorn scaling (when any) pinned at `E`.
double z_objective_frozen(const Matrix& C_X, const Embedding& E, const Matrix& Z_eval,
                          const TransportPlan& T, LossKind loss);

struct GwdrResult {
  Embedding embedding;
  TransportPlan plan;
  BarycenterGraph graph;
  SolveReport report;  // outer block trace
};

struct FgwdrResult {
  Embedding embedding;
  Matrix feature_prototypes;  // n x p
  TransportPlan plan;
  BarycenterGraph graph;
  SolveReport report;
};

/// Joint clustering and embedding: block descent between the semi-relaxed
/// transport solve at fixed Z and Adam steps on Z at fixed plan. Optional
/// overrides replace the random plan / normal embedding initialization.
GwdrResult solve_gwdr(const Matrix& C_X, const Vector& h, int n, int d, EmbeddingModel model,
                      LossKind loss, const GwdrOptions& opts, const Matrix* init_plan = nullptr,
                      const Matrix* init_Z = nullptr);

/// Fused variant with the closed-form feature prototype update per block.
/// alpha = 1 runs exactly the solve_gwdr path.
FgwdrResult solve_fgwdr(const Matrix& C_X, const DataMatrix& X, const Vector& h, int n, int d,
                        EmbeddingModel model, LossKind loss, const GwdrOptions& opts,
                        const Matrix* init_plan = nullptr, const Matrix* init_Z = nullptr);

}  // namespace gwdr
