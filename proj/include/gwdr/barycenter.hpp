#pragma once

#include "gwdr/solver.hpp"
#include "gwdr/types.hpp"

namespace gwdr {

/// Closed-form structure update C(T) = T^T C T / (hbar hbar^T), with rows and
/// columns of empty prototypes (mass <= kEmptyColumnMass) set to exactly 0.
Matrix barycenter_structure(const Matrix& C, const TransportPlan& T, LossKind loss = LossKind::L2);

/// L2 barycenter objective with the structure eliminated:
/// F(T) = sum_ij C_ij^2 h_i h_j - sum_{k,l nonempty} (T_:k^T C T_:l)^2 / (hbar_k hbar_l).
double factorized_objective(const Matrix& C, const TransportPlan& T);

struct SrgwBarycenterResult {
  BarycenterGraph graph;
  TransportPlan plan;
  SolveReport report;  // outer (block-alternation) trace
};

/// Block descent between the transport solve (structure fixed) and the
/// closed-form structure update. `init` seeds the first restart.
SrgwBarycenterResult solve_srgw_barycenter(const Matrix& C, const Vector& h, int n, LossKind loss,
                                           const SolverOptions& opts, const Matrix* init = nullptr);

/// Semi-relaxed solve against the fixed structure I_n (no structure update).
SrgwResult solve_srgwi(const Matrix& C, const Vector& h, int n, LossKind loss,
                       const SolverOptions& opts);

/// label_i = argmax_j T_ij (ties: lowest index).
HardClustering hard_assignments(const TransportPlan& T);

/// Transport-weighted feature means, one row per prototype; empty prototypes
/// get a zero row.
Matrix feature_barycenter(const Matrix& X, const TransportPlan& T);

}  // namespace gwdr
