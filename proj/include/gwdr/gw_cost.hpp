#pragma once

#include "gwdr/types.hpp"

namespace gwdr {

/// Entry-wise loss transforms of the separable decomposition
/// L(a, b) = f1(a) + f2(b) - h1(a) h2(b).
namespace loss_terms {
Matrix f1(const Matrix& A, LossKind loss);
Matrix f2(const Matrix& B, LossKind loss);
Matrix h1(const Matrix& A, LossKind loss);
// h2 on the target side. The cost variant clamps the KL log only on entries
// whose loss-mass coefficient (T^T A T) is exactly zero, so values on support
// stay untouched; the gradient variant floors everywhere to keep the KL
// barrier finite.
Matrix h2_cost(const Matrix& B, LossKind loss, const Matrix& coupling);
Matrix h2_grad(const Matrix& B, LossKind loss);
}  // namespace loss_terms

/// n x n coupling of the source structure through the plan: T^T h1(A) T.
Matrix structure_coupling(const Matrix& h1A, const Matrix& T);

/// Raw-matrix entry points used by the solvers (the plan is not re-validated).
namespace detail {
double gw_cost_m(const Matrix& A, const Matrix& B, const Matrix& T, LossKind loss);
Matrix gw_plan_gradient_m(const Matrix& A, const Matrix& B, const Matrix& T, LossKind loss);
Matrix feature_cost_m(const Matrix& X, const Matrix& F, LossKind loss);
}  // namespace detail

/// GW discrepancy value sum_{ijkl} L(A_ij, B_kl) T_ik T_jl evaluated through
/// the separable decomposition in O(nN^2 + n^2 N).
/// KL: requires A >= 0, and B > 0 on every (k,l) pair that carries loss mass.
double gw_cost(const Matrix& C_X, const Matrix& C_Z, const TransportPlan& T, LossKind loss);
double gw_cost(const AffinityMatrix& C_X, const AffinityMatrix& C_Z, const TransportPlan& T,
               LossKind loss);

/// Gradient of the GW objective with respect to every entry of T (both
/// marginals treated as functions of T).
Matrix gw_plan_gradient(const Matrix& C_X, const Matrix& C_Z, const TransportPlan& T,
                        LossKind loss);

/// N x n matrix of feature transport costs: entry (i,j) = sum_k L(X_ik, F_jk).
Matrix feature_cost_matrix(const Matrix& X, const Matrix& F, LossKind loss);

/// alpha * GW cost + (1 - alpha) * <feature costs, T>. The degenerate weights
/// reproduce the single-term costs exactly (the other term is never touched).
double fused_cost(const Matrix& C_X, const Matrix& X, const Matrix& C_Z, const Matrix& F,
                  const TransportPlan& T, FusedWeights alpha, LossKind loss);

Matrix fused_plan_gradient(const Matrix& C_X, const Matrix& X, const Matrix& C_Z, const Matrix& F,
                           const TransportPlan& T, FusedWeights alpha, LossKind loss);

}  // namespace gwdr
