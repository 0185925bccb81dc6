#pragma once

#include "gwdr/types.hpp"

#include <functional>
#include <vector>

namespace gwdr {

/// Instance small enough to enumerate every hard assignment (n^N <= 2^20).
struct SmallInstance {
  Matrix C;
  Vector h;
  int n = 1;
  LossKind loss = LossKind::L2;
};

struct MembershipOptimum {
  LabelVector labels;
  double cost = 0.0;
};

/// Exact minimum of the barycenter objective over all n^N membership plans
/// diag(h) M, by lexicographic enumeration.
MembershipOptimum brute_force_membership_optimum(const SmallInstance& inst);

/// Worst violation of F(l T1 + (1-l) T2) >= l F(T1) + (1-l) F(T2) over random
/// interior plan pairs; <= ~1e-10 expected when the structure-to-itself GW
/// form is convex (e.g. PSD C).
double concavity_probe(const Matrix& C, const Vector& h, int n, int num_pairs,
                       const std::vector<double>& lambdas, std::uint64_t seed);

/// Same probe restricted to couplings with both marginals fixed; pairs are
/// produced by Sinkhorn projection onto U(h, hbar_fixed).
double fixed_marginal_concavity_probe(const Matrix& C, const Vector& h, const Vector& hbar_fixed,
                                      int num_pairs, std::uint64_t seed);

/// g_C(U) = Tr(U C^T U C) with the self-gluing U = T diag(hbar)^-1 T^T.
/// Requires strictly positive column marginals.
double lowrank_gluing_cost(const Matrix& C, const TransportPlan& T);

/// Normwise relative gap between the analytic gradient and central finite
/// differences of `objective` at `point`.
double finite_difference_check(const std::function<double(const Matrix&)>& objective,
                               const Matrix& point, const Matrix& analytic_gradient,
                               double h_step = 1e-6);

}  // namespace gwdr
