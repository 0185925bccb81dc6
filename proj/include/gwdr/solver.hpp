#pragma once

#include "gwdr/gw_cost.hpp"
#include "gwdr/types.hpp"

#include <string>

namespace gwdr {

/// Minimizer of <G, T> over plans with row marginal h: row i puts its whole
/// mass on the column with the smallest gradient entry (ties: lowest index).
TransportPlan semi_relaxed_lmo(const Matrix& G, const Vector& h);

/// Closed-form minimizing step of the L2 GW objective along T + gamma (D - T),
/// clipped to [0, 1]. A concave segment returns whichever endpoint is lower;
/// a flat segment returns 0.
double exact_line_search(const Matrix& C_X, const Matrix& C_Z, const TransportPlan& T,
                         const TransportPlan& D);

struct SrgwResult {
  TransportPlan plan;
  SolveReport report;
};

/// Conditional-gradient solver for the semi-relaxed GW problem at fixed C_Z.
/// `init` (optional) seeds the first restart; other restarts draw a random
/// plan from seed + restart index.
SrgwResult solve_srgw(const Matrix& C_X, const Vector& h, const Matrix& C_Z, LossKind loss,
                      const SolverOptions& opts, const Matrix* init = nullptr);

/// Fused variant: alpha * GW(C_X, C_Z) + (1 - alpha) * feature transport
/// against prototype features F. alpha = 1 runs exactly the solve_srgw path.
SrgwResult solve_srfgw(const Matrix& C_X, const Matrix& X, const Vector& h, const Matrix& C_Z,
                       const Matrix& F, FusedWeights alpha, LossKind loss,
                       const SolverOptions& opts, const Matrix* init = nullptr);

std::string to_json(const SolveReport& report);

}  // namespace gwdr
