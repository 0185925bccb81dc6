#include "gwdr/barycenter.hpp"

#include "gwdr/random.hpp"

#include <cmath>
#include <optional>
#include <utility>

namespace gwdr {

Matrix barycenter_structure(const Matrix& C, const TransportPlan& T, LossKind loss) {
  if (C.rows() != C.cols()) throw std::invalid_argument("barycenter_structure: C not square");
  if (C.rows() != T.samples())
    throw std::invalid_argument("barycenter_structure: plan does not match C");
  if (loss == LossKind::KL && (C.array() < 0.0).any())
    throw std::domain_error("barycenter_structure: KL loss requires a nonnegative C");

  const Vector c = T.col_marginal();
  const Matrix M = structure_coupling(C, T.values);
  const Eigen::Index n = T.prototypes();
  Matrix Cbar = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (c(k) <= kEmptyColumnMass) continue;
    for (Eigen::Index l = 0; l < n; ++l) {
      if (c(l) <= kEmptyColumnMass) continue;
      Cbar(k, l) = M(k, l) / (c(k) * c(l));
    }
  }
  return Cbar;
}

double factorized_objective(const Matrix& C, const TransportPlan& T) {
  const Vector r = T.values.rowwise().sum();
  const Vector c = T.col_marginal();
  const Matrix M = structure_coupling(C, T.values);
  double value = r.dot(C.cwiseProduct(C) * r);
  for (Eigen::Index k = 0; k < M.rows(); ++k) {
    if (c(k) <= kEmptyColumnMass) continue;
    for (Eigen::Index l = 0; l < M.cols(); ++l) {
      if (c(l) <= kEmptyColumnMass) continue;
      value -= M(k, l) * M(k, l) / (c(k) * c(l));
    }
  }
  return value;
}

SrgwBarycenterResult solve_srgw_barycenter(const Matrix& C, const Vector& h, int n, LossKind loss,
                                           const SolverOptions& opts, const Matrix* init) {
  opts.validate();
  if (n < 1 || n > C.rows())
    throw std::invalid_argument("solve_srgw_barycenter: need 1 <= n <= N");

  constexpr int kMaxOuter = 100;
  constexpr double kOuterRelTol = 1e-9;

  SolverOptions inner = opts;
  inner.restarts = 1;

  std::optional<SrgwBarycenterResult> best;

  for (int r = 0; r < opts.restarts; ++r) {
    Matrix T;
    if (r == 0 && init != nullptr) {
      T = *init;
    } else {
      Rng rng(opts.seed + static_cast<std::uint64_t>(r));
      T = random_plan_values(h, n, rng);
    }
    TransportPlan plan(T, h);
    Matrix Cbar = barycenter_structure(C, plan, loss);
    double cost = gw_cost(C, Cbar, plan, loss);

    SolveReport outer;
    outer.cost_trace.push_back(cost);
    for (int it = 1; it <= kMaxOuter; ++it) {
      outer.iterations = it;
      SrgwResult inner_result = solve_srgw(C, h, Cbar, loss, inner, &plan.values);
      plan = std::move(inner_result.plan);
      Cbar = barycenter_structure(C, plan, loss);
      const double new_cost = gw_cost(C, Cbar, plan, loss);
      outer.cost_trace.push_back(new_cost);
      const bool stalled =
          std::abs(new_cost - cost) <= kOuterRelTol * std::max(1.0, std::abs(new_cost));
      cost = new_cost;
      if (stalled) {
        outer.converged = true;
        break;
      }
    }
    outer.final_cost = cost;

    if (!best || outer.final_cost < best->report.final_cost) {
      Vector hbar = plan.col_marginal();
      best.emplace(
          SrgwBarycenterResult{BarycenterGraph{Cbar, std::move(hbar)}, std::move(plan), std::move(outer)});
    }
  }
  return std::move(*best);
}

SrgwResult solve_srgwi(const Matrix& C, const Vector& h, int n, LossKind loss,
                       const SolverOptions& opts) {
  if (n < 1 || n > C.rows()) throw std::invalid_argument("solve_srgwi: need 1 <= n <= N");
  const Matrix eye = Matrix::Identity(n, n);
  return solve_srgw(C, h, eye, loss, opts);
}

HardClustering hard_assignments(const TransportPlan& T) {
  HardClustering out;
  out.labels.resize(static_cast<std::size_t>(T.samples()));
  for (Eigen::Index i = 0; i < T.samples(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < T.prototypes(); ++j)
      if (T.values(i, j) > T.values(i, best)) best = j;
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  std::vector<bool> seen(static_cast<std::size_t>(T.prototypes()), false);
  for (int lab : out.labels)
    if (!seen[static_cast<std::size_t>(lab)]) {
      seen[static_cast<std::size_t>(lab)] = true;
      ++out.effective_clusters;
    }
  return out;
}

Matrix feature_barycenter(const Matrix& X, const TransportPlan& T) {
  if (X.rows() != T.samples())
    throw std::invalid_argument("feature_barycenter: plan does not match X");
  const Vector c = T.col_marginal();
  Matrix F = T.values.transpose() * X;
  for (Eigen::Index j = 0; j < F.rows(); ++j) {
    if (c(j) > kEmptyColumnMass)
      F.row(j) /= c(j);
    else
      F.row(j).setZero();
  }
  return F;
}

}  // namespace gwdr
