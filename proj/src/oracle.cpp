#include "gwdr/oracle.hpp"

#include "gwdr/barycenter.hpp"
#include "gwdr/random.hpp"

#include <cmath>
#include <limits>

namespace gwdr {

namespace {

// Barycenter objective of a hard labeling: structure eliminated in closed
// form, evaluated directly from the label groups.
double membership_cost(const Matrix& C, const Vector& h, const LabelVector& labels, int n,
                       LossKind loss) {
  const Eigen::Index N = C.rows();
  Matrix T = Matrix::Zero(N, n);
  for (Eigen::Index i = 0; i < N; ++i) T(i, labels[static_cast<std::size_t>(i)]) = h(i);
  const TransportPlan plan(std::move(T), h);
  if (loss == LossKind::L2) return factorized_objective(C, plan);
  return gw_cost(C, barycenter_structure(C, plan, loss), plan, loss);
}

}  // namespace

MembershipOptimum brute_force_membership_optimum(const SmallInstance& inst) {
  const Eigen::Index N = inst.C.rows();
  if (inst.C.rows() != inst.C.cols())
    throw std::invalid_argument("brute_force_membership_optimum: C not square");
  if (inst.h.size() != N)
    throw std::invalid_argument("brute_force_membership_optimum: marginal length mismatch");
  if (inst.n < 1) throw std::invalid_argument("brute_force_membership_optimum: n >= 1");
  const double combos = std::pow(static_cast<double>(inst.n), static_cast<double>(N));
  if (!(combos <= static_cast<double>(1 << 20)))
    throw std::invalid_argument("brute_force_membership_optimum: enumeration budget exceeded");

  LabelVector labels(static_cast<std::size_t>(N), 0);
  MembershipOptimum best{labels, std::numeric_limits<double>::infinity()};
  while (true) {
    const double cost = membership_cost(inst.C, inst.h, labels, inst.n, inst.loss);
    if (cost < best.cost) {
      best.cost = cost;
      best.labels = labels;
    }
    // lexicographic odometer
    std::size_t pos = labels.size();
    while (pos > 0) {
      --pos;
      if (++labels[pos] < inst.n) break;
      labels[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

namespace {

double interpolation_violation(const Matrix& C, const Vector& h, const Matrix& T1,
                               const Matrix& T2, const std::vector<double>& lambdas) {
  const double f1 = factorized_objective(C, TransportPlan(T1, h));
  const double f2 = factorized_objective(C, TransportPlan(T2, h));
  double worst = -std::numeric_limits<double>::infinity();
  for (double lam : lambdas) {
    const Matrix mix = lam * T1 + (1.0 - lam) * T2;
    const double f_mix = factorized_objective(C, TransportPlan(mix, h));
    worst = std::max(worst, lam * f1 + (1.0 - lam) * f2 - f_mix);
  }
  return worst;
}

}  // namespace

double concavity_probe(const Matrix& C, const Vector& h, int n, int num_pairs,
                       const std::vector<double>& lambdas, std::uint64_t seed) {
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < num_pairs; ++p) {
    const Matrix T1 = random_plan_values(h, n, rng);
    const Matrix T2 = random_plan_values(h, n, rng);
    worst = std::max(worst, interpolation_violation(C, h, T1, T2, lambdas));
  }
  return worst;
}

namespace {

// Iterative proportional fitting of a positive matrix onto U(h, hbar).
Matrix sinkhorn_projection(const Vector& h, const Vector& hbar, Rng& rng) {
  Matrix T(h.size(), hbar.size());
  for (Eigen::Index i = 0; i < T.rows(); ++i)
    for (Eigen::Index j = 0; j < T.cols(); ++j) T(i, j) = 0.1 + rng.uniform();
  for (int it = 0; it < 10000; ++it) {
    for (Eigen::Index i = 0; i < T.rows(); ++i) T.row(i) *= h(i) / T.row(i).sum();
    double col_err = 0.0;
    for (Eigen::Index j = 0; j < T.cols(); ++j)
      col_err = std::max(col_err, std::abs(T.col(j).sum() - hbar(j)));
    if (col_err <= 1e-12) break;
    for (Eigen::Index j = 0; j < T.cols(); ++j) T.col(j) *= hbar(j) / T.col(j).sum();
  }
  // final row pass so the fixed-marginal constraint holds exactly
  for (Eigen::Index i = 0; i < T.rows(); ++i) T.row(i) *= h(i) / T.row(i).sum();
  return T;
}

}  // namespace

double fixed_marginal_concavity_probe(const Matrix& C, const Vector& h, const Vector& hbar_fixed,
                                      int num_pairs, std::uint64_t seed) {
  if (std::abs(hbar_fixed.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("fixed_marginal_concavity_probe: hbar must lie on the simplex");
  Rng rng(seed);
  const std::vector<double> lambdas{0.25, 0.5, 0.75};
  double worst = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < num_pairs; ++p) {
    const Matrix T1 = sinkhorn_projection(h, hbar_fixed, rng);
    const Matrix T2 = sinkhorn_projection(h, hbar_fixed, rng);
    for (Eigen::Index j = 0; j < T1.cols(); ++j) {
      if (std::abs(T1.col(j).sum() - hbar_fixed(j)) > 1e-8 ||
          std::abs(T2.col(j).sum() - hbar_fixed(j)) > 1e-8)
        throw SolverError("fixed_marginal_concavity_probe: projection marginals off");
    }
    worst = std::max(worst, interpolation_violation(C, h, T1, T2, lambdas));
  }
  return worst;
}

double lowrank_gluing_cost(const Matrix& C, const TransportPlan& T) {
  const Vector c = T.col_marginal();
  if ((c.array() <= 0.0).any())
    throw std::invalid_argument("lowrank_gluing_cost: column marginals must be positive");
  const Matrix U = T.values * c.cwiseInverse().asDiagonal() * T.values.transpose();
  // Tr(U C^T U C) = <U C^T, (U C)^T>
  const Matrix UCt = U * C.transpose();
  const Matrix UC = U * C;
  return UCt.cwiseProduct(UC.transpose()).sum();
}

double finite_difference_check(const std::function<double(const Matrix&)>& objective,
                               const Matrix& point, const Matrix& analytic_gradient,
                               double h_step) {
  Matrix fd(point.rows(), point.cols());
  Matrix x = point;
  for (Eigen::Index i = 0; i < point.rows(); ++i)
    for (Eigen::Index j = 0; j < point.cols(); ++j) {
      const double orig = x(i, j);
      x(i, j) = orig + h_step;
      const double up = objective(x);
      x(i, j) = orig - h_step;
      const double down = objective(x);
      x(i, j) = orig;
      fd(i, j) = (up - down) / (2.0 * h_step);
    }
  const double scale = std::max(analytic_gradient.norm(), 1e-12);
  return (fd - analytic_gradient).norm() / scale;
}

}  // namespace gwdr
