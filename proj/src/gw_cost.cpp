#include "gwdr/gw_cost.hpp"

#include <cmath>

namespace gwdr {

namespace {

constexpr double kLogFloor = 1e-30;

double xlogx_minus_x(double a) {
  if (a == 0.0) return 0.0;  // 0 log 0 = 0
  return a * std::log(a) - a;
}

void check_kl_source(const Matrix& A) {
  if ((A.array() < 0.0).any())
    throw std::domain_error("gw_cost: KL loss requires a nonnegative source matrix");
}

// Throws when a nonpositive target entry carries loss mass: the coefficient
// of log(B_kl) in the cost is (T^T A T)_kl, so only pairs where it is
// positive are genuine domain violations.
void check_kl_target(const Matrix& B, const Matrix& coupling) {
  for (Eigen::Index k = 0; k < B.rows(); ++k)
    for (Eigen::Index l = 0; l < B.cols(); ++l)
      if (B(k, l) <= 0.0 && coupling(k, l) > 0.0)
        throw std::domain_error("gw_cost: KL loss hit a nonpositive target entry on support");
}

}  // namespace

namespace loss_terms {

Matrix f1(const Matrix& A, LossKind loss) {
  if (loss == LossKind::L2) return A.cwiseProduct(A);
  return A.unaryExpr([](double a) { return xlogx_minus_x(a); });
}

Matrix f2(const Matrix& B, LossKind loss) {
  if (loss == LossKind::L2) return B.cwiseProduct(B);
  return B;
}

Matrix h1(const Matrix& A, LossKind loss) {
  if (loss == LossKind::L2) return A;
  return A;
}

Matrix h2_cost(const Matrix& B, LossKind loss, const Matrix& coupling) {
  if (loss == LossKind::L2) return 2.0 * B;
  Matrix out(B.rows(), B.cols());
  for (Eigen::Index k = 0; k < B.rows(); ++k)
    for (Eigen::Index l = 0; l < B.cols(); ++l) {
      const double b =
          coupling(k, l) == 0.0 ? std::max(B(k, l), kLogFloor) : B(k, l);
      out(k, l) = std::log(b);
    }
  return out;
}

Matrix h2_grad(const Matrix& B, LossKind loss) {
  if (loss == LossKind::L2) return 2.0 * B;
  return B.unaryExpr([](double b) { return std::log(std::max(b, kLogFloor)); });
}

}  // namespace loss_terms

Matrix structure_coupling(const Matrix& h1A, const Matrix& T) {
  return T.transpose() * (h1A * T);
}

namespace detail {

struct CostParts {
  double marginal_source = 0.0;  // <f1(A) r, r>
  double marginal_target = 0.0;  // <f2(B) c, c>
  double cross = 0.0;            // <h2(B), T^T h1(A) T>
  double value() const { return marginal_source + marginal_target - cross; }
};

CostParts gw_cost_parts(const Matrix& A, const Matrix& B, const Matrix& T, LossKind loss) {
  if (A.rows() != A.cols() || B.rows() != B.cols())
    throw std::invalid_argument("gw_cost: structures must be square");
  if (T.rows() != A.rows() || T.cols() != B.rows())
    throw std::invalid_argument("gw_cost: plan dimensions do not match the structures");
  if (loss == LossKind::KL) check_kl_source(A);

  const Vector r = T.rowwise().sum();
  const Vector c = T.colwise().sum().transpose();
  const Matrix R = structure_coupling(loss_terms::h1(A, loss), T);
  if (loss == LossKind::KL) check_kl_target(B, R);

  CostParts parts;
  parts.marginal_source = r.dot(loss_terms::f1(A, loss) * r);
  parts.marginal_target = c.dot(loss_terms::f2(B, loss) * c);
  parts.cross = loss_terms::h2_cost(B, loss, R).cwiseProduct(R).sum();
  return parts;
}

double gw_cost_m(const Matrix& A, const Matrix& B, const Matrix& T, LossKind loss) {
  const CostParts parts = gw_cost_parts(A, B, T, loss);
  const double value = parts.value();
  if (!std::isfinite(value)) throw SolverError("gw_cost: non-finite value");
  // the quartic sum is a sum of nonnegative terms; clear rounding dust
  const double scale =
      std::abs(parts.marginal_source) + std::abs(parts.marginal_target) + std::abs(parts.cross);
  if (value < 0.0 && value >= -1e-12 * scale) return 0.0;
  return value;
}

Matrix gw_plan_gradient_m(const Matrix& A, const Matrix& B, const Matrix& T, LossKind loss) {
  if (loss == LossKind::KL) {
    check_kl_source(A);
    check_kl_target(B, structure_coupling(A, T));
  }
  const Vector r = T.rowwise().sum();
  const Vector c = T.colwise().sum().transpose();
  const Matrix f1A = loss_terms::f1(A, loss);
  const Matrix f2B = loss_terms::f2(B, loss);
  const Matrix h1A = loss_terms::h1(A, loss);
  const Matrix h2B = loss_terms::h2_grad(B, loss);

  Matrix grad = -(h1A * T * h2B.transpose() + h1A.transpose() * T * h2B);
  const Vector row_term = (f1A + f1A.transpose()) * r;
  const Vector col_term = (f2B + f2B.transpose()) * c;
  grad.colwise() += row_term;
  grad.rowwise() += col_term.transpose();
  return grad;
}

Matrix feature_cost_m(const Matrix& X, const Matrix& F, LossKind loss) {
  if (X.cols() != F.cols())
    throw std::invalid_argument("feature_cost_matrix: feature dimensions differ");
  if (loss == LossKind::L2) {
    const Vector xx = X.rowwise().squaredNorm();
    const Vector ff = F.rowwise().squaredNorm();
    Matrix M = -2.0 * (X * F.transpose());
    M.colwise() += xx;
    M.rowwise() += ff.transpose();
    return M.cwiseMax(0.0);
  }
  Matrix M(X.rows(), F.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < F.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double x = X(i, k);
        const double f = F(j, k);
        if (x < 0.0)
          throw std::domain_error("feature_cost_matrix: KL loss requires nonnegative features");
        if (x > 0.0)
          s += x * std::log(x / std::max(f, kLogFloor)) - x + f;
        else
          s += f;
      }
      M(i, j) = s;
    }
  return M;
}

double fused_cost_m(const Matrix& A, const Matrix& X, const Matrix& B, const Matrix& F,
                    const Matrix& T, double alpha, LossKind loss) {
  if (alpha == 1.0) return gw_cost_m(A, B, T, loss);
  const double linear = feature_cost_m(X, F, loss).cwiseProduct(T).sum();
  if (alpha == 0.0) return linear;
  return alpha * gw_cost_m(A, B, T, loss) + (1.0 - alpha) * linear;
}

Matrix fused_plan_gradient_m(const Matrix& A, const Matrix& X, const Matrix& B, const Matrix& F,
                             const Matrix& T, double alpha, LossKind loss) {
  if (alpha == 1.0) return gw_plan_gradient_m(A, B, T, loss);
  const Matrix feat = feature_cost_m(X, F, loss);
  if (alpha == 0.0) return feat;
  return alpha * gw_plan_gradient_m(A, B, T, loss) + (1.0 - alpha) * feat;
}

}  // namespace detail

double gw_cost(const Matrix& C_X, const Matrix& C_Z, const TransportPlan& T, LossKind loss) {
  return detail::gw_cost_m(C_X, C_Z, T.values, loss);
}

double gw_cost(const AffinityMatrix& C_X, const AffinityMatrix& C_Z, const TransportPlan& T,
               LossKind loss) {
  return detail::gw_cost_m(C_X.values, C_Z.values, T.values, loss);
}

Matrix gw_plan_gradient(const Matrix& C_X, const Matrix& C_Z, const TransportPlan& T,
                        LossKind loss) {
  return detail::gw_plan_gradient_m(C_X, C_Z, T.values, loss);
}

Matrix feature_cost_matrix(const Matrix& X, const Matrix& F, LossKind loss) {
  return detail::feature_cost_m(X, F, loss);
}

double fused_cost(const Matrix& C_X, const Matrix& X, const Matrix& C_Z, const Matrix& F,
                  const TransportPlan& T, FusedWeights alpha, LossKind loss) {
  return detail::fused_cost_m(C_X, X, C_Z, F, T.values, alpha.alpha, loss);
}

Matrix fused_plan_gradient(const Matrix& C_X, const Matrix& X, const Matrix& C_Z, const Matrix& F,
                           const TransportPlan& T, FusedWeights alpha, LossKind loss) {
  return detail::fused_plan_gradient_m(C_X, X, C_Z, F, T.values, alpha.alpha, loss);
}

}  // namespace gwdr
