#include "gwdr/solver.hpp"

#include "gwdr/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gwdr {

TransportPlan semi_relaxed_lmo(const Matrix& G, const Vector& h) {
  if (!G.allFinite()) throw std::invalid_argument("semi_relaxed_lmo: non-finite gradient");
  if (G.rows() != h.size()) throw std::invalid_argument("semi_relaxed_lmo: dimension mismatch");
  Matrix T = Matrix::Zero(G.rows(), G.cols());
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < G.cols(); ++j)
      if (G(i, j) < G(i, best)) best = j;
    T(i, best) = h(i);
  }
  return TransportPlan(std::move(T), h);
}

namespace {

// Semi-relaxed (fused) GW objective with the loss transforms cached.
// alpha == 1 never touches the feature term; alpha == 0 never touches the
// structure term.
class SrfgwObjective {
 public:
  SrfgwObjective(const Matrix& A, const Matrix* X, const Matrix& B, const Matrix* F, double alpha,
                 LossKind loss)
      : B_(B), alpha_(alpha), loss_(loss) {
    if (alpha_ > 0.0) {
      f1A_ = loss_terms::f1(A, loss);
      f2B_ = loss_terms::f2(B, loss);
      h1A_ = loss_terms::h1(A, loss);
      h2B_grad_ = loss_terms::h2_grad(B, loss);
    }
    if (alpha_ < 1.0) {
      if (X == nullptr || F == nullptr)
        throw std::invalid_argument("srfgw: fused objective needs features and prototypes");
      feat_ = detail::feature_cost_m(*X, *F, loss);
    }
  }

  double gw_part(const Matrix& T) const {
    const Vector r = T.rowwise().sum();
    const Vector c = T.colwise().sum().transpose();
    const Matrix R = structure_coupling(h1A_, T);
    if (loss_ == LossKind::KL) {
      for (Eigen::Index k = 0; k < B_.rows(); ++k)
        for (Eigen::Index l = 0; l < B_.cols(); ++l)
          if (B_(k, l) <= 0.0 && R(k, l) > 0.0)
            throw std::domain_error("srfgw: KL loss hit a nonpositive target entry on support");
    }
    const double s1 = r.dot(f1A_ * r);
    const double s2 = c.dot(f2B_ * c);
    const double s3 = loss_terms::h2_cost(B_, loss_, R).cwiseProduct(R).sum();
    const double value = s1 + s2 - s3;
    if (value < 0.0 && value >= -1e-12 * (std::abs(s1) + std::abs(s2) + std::abs(s3))) return 0.0;
    return value;
  }

  double cost(const Matrix& T) const {
    if (alpha_ == 1.0) return gw_part(T);
    const double linear = feat_.cwiseProduct(T).sum();
    if (alpha_ == 0.0) return linear;
    return alpha_ * gw_part(T) + (1.0 - alpha_) * linear;
  }

  Matrix gradient(const Matrix& T) const {
    if (alpha_ == 0.0) return feat_;
    const Vector r = T.rowwise().sum();
    const Vector c = T.colwise().sum().transpose();
    Matrix grad = -(h1A_ * T * h2B_grad_.transpose() + h1A_.transpose() * T * h2B_grad_);
    grad.colwise() += Vector((f1A_ + f1A_.transpose()) * r);
    grad.rowwise() += Vector((f2B_ + f2B_.transpose()) * c).transpose();
    if (alpha_ == 1.0) return grad;
    return alpha_ * grad + (1.0 - alpha_) * feat_;
  }

  // Coefficients of the quadratic objective along T + gamma * Delta (L2).
  std::pair<double, double> segment_quadratic(const Matrix& T, const Matrix& Delta) const {
    double a = 0.0, b = 0.0;
    if (alpha_ > 0.0) {
      const Vector cT = T.colwise().sum().transpose();
      const Vector cD = Delta.colwise().sum().transpose();
      const Matrix P1 = h1A_ * T;
      const Matrix P2 = h1A_ * Delta;
      const Matrix twoB = 2.0 * B_;
      const double a_gw = cD.dot(f2B_ * cD) - twoB.cwiseProduct(Delta.transpose() * P2).sum();
      const double b_gw = cD.dot((f2B_ + f2B_.transpose()) * cT) -
                          twoB.cwiseProduct(Delta.transpose() * P1 + T.transpose() * P2).sum();
      a += alpha_ * a_gw;
      b += alpha_ * b_gw;
    }
    if (alpha_ < 1.0) b += (1.0 - alpha_) * feat_.cwiseProduct(Delta).sum();
    return {a, b};
  }

  LossKind loss() const { return loss_; }

 private:
  const Matrix& B_;
  double alpha_;
  LossKind loss_;
  Matrix f1A_, f2B_, h1A_, h2B_grad_, feat_;
};

double pick_step(const SrfgwObjective& obj, const Matrix& T, const Matrix& Delta, double cost,
                 const Matrix& grad, StepPolicy policy) {
  if (obj.loss() == LossKind::L2 && policy == StepPolicy::exact_quadratic) {
    const auto [a, b] = obj.segment_quadratic(T, Delta);
    if (a > 0.0) return std::clamp(-b / (2.0 * a), 0.0, 1.0);
    return (a + b < 0.0) ? 1.0 : 0.0;
  }
  // Armijo backtracking
  const double slope = grad.cwiseProduct(Delta).sum();
  if (!(slope < 0.0)) return 0.0;
  double gamma = 1.0;
  for (int k = 0; k < 30; ++k) {
    if (obj.cost(T + gamma * Delta) <= cost + 1e-4 * gamma * slope) return gamma;
    gamma *= 0.5;
  }
  return 0.0;
}

struct RunOutcome {
  Matrix T;
  SolveReport report;
};

RunOutcome run_cg(const SrfgwObjective& obj, const Vector& h, Matrix T,
                  const SolverOptions& opts) {
  SolveReport report;
  double cost = obj.cost(T);
  if (!std::isfinite(cost)) throw SolverError("solve_srgw: non-finite initial cost");
  report.cost_trace.push_back(cost);

  for (int iter = 1; iter <= opts.max_cg_iters; ++iter) {
    report.iterations = iter;
    const Matrix grad = obj.gradient(T);
    const Matrix D = semi_relaxed_lmo(grad, h).values;
    const Matrix Delta = D - T;
    const double gamma = pick_step(obj, T, Delta, cost, grad, opts.step_policy);

    double new_cost = cost;
    if (gamma > 0.0) {
      Matrix cand = T + gamma * Delta;
      const double cand_cost = obj.cost(cand);
      if (!std::isfinite(cand_cost)) throw SolverError("solve_srgw: non-finite cost");
      if (cand_cost <= cost) {
        T = std::move(cand);
        new_cost = cand_cost;
      }
    }
    report.cost_trace.push_back(new_cost);
    const bool stalled = std::abs(new_cost - cost) <= opts.rel_tol * std::max(1.0, std::abs(new_cost));
    cost = new_cost;
    if (stalled) {
      report.converged = true;
      break;
    }
  }
  report.final_cost = cost;
  return {std::move(T), std::move(report)};
}

SrgwResult solve_srfgw_impl(const Matrix& C_X, const Matrix* X, const Vector& h, const Matrix& C_Z,
                            const Matrix* F, double alpha, LossKind loss,
                            const SolverOptions& opts, const Matrix* init) {
  opts.validate();
  if (C_X.rows() != h.size()) throw std::invalid_argument("solve_srgw: marginal length mismatch");
  const SrfgwObjective obj(C_X, X, C_Z, F, alpha, loss);

  RunOutcome best;
  bool have_best = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Matrix T0;
    if (r == 0 && init != nullptr) {
      if (init->rows() != C_X.rows() || init->cols() != C_Z.rows())
        throw std::invalid_argument("solve_srgw: init plan has wrong shape");
      T0 = *init;
    } else {
      Rng rng(opts.seed + static_cast<std::uint64_t>(r));
      T0 = random_plan_values(h, C_Z.rows(), rng);
    }
    RunOutcome outcome = run_cg(obj, h, std::move(T0), opts);
    if (!have_best || outcome.report.final_cost < best.report.final_cost) {
      best = std::move(outcome);
      have_best = true;
    }
  }
  return SrgwResult{TransportPlan(std::move(best.T), h), std::move(best.report)};
}

}  // namespace

double exact_line_search(const Matrix& C_X, const Matrix& C_Z, const TransportPlan& T,
                         const TransportPlan& D) {
  const SrfgwObjective obj(C_X, nullptr, C_Z, nullptr, 1.0, LossKind::L2);
  const Matrix Delta = D.values - T.values;
  const auto [a, b] = obj.segment_quadratic(T.values, Delta);
  if (a > 0.0) return std::clamp(-b / (2.0 * a), 0.0, 1.0);
  return (a + b < 0.0) ? 1.0 : 0.0;
}

SrgwResult solve_srgw(const Matrix& C_X, const Vector& h, const Matrix& C_Z, LossKind loss,
                      const SolverOptions& opts, const Matrix* init) {
  return solve_srfgw_impl(C_X, nullptr, h, C_Z, nullptr, 1.0, loss, opts, init);
}

SrgwResult solve_srfgw(const Matrix& C_X, const Matrix& X, const Vector& h, const Matrix& C_Z,
                       const Matrix& F, FusedWeights alpha, LossKind loss,
                       const SolverOptions& opts, const Matrix* init) {
  return solve_srfgw_impl(C_X, &X, h, C_Z, &F, alpha.alpha, loss, opts, init);
}

std::string to_json(const SolveReport& report) {
  nlohmann::json j;
  j["final_cost"] = report.final_cost;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["cost_trace"] = report.cost_trace;
  return j.dump();
}

}  // namespace gwdr
