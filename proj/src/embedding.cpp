#include "gwdr/embedding.hpp"

#include "gwdr/affinity.hpp"
#include "gwdr/random.hpp"

#include <cmath>
#include <optional>
#include <utility>

namespace gwdr {

namespace {

Matrix student_base_kernel(const Matrix& Z) {
  const Eigen::Index n = Z.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j)
      K(i, j) = K(j, i) = 1.0 / (1.0 + (Z.row(i) - Z.row(j)).squaredNorm());
  }
  return K;
}

Vector sinkhorn_scaling(const Matrix& K) {
  Vector u = Vector::Ones(K.rows());
  for (int it = 0; it < 10000; ++it) {
    const Vector Ku = K * u;
    if ((u.array() * Ku.array() - 1.0).abs().maxCoeff() <= 1e-10) break;
    u = (u.array() / Ku.array()).sqrt().matrix();
  }
  return u;
}

Matrix model_affinity(const Matrix& Z, EmbeddingModel model, const Vector* frozen_u) {
  switch (model) {
    case EmbeddingModel::gram:
      return Z * Z.transpose();
    case EmbeddingModel::student:
      return student_base_kernel(Z);
    case EmbeddingModel::student_doubly_stochastic: {
      const Matrix K = student_base_kernel(Z);
      const Vector u = frozen_u ? *frozen_u : sinkhorn_scaling(K);
      return u.asDiagonal() * K * u.asDiagonal();
    }
  }
  throw std::logic_error("model_affinity: unknown model");
}

// GW part of the objective at fixed plan, from precomputed plan statistics.
struct PlanContext {
  Matrix R;          // T^T A T
  Vector c;          // column marginal
  double source = 0; // <f1(A) r, r>
};

PlanContext make_plan_context(const Matrix& A, const Matrix& T, LossKind loss) {
  PlanContext ctx;
  ctx.R = structure_coupling(loss_terms::h1(A, loss), T);
  ctx.c = T.colwise().sum().transpose();
  const Vector r = T.rowwise().sum();
  ctx.source = r.dot(loss_terms::f1(A, loss) * r);
  return ctx;
}

double gw_part_at(const PlanContext& ctx, const Matrix& B, LossKind loss) {
  if (loss == LossKind::KL) {
    for (Eigen::Index k = 0; k < B.rows(); ++k)
      for (Eigen::Index l = 0; l < B.cols(); ++l)
        if (B(k, l) <= 0.0 && ctx.R(k, l) > 0.0)
          throw std::domain_error("gwdr: KL loss hit a nonpositive embedding affinity on support");
  }
  const double s2 = ctx.c.dot(loss_terms::f2(B, loss) * ctx.c);
  const double s3 = loss_terms::h2_cost(B, loss, ctx.R).cwiseProduct(ctx.R).sum();
  return ctx.source + s2 - s3;
}

// dcost/dB at fixed plan.
Matrix affinity_gradient(const PlanContext& ctx, const Matrix& B, LossKind loss) {
  if (loss == LossKind::L2)
    return 2.0 * B.cwiseProduct(ctx.c * ctx.c.transpose()) - 2.0 * ctx.R;
  Matrix grad = ctx.c * ctx.c.transpose();
  for (Eigen::Index k = 0; k < B.rows(); ++k)
    for (Eigen::Index l = 0; l < B.cols(); ++l) {
      if (ctx.R(k, l) == 0.0) continue;
      if (B(k, l) <= 0.0)
        throw std::domain_error("gwdr: KL gradient hit a nonpositive embedding affinity");
      grad(k, l) -= ctx.R(k, l) / B(k, l);
    }
  return grad;
}

// Chain rule through the student kernel: S = (G_K + G_K^T) .* K^2.
Matrix student_chain(const Matrix& Z, const Matrix& K, const Matrix& G_K) {
  const Matrix S = (G_K + G_K.transpose()).cwiseProduct(K.cwiseProduct(K));
  return 2.0 * ((S - Matrix(Vector(S.rowwise().sum()).asDiagonal())) * Z);
}

Matrix z_gradient_at(const PlanContext& ctx, const Matrix& Z, EmbeddingModel model,
                     LossKind loss) {
  switch (model) {
    case EmbeddingModel::gram: {
      const Matrix B = Z * Z.transpose();
      const Matrix G_B = affinity_gradient(ctx, B, loss);
      return (G_B + G_B.transpose()) * Z;
    }
    case EmbeddingModel::student: {
      const Matrix K = student_base_kernel(Z);
      const Matrix G_K = affinity_gradient(ctx, K, loss);
      return student_chain(Z, K, G_K);
    }
    case EmbeddingModel::student_doubly_stochastic: {
      const Matrix K = student_base_kernel(Z);
      const Vector u = sinkhorn_scaling(K);
      const Matrix P = u.asDiagonal() * K * u.asDiagonal();
      const Matrix G_P = affinity_gradient(ctx, P, loss);
      const Matrix G_K = G_P.cwiseProduct(u * u.transpose());
      return student_chain(Z, K, G_K);
    }
  }
  throw std::logic_error("z_gradient: unknown model");
}

}  // namespace

Embedding init_embeddings(int n, int d, std::uint64_t seed, EmbeddingModel model) {
  if (n < 1 || d < 1) throw std::invalid_argument("init_embeddings: need n, d >= 1");
  Rng rng(seed);
  Matrix Z(n, d);
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) = rng.normal();
  return Embedding{std::move(Z), model};
}

AffinityMatrix embedding_affinity(const Embedding& E) {
  if (!E.Z.allFinite()) throw std::invalid_argument("embedding_affinity: non-finite Z");
  switch (E.model) {
    case EmbeddingModel::gram: {
      Matrix B = E.Z * E.Z.transpose();
      for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = i + 1; j < B.cols(); ++j) B(j, i) = B(i, j);
      return make_affinity(std::move(B), AffinityKind::gram, true, false);
    }
    case EmbeddingModel::student:
      return student_kernel(E.Z, StudentNormalize::none);
    case EmbeddingModel::student_doubly_stochastic:
      return student_kernel(E.Z, StudentNormalize::doubly_stochastic);
  }
  throw std::logic_error("embedding_affinity: unknown model");
}

Matrix z_gradient(const Matrix& C_X, const Vector& /*h*/, const Embedding& E,
                  const TransportPlan& T, LossKind loss) {
  const PlanContext ctx = make_plan_context(C_X, T.values, loss);
  return z_gradient_at(ctx, E.Z, E.model, loss);
}

double z_objective_frozen(const Matrix& C_X, const Embedding& E, const Matrix& Z_eval,
                          const TransportPlan& T, LossKind loss) {
  const PlanContext ctx = make_plan_context(C_X, T.values, loss);
  std::optional<Vector> frozen;
  if (E.model == EmbeddingModel::student_doubly_stochastic)
    frozen = sinkhorn_scaling(student_base_kernel(E.Z));
  const Matrix B = model_affinity(Z_eval, E.model, frozen ? &*frozen : nullptr);
  return gw_part_at(ctx, B, loss);
}

namespace {

struct ZBlockResult {
  Matrix Z;
  double gw_cost = 0.0;
};

// Adam descent on Z at fixed plan; returns the best visited iterate so the
// block never increases the objective. Rows of empty prototypes stay frozen.
ZBlockResult run_z_block(const PlanContext& ctx, Matrix Z, EmbeddingModel model, LossKind loss,
                         const GwdrOptions& opts) {
  ZBlockResult best{Z, gw_part_at(ctx, model_affinity(Z, model, nullptr), loss)};
  Matrix m = Matrix::Zero(Z.rows(), Z.cols());
  Matrix v = Matrix::Zero(Z.rows(), Z.cols());
  const AdamOptions& adam = opts.adam;

  for (int t = 1; t <= opts.z_steps_per_block; ++t) {
    Matrix grad;
    try {
      grad = z_gradient_at(ctx, Z, model, loss);
    } catch (const std::domain_error&) {
      break;  // stepped outside the KL domain: keep the best feasible iterate
    }
    for (Eigen::Index j = 0; j < Z.rows(); ++j)
      if (ctx.c(j) <= kEmptyColumnMass) grad.row(j).setZero();

    m = adam.beta1 * m + (1.0 - adam.beta1) * grad;
    v = adam.beta2 * v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(adam.beta1, t);
    const double bc2 = 1.0 - std::pow(adam.beta2, t);
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
      if (ctx.c(j) <= kEmptyColumnMass) continue;
      for (Eigen::Index k = 0; k < Z.cols(); ++k) {
        const double mhat = m(j, k) / bc1;
        const double vhat = v(j, k) / bc2;
        Z(j, k) -= adam.lr * mhat / (std::sqrt(vhat) + adam.eps);
      }
    }

    double cost;
    try {
      cost = gw_part_at(ctx, model_affinity(Z, model, nullptr), loss);
    } catch (const std::domain_error&) {
      break;
    }
    if (cost < best.gw_cost) {
      best.gw_cost = cost;
      best.Z = Z;
    }
  }
  return best;
}

FgwdrResult solve_fgwdr_impl(const Matrix& C_X, const Matrix* X, const Vector& h, int n, int d,
                             EmbeddingModel model, LossKind loss, const GwdrOptions& opts,
                             const Matrix* init_plan, const Matrix* init_Z) {
  opts.validate();
  if (n < 1 || n > C_X.rows()) throw std::invalid_argument("solve_gwdr: need 1 <= n <= N");
  if (d < 1) throw std::invalid_argument("solve_gwdr: need d >= 1");
  const double alpha = opts.alpha.alpha;
  if (alpha < 1.0 && X == nullptr)
    throw std::invalid_argument("solve_gwdr: fused objective needs features");

  SolverOptions inner = opts.solver;
  inner.restarts = 1;

  Embedding E = init_Z ? Embedding{*init_Z, model} : init_embeddings(n, d, opts.solver.seed, model);
  Matrix T;
  if (init_plan) {
    T = *init_plan;
  } else {
    Rng rng(derive_seed(opts.solver.seed, 1));
    T = random_plan_values(h, n, rng);
  }
  TransportPlan plan(T, h);
  Matrix F;
  if (alpha < 1.0) F = feature_barycenter(*X, plan);

  Matrix B = model_affinity(E.Z, model, nullptr);
  PlanContext ctx = make_plan_context(C_X, plan.values, loss);
  double gw_value = alpha > 0.0 ? gw_part_at(ctx, B, loss) : 0.0;
  double lin_value =
      alpha < 1.0 ? detail::feature_cost_m(*X, F, loss).cwiseProduct(plan.values).sum() : 0.0;
  auto total = [&](double gw, double lin) {
    if (alpha == 1.0) return gw;
    if (alpha == 0.0) return lin;
    return alpha * gw + (1.0 - alpha) * lin;
  };

  SolveReport outer;
  double cost = total(gw_value, lin_value);
  if (!std::isfinite(cost)) throw SolverError("solve_gwdr: non-finite initial cost");
  outer.cost_trace.push_back(cost);

  for (int block = 1; block <= opts.bcd_iters; ++block) {
    outer.iterations = block;

    SrgwResult inner_result =
        alpha == 1.0 ? solve_srgw(C_X, h, B, loss, inner, &plan.values)
                     : solve_srfgw(C_X, *X, h, B, F, FusedWeights(alpha), loss, inner,
                                   &plan.values);
    plan = std::move(inner_result.plan);
    ctx = make_plan_context(C_X, plan.values, loss);

    if (alpha < 1.0) {
      F = feature_barycenter(*X, plan);
      lin_value = detail::feature_cost_m(*X, F, loss).cwiseProduct(plan.values).sum();
    }

    if (alpha > 0.0) {
      ZBlockResult z = run_z_block(ctx, E.Z, model, loss, opts);
      E.Z = std::move(z.Z);
      gw_value = z.gw_cost;
      B = model_affinity(E.Z, model, nullptr);
    }

    const double new_cost = total(gw_value, lin_value);
    if (!std::isfinite(new_cost)) throw SolverError("solve_gwdr: non-finite cost");
    outer.cost_trace.push_back(new_cost);
    const bool stalled = std::abs(new_cost - cost) <= 1e-9 * std::max(1.0, std::abs(new_cost));
    cost = new_cost;
    if (stalled) {
      outer.converged = true;
      break;
    }
  }
  outer.final_cost = cost;

  // reported graph: empty prototypes pruned to zero rows/cols
  Vector hbar = plan.col_marginal();
  Matrix structure = B;
  for (Eigen::Index j = 0; j < structure.rows(); ++j) {
    if (hbar(j) <= kEmptyColumnMass) {
      structure.row(j).setZero();
      structure.col(j).setZero();
    }
  }

  FgwdrResult result{std::move(E),
                     alpha < 1.0 ? F : (X ? feature_barycenter(*X, plan) : Matrix()),
                     std::move(plan),
                     BarycenterGraph{std::move(structure), std::move(hbar)},
                     std::move(outer)};
  return result;
}

}  // namespace

GwdrResult solve_gwdr(const Matrix& C_X, const Vector& h, int n, int d, EmbeddingModel model,
                      LossKind loss, const GwdrOptions& opts, const Matrix* init_plan,
                      const Matrix* init_Z) {
  GwdrOptions o = opts;
  o.alpha = FusedWeights(1.0);
  FgwdrResult r = solve_fgwdr_impl(C_X, nullptr, h, n, d, model, loss, o, init_plan, init_Z);
  return GwdrResult{std::move(r.embedding), std::move(r.plan), std::move(r.graph),
                    std::move(r.report)};
}

FgwdrResult solve_fgwdr(const Matrix& C_X, const DataMatrix& X, const Vector& h, int n, int d,
                        EmbeddingModel model, LossKind loss, const GwdrOptions& opts,
                        const Matrix* init_plan, const Matrix* init_Z) {
  return solve_fgwdr_impl(C_X, &X.values, h, n, d, model, loss, opts, init_plan, init_Z);
}

}  // namespace gwdr
