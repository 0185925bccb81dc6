#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gwdr/gw_cost.hpp"
#include "gwdr/oracle.hpp"
#include "test_support.hpp"

using namespace gwdr;
using testsup::interior_plan;
using testsup::quartic_gw_cost;
using testsup::random_matrix;
using testsup::random_simplex;
using testsup::random_symmetric;
using testsup::uniform_h;

TEST_CASE("self-matching with the diagonal plan costs zero") {
  Rng rng(7);
  const Eigen::Index N = 5;
  const Vector h = random_simplex(N, rng);
  const Matrix T = Matrix(h.asDiagonal());
  const TransportPlan plan(T, h);

  const Matrix C = random_symmetric(N, rng);
  CHECK(gw_cost(C, C, plan, LossKind::L2) <= 1e-12);

  const Matrix P = random_matrix(N, N, rng, 0.2, 1.0);
  CHECK(gw_cost(P, P, plan, LossKind::KL) <= 1e-12);
}

TEST_CASE("two-point collapse onto one prototype") {
  Matrix C_X(2, 2);
  C_X << 0.0, 1.0, 1.0, 0.0;
  Matrix C_Z(1, 1);
  C_Z << 0.0;
  Matrix T(2, 1);
  T << 0.5, 0.5;
  const TransportPlan plan(T, uniform_h(2));
  CHECK(gw_cost(C_X, C_Z, plan, LossKind::L2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("KL of matching constants is zero") {
  const Matrix A = Matrix::Constant(3, 3, 0.7);
  const Matrix B = Matrix::Constant(2, 2, 0.7);
  Rng rng(9);
  const Vector h = uniform_h(3);
  const TransportPlan plan(interior_plan(h, 2, rng), h);
  CHECK(gw_cost(A, B, plan, LossKind::KL) <= 1e-14);
}

TEST_CASE("separable decomposition equals the quartic sum") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index N = 3 + static_cast<Eigen::Index>(rng.uniform() * 10);  // up to 12
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 4);   // up to 4
    const Vector h = random_simplex(N, rng);
    const Matrix T = interior_plan(h, n, rng);
    const TransportPlan plan(T, h);

    const LossKind loss = trial % 2 == 0 ? LossKind::L2 : LossKind::KL;
    const Matrix A =
        loss == LossKind::L2 ? random_matrix(N, N, rng) : random_matrix(N, N, rng, 0.1, 2.0);
    const Matrix B =
        loss == LossKind::L2 ? random_matrix(n, n, rng) : random_matrix(n, n, rng, 0.1, 2.0);
    const double got = gw_cost(A, B, plan, loss);
    const double want = quartic_gw_cost(A, B, T, loss);
    CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("plan gradient matches central finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index N = 4 + trial % 3;
    const Eigen::Index n = 2 + trial % 2;
    const Vector h = uniform_h(N);
    const Matrix T = interior_plan(h, n, rng);
    const LossKind loss = trial % 2 == 0 ? LossKind::L2 : LossKind::KL;
    const Matrix A =
        loss == LossKind::L2 ? random_matrix(N, N, rng) : random_matrix(N, N, rng, 0.1, 2.0);
    const Matrix B =
        loss == LossKind::L2 ? random_matrix(n, n, rng) : random_matrix(n, n, rng, 0.5, 2.0);
    const Matrix grad = detail::gw_plan_gradient_m(A, B, T, loss);
    const double err = finite_difference_check(
        [&](const Matrix& P) { return detail::gw_cost_m(A, B, P, loss); }, T, grad);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("constant structures give a constant gradient") {
  const Matrix A = Matrix::Constant(4, 4, 0.3);
  const Matrix B = Matrix::Constant(2, 2, 0.3);
  Rng rng(19);
  const Vector h = uniform_h(4);
  const Matrix T = interior_plan(h, 2, rng);
  const Matrix G = detail::gw_plan_gradient_m(A, B, T, LossKind::L2);
  CHECK((G.array() - G(0, 0)).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("cost is invariant under a simultaneous permutation") {
  Rng rng(23);
  const Eigen::Index N = 7, n = 3;
  const Vector h = uniform_h(N);
  const Matrix A = random_matrix(N, N, rng);
  const Matrix B = random_matrix(n, n, rng);
  const Matrix T = interior_plan(h, n, rng);

  std::vector<Eigen::Index> perm{3, 0, 6, 1, 5, 2, 4};
  Matrix Ap(N, N), Tp(N, n);
  for (Eigen::Index i = 0; i < N; ++i) {
    Tp.row(i) = T.row(perm[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < N; ++j)
      Ap(i, j) = A(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  const double c0 = detail::gw_cost_m(A, B, T, LossKind::L2);
  const double c1 = detail::gw_cost_m(Ap, B, Tp, LossKind::L2);
  CHECK(std::abs(c0 - c1) <= 1e-12 * std::max(1.0, std::abs(c0)));
}

TEST_CASE("KL rejects nonpositive target entries that carry mass") {
  Rng rng(29);
  const Eigen::Index N = 4, n = 2;
  const Vector h = uniform_h(N);
  const TransportPlan plan(interior_plan(h, n, rng), h);
  const Matrix A = random_matrix(N, N, rng, 0.1, 1.0);
  Matrix B = random_matrix(n, n, rng, 0.5, 1.0);
  B(0, 1) = 0.0;
  CHECK_THROWS_AS(gw_cost(A, B, plan, LossKind::KL), std::domain_error);

  // the same zero entries are legal once their loss-mass coefficients vanish
  Matrix M = Matrix::Zero(N, n);
  for (Eigen::Index i = 0; i < N; ++i) M(i, 1) = h(i);  // column 0 empty
  Matrix B2 = B;
  B2.row(0).setZero();
  B2.col(0).setZero();
  B2(1, 1) = 0.8;
  CHECK(std::isfinite(gw_cost(A, B2, TransportPlan(M, h), LossKind::KL)));
}

TEST_CASE("fused cost interpolates between structure and feature terms") {
  Rng rng(31);
  const Eigen::Index N = 4, n = 2, p = 1;
  Matrix X(N, p);
  X << 0.0, 1.0, 10.0, 11.0;
  Matrix F(n, p);
  F << 0.5, 10.5;  // cluster means
  Matrix T = Matrix::Zero(N, n);
  const Vector h = uniform_h(N);
  T(0, 0) = T(1, 0) = h(0);
  T(2, 1) = T(3, 1) = h(0);
  const TransportPlan plan(T, h);

  const Matrix A = random_symmetric(N, rng);
  const Matrix B = random_symmetric(n, rng);

  const double gw = gw_cost(A, B, plan, LossKind::L2);
  const double pure_gw = fused_cost(A, X, B, F, plan, FusedWeights(1.0), LossKind::L2);
  CHECK(pure_gw == gw);  // bitwise degenerate path

  // alpha = 0 is the transport-weighted within-cluster sum of squares
  const double wcss = 0.25 * (0.25 + 0.25 + 0.25 + 0.25);
  const double pure_feat = fused_cost(A, X, B, F, plan, FusedWeights(0.0), LossKind::L2);
  CHECK(pure_feat == doctest::Approx(wcss).epsilon(1e-12));

  const double mid = fused_cost(A, X, B, F, plan, FusedWeights(0.5), LossKind::L2);
  CHECK(mid == doctest::Approx(0.5 * gw + 0.5 * wcss).epsilon(1e-12));
}

TEST_CASE("feature cost matrix handles both losses") {
  Matrix X(2, 2);
  X << 1.0, 0.0, 0.0, 2.0;
  Matrix F(1, 2);
  F << 1.0, 1.0;
  const Matrix L2cost = feature_cost_matrix(X, F, LossKind::L2);
  CHECK(L2cost(0, 0) == doctest::Approx(1.0));
  CHECK(L2cost(1, 0) == doctest::Approx(2.0));

  const Matrix KLcost = feature_cost_matrix(X, F, LossKind::KL);
  CHECK(KLcost(0, 0) == doctest::Approx(1.0));  // x=0 column adds f, x=1 column adds 0
}
