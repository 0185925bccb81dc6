#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gwdr/affinity.hpp"
#include "gwdr/barycenter.hpp"
#include "gwdr/oracle.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace gwdr;
using testsup::interior_plan;
using testsup::random_matrix;
using testsup::random_simplex;
using testsup::uniform_h;

namespace {

Matrix two_block_structure() {
  Matrix C = Matrix::Zero(6, 6);
  C.block(0, 0, 3, 3).setOnes();
  C.block(3, 3, 3, 3).setOnes();
  return C;
}

}  // namespace

TEST_CASE("brute force finds the zero-cost block partition") {
  const MembershipOptimum best =
      brute_force_membership_optimum({two_block_structure(), uniform_h(6), 2, LossKind::L2});
  CHECK(best.cost <= 1e-12);
  for (int i = 1; i < 3; ++i) CHECK(best.labels[static_cast<std::size_t>(i)] == best.labels[0]);
  for (int i = 4; i < 6; ++i) CHECK(best.labels[static_cast<std::size_t>(i)] == best.labels[3]);
  CHECK(best.labels[0] != best.labels[3]);
}

TEST_CASE("single-prototype enumeration gives the weighted variance") {
  Rng rng(3);
  const Eigen::Index N = 5;
  const Vector h = random_simplex(N, rng);
  const Matrix C = random_matrix(N, N, rng);
  const MembershipOptimum best = brute_force_membership_optimum({C, h, 1, LossKind::L2});
  const double mean = h.dot(C * h);
  const double second = h.dot(C.cwiseProduct(C) * h);
  CHECK(best.cost == doctest::Approx(second - mean * mean).epsilon(1e-12));
}

TEST_CASE("enumeration budget is enforced") {
  Rng rng(5);
  const Matrix C = random_matrix(12, 12, rng);
  CHECK_THROWS_AS(brute_force_membership_optimum({C, uniform_h(12), 4, LossKind::L2}),
                  std::invalid_argument);
}

TEST_CASE("sampled concavity evidence on PSD structures") {
  Rng rng(7);
  const Matrix C = mds_kernel(DataMatrix(random_matrix(8, 3, rng))).values;
  const double violation =
      concavity_probe(C, uniform_h(8), 3, 100, {0.25, 0.5, 0.75}, 11);
  CHECK(violation <= 1e-10);
}

TEST_CASE("sampled concavity evidence on squared-distance structures") {
  Rng rng(11);
  const Matrix E = squared_distance_matrix(DataMatrix(random_matrix(8, 3, rng)));
  const double violation = concavity_probe(E, uniform_h(8), 3, 100, {0.25, 0.5, 0.75}, 13);
  CHECK(violation <= 1e-10);
}

TEST_CASE("indefinite structures are probed without asserting concavity") {
  Rng rng(13);
  Matrix C = testsup::random_symmetric(8, rng);  // mixed spectrum
  const double violation = concavity_probe(C, uniform_h(8), 3, 50, {0.5}, 17);
  CHECK(std::isfinite(violation));  // probe reports evidence either way
}

TEST_CASE("fixed-marginal probe in the PSD regime") {
  Rng rng(17);
  const Matrix C = mds_kernel(DataMatrix(random_matrix(7, 3, rng))).values;
  const Vector h = uniform_h(7);
  const Vector hbar = random_simplex(3, rng);
  CHECK(fixed_marginal_concavity_probe(C, h, hbar, 50, 19) <= 1e-10);
}

TEST_CASE("degenerate fixed-marginal pair interpolates exactly") {
  Rng rng(19);
  const Eigen::Index N = 5;
  const Vector h = random_simplex(N, rng);
  const Matrix C = random_matrix(N, N, rng);
  const TransportPlan diag_plan(Matrix(h.asDiagonal()), h);
  const double f = factorized_objective(C, diag_plan);
  const Matrix mix = 0.5 * diag_plan.values + 0.5 * diag_plan.values;
  const double f_mix = factorized_objective(C, TransportPlan(mix, h));
  CHECK(std::abs(f_mix - f) <= 1e-12 * std::max(1.0, std::abs(f)));
}

TEST_CASE("low-rank gluing value at the diagonal plan") {
  Rng rng(23);
  const Eigen::Index N = 5;
  const Vector h = random_simplex(N, rng);
  const Matrix C = random_matrix(N, N, rng);
  const TransportPlan plan(Matrix(h.asDiagonal()), h);
  const double g = lowrank_gluing_cost(C, plan);
  const double want = h.dot(C.cwiseProduct(C) * h);
  CHECK(g == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("low-rank gluing on the hand-checkable instance") {
  Matrix C(2, 2);
  C << 0.0, 1.0, 1.0, 0.0;
  Matrix T(2, 1);
  T << 0.5, 0.5;
  CHECK(lowrank_gluing_cost(C, TransportPlan(T, uniform_h(2))) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gluing cost and factorized objective split the constant") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index N = 4 + static_cast<Eigen::Index>(rng.uniform() * 6);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 3);
    const Vector h = random_simplex(N, rng);
    const Matrix C = random_matrix(N, N, rng);
    const TransportPlan plan(interior_plan(h, n, rng), h);
    const double total = h.dot(C.cwiseProduct(C) * h);
    const double split = lowrank_gluing_cost(C, plan) + factorized_objective(C, plan);
    CHECK(std::abs(split - total) <= 1e-10 * std::max(1.0, std::abs(total)));
  }
}

TEST_CASE("gluing cost requires positive column marginals") {
  const Vector h = uniform_h(3);
  Matrix T = Matrix::Zero(3, 2);
  T.col(0) = h;
  CHECK_THROWS_AS(lowrank_gluing_cost(Matrix::Identity(3, 3), TransportPlan(T, h)),
                  std::invalid_argument);
}

TEST_CASE("membership optimum lower-bounds interior plans on PSD instances") {
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(900 + static_cast<std::uint64_t>(inst));
    const Matrix C = mds_kernel(DataMatrix(random_matrix(6, 3, rng))).values;
    const Vector h = uniform_h(6);
    const MembershipOptimum best = brute_force_membership_optimum({C, h, 2, LossKind::L2});
    const TransportPlan interior(interior_plan(h, 2, rng), h);
    CHECK(best.cost <= factorized_objective(C, interior) + 1e-10);
  }
}

TEST_CASE("finite differences validate a quadratic gradient exactly") {
  Rng rng(31);
  const Matrix Q = testsup::random_psd(4, rng);
  const Matrix x0 = random_matrix(4, 1, rng);
  auto f = [&](const Matrix& x) { return 0.5 * (x.transpose() * Q * x)(0, 0); };
  const Matrix grad = Q * x0;
  CHECK(finite_difference_check(f, x0, grad) <= 1e-9);
}
