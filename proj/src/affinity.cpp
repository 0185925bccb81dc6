#include "gwdr/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace gwdr {

namespace {

void mirror_upper(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

AffinityMatrix make_affinity(Matrix values, AffinityKind kind, bool symmetric, bool nonnegative) {
  if (values.rows() != values.cols()) throw std::invalid_argument("AffinityMatrix: not square");
  if (!values.allFinite()) throw std::invalid_argument("AffinityMatrix: non-finite entry");
  if (symmetric) {
    const double scale = max_abs(values);
    const double asym = max_abs(values - values.transpose());
    if (asym > 1e-12 * std::max(scale, 1e-300))
      throw std::invalid_argument("AffinityMatrix: symmetric flag violated");
  }
  if (nonnegative && (values.array() < 0.0).any())
    throw std::invalid_argument("AffinityMatrix: nonnegative flag violated");
  if (kind == AffinityKind::sne_row_stochastic ||
      kind == AffinityKind::entropic_doubly_stochastic) {
    const double err = (values.rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (err > 1e-6) throw std::invalid_argument("AffinityMatrix: rows must sum to 1");
  }
  return AffinityMatrix{std::move(values), kind, symmetric, nonnegative};
}

Matrix squared_distance_matrix(const DataMatrix& X) {
  const Matrix& V = X.values;
  const Matrix G = V * V.transpose();
  const Eigen::Index N = V.rows();
  Matrix E(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    E(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < N; ++j)
      E(i, j) = std::max(0.0, G(i, i) + G(j, j) - 2.0 * G(i, j));
  }
  mirror_upper(E);
  return E;
}

AffinityMatrix gram_kernel(const DataMatrix& X) {
  Matrix K = X.values * X.values.transpose();
  mirror_upper(K);
  return make_affinity(std::move(K), AffinityKind::gram, true, false);
}

AffinityMatrix mds_kernel(const DataMatrix& X) {
  const Matrix E = squared_distance_matrix(X);
  const Eigen::Index N = E.rows();
  const Vector row_mean = E.rowwise().mean();
  const double grand_mean = E.mean();
  Matrix D(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = i; j < N; ++j)
      D(i, j) = -(E(i, j) - row_mean(i) - row_mean(j) + grand_mean);
  mirror_upper(D);
  return make_affinity(std::move(D), AffinityKind::mds, true, false);
}

AffinityMatrix graph_laplacian(const Matrix& W) {
  if (W.rows() != W.cols()) throw std::invalid_argument("graph_laplacian: W not square");
  const double scale = std::max(max_abs(W), 1e-300);
  if (max_abs(W - W.transpose()) > 1e-12 * scale)
    throw std::invalid_argument("graph_laplacian: W must be symmetric");
  if ((W.array() < 0.0).any())
    throw std::invalid_argument("graph_laplacian: W must be nonnegative");
  Matrix L = -W;
  L.diagonal() += W.rowwise().sum();
  return make_affinity(std::move(L), AffinityKind::laplacian, true, false);
}

Matrix knn_graph(const DataMatrix& X, int k) {
  const Eigen::Index N = X.samples();
  if (k < 1 || k >= N) throw std::invalid_argument("knn_graph: need 1 <= k < N");
  const Matrix E = squared_distance_matrix(X);
  Matrix W = Matrix::Zero(N, N);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return E(i, a) < E(i, b);
    });
    int taken = 0;
    for (Eigen::Index j : order) {
      if (j == i) continue;
      W(i, j) = 1.0;
      if (++taken == k) break;
    }
  }
  // symmetrize: an edge in either direction counts
  W = W.cwiseMax(Matrix(W.transpose()));
  return W;
}

double row_entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * (std::log(p(i)) - 1.0);
  return h;
}

namespace {

// Shannon entropy (nats) of the normalized Gaussian row at log-precision lb.
// Returns the normalized row through `out`.
double gaussian_row_entropy(const Vector& d, double lb, Vector& out) {
  const double beta = std::exp(lb);
  const double dmin = d.minCoeff();
  out = (-(beta * (d.array() - dmin))).exp();
  const double s = out.sum();
  out /= s;
  double h = 0.0;
  for (Eigen::Index j = 0; j < out.size(); ++j)
    if (out(j) > 0.0) h -= out(j) * std::log(out(j));
  return h;
}

// Calibrates one row so its Shannon entropy equals log(xi); returns the
// normalized row. Bisection on the log precision.
Vector calibrate_row(const Vector& d, double target, int max_iters, double tol) {
  Vector p;
  double lo = 0.0, hi = 0.0;
  double h0 = gaussian_row_entropy(d, 0.0, p);
  if (h0 > target) {
    // need more precision (lower entropy): grow upward
    lo = 0.0;
    hi = 1.0;
    while (gaussian_row_entropy(d, hi, p) > target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e6) throw SolverError("sne_affinity: bandwidth bracket expansion failed");
    }
  } else {
    hi = 0.0;
    lo = -1.0;
    while (gaussian_row_entropy(d, lo, p) < target) {
      hi = lo;
      lo *= 2.0;
      if (lo < -1e6) throw SolverError("sne_affinity: bandwidth bracket expansion failed");
    }
  }
  for (int it = 0; it < max_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h = gaussian_row_entropy(d, mid, p);
    if (std::abs(h - target) <= tol) return p;
    if (h > target)
      lo = mid;  // entropy too high -> raise precision
    else
      hi = mid;
  }
  throw SolverError("sne_affinity: entropy calibration did not converge");
}

void check_perplexity_bounds(const DataMatrix& X, const Perplexity& xi, const char* who) {
  const auto N = X.samples();
  if (N < 3) throw std::invalid_argument(std::string(who) + ": need at least 3 samples");
  if (!(xi.xi < static_cast<double>(N)))
    throw std::invalid_argument(std::string(who) + ": perplexity must be below the sample count");
}

}  // namespace

AffinityMatrix sne_affinity(const DataMatrix& X, Perplexity xi) {
  check_perplexity_bounds(X, xi, "sne_affinity");
  const Eigen::Index N = X.samples();
  const Matrix E = squared_distance_matrix(X);
  const double target = std::log(xi.xi);
  Matrix P = Matrix::Zero(N, N);
  Vector d(N - 1);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < N; ++j)
      if (j != i) d(c++) = E(i, j);
    const Vector p = calibrate_row(d, target, 200, 1e-4);
    c = 0;
    for (Eigen::Index j = 0; j < N; ++j)
      if (j != i) P(i, j) = p(c++);
  }
  return make_affinity(std::move(P), AffinityKind::sne_row_stochastic, false, true);
}

namespace {

// Symmetric-dual entropic affinity.  P_ij = exp((l_i + l_j - 2 C_ij) /
// (g_i + g_j)) off the diagonal; row i's pair (g_i, l_i) is solved so the row
// sums to one with entropy log(xi)+1, and rows are swept until the joint
// constraints hold.
struct EntropicDualSolver {
  const Matrix& C;
  Vector g, l;
  Eigen::Index N;
  double target;  // entropy target, log(xi) + 1

  double entry(Eigen::Index i, Eigen::Index j) const {
    return std::exp((l(i) + l(j) - 2.0 * C(i, j)) / (g(i) + g(j)));
  }

  double row_sum(Eigen::Index i, double gi, double li) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (j == i) continue;
      s += std::exp((li + l(j) - 2.0 * C(i, j)) / (gi + g(j)));
    }
    return s;
  }

  // lambda_i making row i sum to one at precision gi (monotone in li).
  double solve_lambda(Eigen::Index i, double gi) const {
    double lo = 0.0, hi = 0.0;
    double s = row_sum(i, gi, 0.0);
    double width = std::max(1.0, gi);
    if (s < 1.0) {
      while (row_sum(i, gi, hi += width) < 1.0) width *= 2.0;
      lo = hi - width;
    } else {
      while (row_sum(i, gi, lo -= width) > 1.0) width *= 2.0;
      hi = lo + width;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      s = row_sum(i, gi, mid);
      if (std::abs(s - 1.0) <= 1e-12) return mid;
      (s < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  double row_entropy_at(Eigen::Index i, double gi, double li) const {
    double h = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (j == i) continue;
      const double p = std::exp((li + l(j) - 2.0 * C(i, j)) / (gi + g(j)));
      if (p > 0.0) h -= p * (std::log(p) - 1.0);
    }
    return h;
  }

  // One Gauss-Seidel update of row i: bisection on log g_i with the marginal
  // constraint solved exactly inside.
  void update_row(Eigen::Index i) {
    auto entropy_of = [&](double gi) { return row_entropy_at(i, gi, solve_lambda(i, gi)); };
    double glo = g(i), ghi = g(i);
    double h = entropy_of(g(i));
    if (std::abs(h - target) <= 1e-6) {
      l(i) = solve_lambda(i, g(i));
      return;
    }
    if (h < target) {
      // raise the temperature until the entropy brackets the target
      for (int k = 0; k < 200 && entropy_of(ghi *= 2.0) < target; ++k) glo = ghi;
      if (entropy_of(ghi) < target)
        throw SolverError("entropic_affinity: entropy bracket expansion failed");
    } else {
      for (int k = 0; k < 200 && entropy_of(glo /= 2.0) > target; ++k) ghi = glo;
      if (entropy_of(glo) > target)
        throw SolverError("entropic_affinity: entropy bracket expansion failed");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(glo * ghi);
      h = entropy_of(mid);
      if (std::abs(h - target) <= 1e-6) {
        glo = ghi = mid;
        break;
      }
      (h < target ? glo : ghi) = mid;
    }
    g(i) = std::sqrt(glo * ghi);
    l(i) = solve_lambda(i, g(i));
  }
};

}  // namespace

AffinityMatrix entropic_affinity(const DataMatrix& X, Perplexity xi) {
  check_perplexity_bounds(X, xi, "entropic_affinity");
  const Eigen::Index N = X.samples();
  const Matrix C = squared_distance_matrix(X);
  EntropicDualSolver solver{C, Vector(N), Vector::Zero(N), N, std::log(xi.xi) + 1.0};

  // temperature warm start: mean off-diagonal squared distance per row
  for (Eigen::Index i = 0; i < N; ++i) {
    const double m = (C.row(i).sum()) / static_cast<double>(N - 1);
    solver.g(i) = std::max(m, 1e-8);
  }

  constexpr int kMaxSweeps = 1000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (Eigen::Index i = 0; i < N; ++i) solver.update_row(i);

    double marg_err = 0.0, ent_err = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      marg_err = std::max(marg_err, std::abs(solver.row_sum(i, solver.g(i), solver.l(i)) - 1.0));
      ent_err = std::max(
          ent_err, std::abs(solver.row_entropy_at(i, solver.g(i), solver.l(i)) - solver.target));
    }
    if (marg_err <= 1e-7 && ent_err <= 1e-4) {
      Matrix P = Matrix::Zero(N, N);
      for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = i + 1; j < N; ++j) P(i, j) = P(j, i) = solver.entry(i, j);
      return make_affinity(std::move(P), AffinityKind::entropic_doubly_stochastic, true, true);
    }
  }
  throw SolverError("entropic_affinity: dual ascent did not converge");
}

AffinityMatrix student_kernel(const Matrix& Z, StudentNormalize normalize) {
  if (!Z.allFinite()) throw std::invalid_argument("student_kernel: non-finite entry");
  const Eigen::Index n = Z.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j)
      K(i, j) = 1.0 / (1.0 + (Z.row(i) - Z.row(j)).squaredNorm());
  }
  mirror_upper(K);
  if (normalize == StudentNormalize::none)
    return make_affinity(std::move(K), AffinityKind::student, true, true);

  // symmetric Sinkhorn scaling: P = diag(u) K diag(u) with unit row sums
  Vector u = Vector::Ones(n);
  for (int it = 0; it < 10000; ++it) {
    const Vector Ku = K * u;
    const double err = (u.array() * Ku.array() - 1.0).abs().maxCoeff();
    if (err <= 1e-10) break;
    u = (u.array() / Ku.array()).sqrt().matrix();
  }
  Matrix P(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) P(i, j) = u(i) * u(j) * K(i, j);
  mirror_upper(P);
  return make_affinity(std::move(P), AffinityKind::student_doubly_stochastic, true, true);
}

}  // namespace gwdr
