#pragma once

#include "gwdr/types.hpp"

namespace gwdr {

/// E_ij = squared Euclidean distance between samples i and j.
/// Symmetric, zero diagonal, nonnegative.
Matrix squared_distance_matrix(const DataMatrix& X);

/// Gram matrix X X^T (PSD).
AffinityMatrix gram_kernel(const DataMatrix& X);

/// Double-centered kernel -H E H where E is the squared distance matrix and
/// H = I - (1/N) 1 1^T. PSD with zero row sums.
AffinityMatrix mds_kernel(const DataMatrix& X);

/// Graph Laplacian diag(W 1) - W of a symmetric nonnegative adjacency W.
/// Throws if W is asymmetric or has negative entries.
AffinityMatrix graph_laplacian(const Matrix& W);

/// Binary symmetrized k-nearest-neighbor adjacency (zero diagonal).
Matrix knn_graph(const DataMatrix& X, int k = 10);

/// Row-stochastic Gaussian affinity with per-row bandwidth calibrated so the
/// row entropy H(p) = -sum_j p_j (log p_j - 1) equals log(xi) + 1 within 1e-4.
/// Zero diagonal. Throws if the bandwidth bisection does not converge.
AffinityMatrix sne_affinity(const DataMatrix& X, Perplexity xi);

/// Symmetric affinity with unit row sums and per-row entropy at least
/// log(xi) + 1, obtained by dual ascent on the symmetric entropic transport
/// problem with squared-distance cost. Zero diagonal. Throws on
/// non-convergence.
AffinityMatrix entropic_affinity(const DataMatrix& X, Perplexity xi);

/// Cauchy kernel (1 + ||z_k - z_l||^2)^-1, optionally normalized to a
/// symmetric matrix with unit row sums (symmetric Sinkhorn scaling).
AffinityMatrix student_kernel(const Matrix& Z, StudentNormalize normalize);

/// Entropy with the 0 log 0 = 0 convention: H(p) = -sum_i p_i (log p_i - 1).
double row_entropy(const Vector& p);

}  // namespace gwdr
