#pragma once

#include "gwdr/types.hpp"

namespace gwdr {

/// Chance-corrected partition agreement in [-1, 1]; 1 for identical
/// partitions up to relabeling.
double adjusted_rand_index(const LabelVector& a, const LabelVector& b);

/// 1 - H(truth | prediction) / H(truth), natural logs; 1 when H(truth) = 0.
double homogeneity(const LabelVector& truth, const LabelVector& prediction);

/// Mean silhouette (b - a) / max(a, b) over samples, Euclidean distance.
/// Samples in singleton clusters and 0/0 cases contribute 0.
/// Throws if fewer than two distinct labels are present.
double silhouette(const Matrix& points, const LabelVector& labels);

/// Plurality true label per prototype, weighted by transported mass
/// (ties: lowest label). Empty prototypes get the sentinel -1.
LabelVector prototype_labels(const TransportPlan& T, const LabelVector& truth);

}  // namespace gwdr
