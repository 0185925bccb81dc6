#include "gwdr/run.hpp"

#include "gwdr/random.hpp"

#include <cmath>

namespace gwdr {

BlobData make_blobs(const BlobSpec& spec) {
  if (spec.samples < 1 || spec.clusters < 1 || spec.dim < 1)
    throw ConfigError("make_blobs: samples, clusters, dim must be positive");
  Rng rng(spec.seed);

  // axis-aligned centers at separation/sqrt(2) give exact pairwise distance
  // `separation`; extra clusters beyond the dimension fall back to random
  // directions
  Matrix centers = Matrix::Zero(spec.clusters, spec.dim);
  const double a = spec.separation / std::sqrt(2.0);
  for (int j = 0; j < spec.clusters; ++j) {
    if (j < spec.dim) {
      centers(j, j) = a;
    } else {
      Vector dir(spec.dim);
      for (int k = 0; k < spec.dim; ++k) dir(k) = rng.normal();
      centers.row(j) = spec.separation * dir.transpose() / std::max(dir.norm(), 1e-12);
    }
  }

  Matrix X(spec.samples, spec.dim);
  LabelVector labels(static_cast<std::size_t>(spec.samples));
  for (int i = 0; i < spec.samples; ++i) {
    const int c = i % spec.clusters;
    labels[static_cast<std::size_t>(i)] = c;
    for (int k = 0; k < spec.dim; ++k) X(i, k) = centers(c, k) + rng.normal();
  }
  return BlobData{DataMatrix(std::move(X)), std::move(labels)};
}

}  // namespace gwdr
