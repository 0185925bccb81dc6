#include "gwdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace gwdr {

namespace {

// contingency counts keyed by (label_a, label_b)
std::map<std::pair<int, int>, long> contingency(const LabelVector& a, const LabelVector& b) {
  std::map<std::pair<int, int>, long> table;
  for (std::size_t i = 0; i < a.size(); ++i) ++table[{a[i], b[i]}];
  return table;
}

double choose2(double m) { return m * (m - 1.0) / 2.0; }

}  // namespace

double adjusted_rand_index(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
  if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty labels");
  std::map<int, long> row_sums, col_sums;
  double index = 0.0;
  for (const auto& [key, count] : contingency(a, b)) {
    row_sums[key.first] += count;
    col_sums[key.second] += count;
    index += choose2(static_cast<double>(count));
  }
  double sum_a = 0.0, sum_b = 0.0;
  for (const auto& [lab, count] : row_sums) sum_a += choose2(static_cast<double>(count));
  for (const auto& [lab, count] : col_sums) sum_b += choose2(static_cast<double>(count));
  const double total_pairs = choose2(static_cast<double>(a.size()));
  if (total_pairs == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total_pairs;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

double homogeneity(const LabelVector& truth, const LabelVector& prediction) {
  if (truth.size() != prediction.size()) throw std::invalid_argument("homogeneity: length mismatch");
  if (truth.empty()) throw std::invalid_argument("homogeneity: empty labels");
  const double N = static_cast<double>(truth.size());

  std::map<int, long> class_sums, cluster_sums;
  const auto table = contingency(truth, prediction);
  for (const auto& [key, count] : table) {
    class_sums[key.first] += count;
    cluster_sums[key.second] += count;
  }
  double h_class = 0.0;
  for (const auto& [lab, count] : class_sums) {
    const double p = static_cast<double>(count) / N;
    h_class -= p * std::log(p);
  }
  if (h_class == 0.0) return 1.0;
  double h_cond = 0.0;
  for (const auto& [key, count] : table) {
    const double joint = static_cast<double>(count) / N;
    const double cluster = static_cast<double>(cluster_sums[key.second]) / N;
    h_cond -= joint * std::log(joint / cluster);
  }
  return 1.0 - h_cond / h_class;
}

double silhouette(const Matrix& points, const LabelVector& labels) {
  const auto m = static_cast<std::size_t>(points.rows());
  if (labels.size() != m) throw std::invalid_argument("silhouette: length mismatch");
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw std::invalid_argument("silhouette: need at least two clusters");

  std::map<int, long> sizes;
  for (int lab : labels) ++sizes[lab];

  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (sizes[labels[i]] == 1) continue;  // singleton contributes 0
    std::map<int, double> dist_sum;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      dist_sum[labels[j]] +=
          (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j)))
              .norm();
    }
    const double a = dist_sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [lab, s] : dist_sum) {
      if (lab == labels[i]) continue;
      b = std::min(b, s / static_cast<double>(sizes[lab]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;  // 0/0 := 0
  }
  return total / static_cast<double>(m);
}

LabelVector prototype_labels(const TransportPlan& T, const LabelVector& truth) {
  if (truth.size() != static_cast<std::size_t>(T.samples()))
    throw std::invalid_argument("prototype_labels: length mismatch");
  const Vector c = T.col_marginal();
  LabelVector out(static_cast<std::size_t>(T.prototypes()), -1);
  for (Eigen::Index j = 0; j < T.prototypes(); ++j) {
    if (c(j) <= kEmptyColumnMass) continue;
    std::map<int, double> votes;
    for (Eigen::Index i = 0; i < T.samples(); ++i)
      votes[truth[static_cast<std::size_t>(i)]] += T.values(i, j);
    int best_label = -1;
    double best_mass = -1.0;
    for (const auto& [lab, mass] : votes) {
      if (mass > best_mass) {  // map iterates labels in increasing order: ties keep the lowest
        best_mass = mass;
        best_label = lab;
      }
    }
    out[static_cast<std::size_t>(j)] = best_label;
  }
  return out;
}

}  // namespace gwdr
