#include "gwdr/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gwdr {

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string svg_scatter(const Matrix& points, const Vector& weights, const LabelVector& labels) {
  if (points.cols() < 2) throw std::invalid_argument("svg_scatter: need at least 2 coordinates");
  if (points.rows() != weights.size())
    throw std::invalid_argument("svg_scatter: weight length mismatch");

  constexpr double kCanvas = 800.0;
  constexpr double kMargin = 60.0;

  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (weights(i) <= kEmptyColumnMass) continue;
    const double x = points(i, 0), y = points(i, 1);
    if (!any) {
      xmin = xmax = x;
      ymin = ymax = y;
      any = true;
    }
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double scale = (kCanvas - 2.0 * kMargin) / span;
  const double cx = 0.5 * (xmin + xmax);
  const double cy = 0.5 * (ymin + ymax);

  const double wmax = weights.size() > 0 ? weights.maxCoeff() : 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">\n";
  out << "<rect width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (weights(i) <= kEmptyColumnMass) continue;
    const double px = kCanvas / 2.0 + (points(i, 0) - cx) * scale;
    const double py = kCanvas / 2.0 - (points(i, 1) - cy) * scale;
    // radius ~ sqrt(weight) so the marker area tracks the prototype mass
    const double r = 30.0 * std::sqrt(weights(i) / wmax);
    const int lab = i < static_cast<Eigen::Index>(labels.size())
                        ? labels[static_cast<std::size_t>(i)]
                        : -1;
    const char* color = lab >= 0 ? kPalette[static_cast<std::size_t>(lab) % 10] : "#888888";
    out << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"" << fmt(r)
        << "\" fill=\"" << color << "\" fill-opacity=\"0.85\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gwdr
