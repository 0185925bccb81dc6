#pragma once

#include "gwdr/types.hpp"

#include <string>
#include <vector>

namespace gwdr {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comma-separated numeric matrix, one sample per row. A non-numeric first
/// row is treated as a header and skipped. Parse failures report the line.
Matrix read_csv_matrix(const std::string& path);

/// Single-column integer labels (optional header).
LabelVector read_csv_labels(const std::string& path);

/// Written with 17 significant digits so a write/read round trip is exact.
void write_csv_matrix(const std::string& path, const Matrix& m);
void write_csv_vector(const std::string& path, const Vector& v);
void write_csv_labels(const std::string& path, const LabelVector& labels);

std::string format_double(double v);

}  // namespace gwdr
