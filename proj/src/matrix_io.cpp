#include "gwdr/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace gwdr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path + ": cannot open");
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool ok = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first_content_line) {  // header row
        first_content_line = false;
        continue;
      }
      throw CsvError(path + ":" + std::to_string(line_no) + ": cannot parse numeric field");
    }
    first_content_line = false;
    if (!rows.empty() && rows.front().size() != row.size())
      throw CsvError(path + ":" + std::to_string(line_no) + ": inconsistent field count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(path + ": no numeric rows");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix read_csv_matrix(const std::string& path) {
  const auto rows = read_rows(path);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

LabelVector read_csv_labels(const std::string& path) {
  const auto rows = read_rows(path);
  LabelVector labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) throw CsvError(path + ": labels need exactly one column");
    labels.push_back(static_cast<int>(rows[i][0]));
  }
  return labels;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_csv_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open for writing");
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

void write_csv_labels(const std::string& path, const LabelVector& labels) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open for writing");
  for (int lab : labels) out << lab << '\n';
}

}  // namespace gwdr
