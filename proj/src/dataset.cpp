#include "ncp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace ncp {

Dataset::Dataset(std::vector<double> features, std::vector<double> targets, int dim)
    : x_(std::move(features)), y_(std::move(targets)), d_(dim) {
  if (d_ < 1) throw std::invalid_argument("dataset needs at least one feature column");
  if (x_.size() != y_.size() * static_cast<std::size_t>(d_)) {
    throw std::invalid_argument("feature/target size mismatch");
  }
  n_ = static_cast<int>(y_.size());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& cell, int line_no, std::size_t col) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": non-numeric value '" + cell +
                             "' in column " + std::to_string(col + 1));
  }
  return value;
}

}  // namespace

Dataset Dataset::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  const std::size_t cols = split_csv_line(line).size();
  if (cols < 2) throw std::runtime_error("dataset needs at least 2 columns (features + target)");

  std::vector<double> x;
  std::vector<double> y;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != cols) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                               " columns, got " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c + 1 < cols; ++c) x.push_back(parse_cell(cells[c], line_no, c));
    y.push_back(parse_cell(cells[cols - 1], line_no, cols - 1));
  }
  if (y.empty()) throw std::runtime_error("dataset has a header but no data rows: " + path);
  return Dataset(std::move(x), std::move(y), static_cast<int>(cols) - 1);
}

Dataset Dataset::subset(std::span<const int> ids) const {
  std::vector<double> x;
  x.reserve(ids.size() * static_cast<std::size_t>(d_));
  std::vector<double> y;
  y.reserve(ids.size());
  for (int id : ids) {
    auto r = row(id);
    x.insert(x.end(), r.begin(), r.end());
    y.push_back(y_[id]);
  }
  return Dataset(std::move(x), std::move(y), d_);
}

double Dataset::response_scale() const {
  if (y_.empty()) return 0.0;
  auto [mn, mx] = std::minmax_element(y_.begin(), y_.end());
  return *mx - *mn;
}

}  // namespace ncp
