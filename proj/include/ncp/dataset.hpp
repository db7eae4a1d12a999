#pragma once

#include <span>
#include <string>
#include <vector>

namespace ncp {

// Numeric regression sample: row-major feature matrix plus response vector.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> features, std::vector<double> targets, int dim);

  // CSV with a header line, all-numeric body, target in the last column.
  // Rows with non-numeric cells are rejected with their line number.
  static Dataset load_csv(const std::string& path);

  int rows() const { return n_; }
  int dim() const { return d_; }
  std::span<const double> row(int i) const { return {x_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)}; }
  double target(int i) const { return y_[i]; }
  const std::vector<double>& targets() const { return y_; }

  Dataset subset(std::span<const int> ids) const;

  // max(y) - min(y); 0 for constant or empty response.
  double response_scale() const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  int n_ = 0;
  int d_ = 0;
};

}  // namespace ncp
