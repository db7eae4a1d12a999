#include "ncp/synthetic.hpp"

#include <cmath>
#include <stdexcept>

namespace ncp {

double synthetic_response(double x, Rng& rng) {
  const double rate = std::sin(x) * std::sin(x) + 0.1;
  const double pois = static_cast<double>(rng.poisson(rate));
  const double eps1 = rng.normal();
  const double eps2 = rng.normal();
  const double u = rng.uniform01();
  return pois + 0.03 * x * eps1 + (u < 0.01 ? 25.0 * eps2 : 0.0);
}

Dataset synthetic_sample(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synthetic sample size must be >= 1");
  Rng rng(seed);
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.uniform01();
    y[i] = synthetic_response(x[i], rng);
  }
  return Dataset(std::move(x), std::move(y), 1);
}

}  // namespace ncp
