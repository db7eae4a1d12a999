#pragma once

#include <cstdint>

#include "ncp/dataset.hpp"
#include "ncp/rng.hpp"

namespace ncp {

// Heteroscedastic 1-d benchmark distribution:
//   X ~ Unif[0,1],
//   Y ~ Pois(sin^2(X) + 0.1) + 0.03 X eps1 + 25 1{u < 0.01} eps2,
// with eps1, eps2 ~ N(0,1), u ~ Unif[0,1].
double synthetic_response(double x, Rng& rng);
Dataset synthetic_sample(int n, std::uint64_t seed);

}  // namespace ncp
