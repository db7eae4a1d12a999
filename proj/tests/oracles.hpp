#pragma once

// Test-only oracles and instance generators. Everything here evaluates the
// defining conditions directly (grids, counting, enumeration) and stays
// independent of the library's sweep/rank implementations.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ncp/conformal.hpp"
#include "ncp/dataset.hpp"
#include "ncp/interval.hpp"
#include "ncp/rng.hpp"
#include "ncp/sweep.hpp"

namespace ncp::testing {

// Endpoints, midpoints between consecutive distinct endpoints, and flanking
// points outside the covered range. Deciding membership on these points
// determines a union of closed intervals with endpoints drawn from the
// entries.
inline std::vector<double> probe_points(std::span<const SweepEntry> entries) {
  std::vector<double> ends;
  for (const auto& e : entries) {
    ends.push_back(e.interval.lo);
    ends.push_back(e.interval.hi);
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

  std::vector<double> probes;
  if (ends.empty()) {
    probes.push_back(0.0);
    return probes;
  }
  probes.push_back(ends.front() - 1.0);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    probes.push_back(ends[i]);
    if (i + 1 < ends.size()) probes.push_back(0.5 * (ends[i] + ends[i + 1]));
  }
  probes.push_back(ends.back() + 1.0);
  return probes;
}

// Direct evaluation of the weighted stabbing condition at y.
inline bool stabbing_holds(std::span<const SweepEntry> entries, double threshold, double y) {
  double total = 0.0;
  for (const auto& e : entries) {
    if (e.interval.contains(y)) total += e.weight;
  }
  return total > threshold;
}

inline bool sweep_matches_bruteforce(std::span<const SweepEntry> entries, double threshold,
                                     const PredictionSet& result) {
  for (double y : probe_points(entries)) {
    if (result.contains(y) != stabbing_holds(entries, threshold, y)) return false;
  }
  // result endpoints must come from the instance
  for (const auto& piece : result.pieces()) {
    bool lo_known = false, hi_known = false;
    for (const auto& e : entries) {
      lo_known |= piece.lo == e.interval.lo || piece.lo == e.interval.hi;
      hi_known |= piece.hi == e.interval.lo || piece.hi == e.interval.hi;
    }
    if (!lo_known || !hi_known) return false;
  }
  return true;
}

// A subset of B for normalized interval unions.
inline bool subset_of(const PredictionSet& a, const PredictionSet& b) {
  if (a.is_empty() || b.is_full_line()) return true;
  if (a.is_full_line()) return false;
  if (b.is_empty()) return false;
  for (const auto& pa : a.pieces()) {
    bool covered = false;
    for (const auto& pb : b.pieces()) {
      if (pb.lo <= pa.lo && pa.hi <= pb.hi) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// cheap permutation-invariant family builders for refit-style methods

inline double empirical_quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  long k = std::lround(std::ceil(level * static_cast<double>(values.size())));
  k = std::clamp(k, 1L, static_cast<long>(values.size()));
  return values[k - 1];
}

// MeanSymmetric family with mu = subset response mean (constant in x).
// Values are summed in sorted order so the fit is exactly order-invariant.
inline FamilyBuilder subset_mean_builder() {
  return [](const Dataset& train, std::span<const int> subset) {
    std::vector<double> values;
    values.reserve(subset.size());
    for (int id : subset) values.push_back(train.target(id));
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mu = sum / static_cast<double>(subset.size());
    PredictorHandle handle;
    handle.mean = [mu](std::span<const double>) { return mu; };
    handle.provenance = "subset mean";
    return NestedFamily(FamilyKind::MeanSymmetric, std::move(handle));
  };
}

// MeanSymmetric family with mu(x) = response of the nearest subset point in
// the first feature (x-dependent, still order-invariant).
inline FamilyBuilder nearest_neighbor_builder() {
  return [](const Dataset& train, std::span<const int> subset) {
    std::vector<std::pair<double, double>> pts;  // (x0, y), sorted for determinism
    pts.reserve(subset.size());
    for (int id : subset) pts.emplace_back(train.row(id)[0], train.target(id));
    std::sort(pts.begin(), pts.end());
    PredictorHandle handle;
    handle.mean = [pts](std::span<const double> x) {
      double best_d = kInf, best_y = 0.0;
      for (const auto& [px, py] : pts) {
        double d = std::abs(px - x[0]);
        if (d < best_d) {
          best_d = d;
          best_y = py;
        }
      }
      return best_y;
    };
    handle.provenance = "1-nn";
    return NestedFamily(FamilyKind::MeanSymmetric, std::move(handle));
  };
}

// CQR family from subset empirical response quantiles (constant in x).
inline FamilyBuilder subset_quantile_builder(double beta) {
  return [beta](const Dataset& train, std::span<const int> subset) {
    std::vector<double> values;
    values.reserve(subset.size());
    for (int id : subset) values.push_back(train.target(id));
    const double lo = empirical_quantile(values, beta);
    const double hi = empirical_quantile(values, 1.0 - beta);
    PredictorHandle handle;
    handle.quantile = [lo, hi](std::span<const double>, double level) {
      return level <= 0.5 ? lo : hi;
    };
    handle.provenance = "subset quantiles";
    FamilyParams params;
    params.level_lo = beta;
    params.level_hi = 1.0 - beta;
    return NestedFamily(FamilyKind::Cqr, std::move(handle), params);
  };
}

// Small random regression sample with heteroscedastic noise.
inline Dataset random_dataset(int n, int d, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n) * d);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      double v = 4.0 * rng.uniform01() - 2.0;
      x[static_cast<std::size_t>(i) * d + j] = v;
      s += v;
    }
    y[i] = std::sin(s) + 0.3 * s + (0.2 + 0.1 * std::abs(s)) * rng.normal();
  }
  return Dataset(std::move(x), std::move(y), d);
}

}  // namespace ncp::testing
