#include <doctest.h>

#include <vector>

#include "ncp/rng.hpp"
#include "ncp/sweep.hpp"
#include "oracles.hpp"

using namespace ncp;

TEST_CASE("sweep counts overlapping intervals") {
  // alpha = 0.5, n = 3: threshold = 0.5*4 - 1 = 1, so y needs 2 votes
  std::vector<SweepEntry> entries = {
      {Interval(0.0, 1.0), 1.0}, {Interval(0.5, 2.0), 1.0}, {Interval(3.0, 4.0), 1.0}};
  auto set = sweep_union(entries, unweighted_threshold(0.5, 3));
  REQUIRE(set.pieces().size() == 1);
  CHECK(set.pieces()[0] == Interval(0.5, 1.0));
}

TEST_CASE("sweep returns the full line for a negative threshold") {
  std::vector<SweepEntry> entries = {{Interval(0.0, 1.0), 1.0}};
  CHECK(sweep_union(entries, unweighted_threshold(0.1, 3)).is_full_line());  // 0.4 - 1 < 0
  CHECK(sweep_union({}, -0.25).is_full_line());
}

TEST_CASE("single interval at threshold zero") {
  std::vector<SweepEntry> entries = {{Interval(2.0, 3.0), 1.0}};
  auto set = sweep_union(entries, 0.0);
  REQUIRE(set.pieces().size() == 1);
  CHECK(set.pieces()[0] == Interval(2.0, 3.0));
}

TEST_CASE("no entries with nonnegative threshold is empty") {
  CHECK(sweep_union({}, 0.0).is_empty());
  CHECK(sweep_union({}, 2.5).is_empty());
}

TEST_CASE("left endpoints processed before right endpoints at ties") {
  // [0,1] and [1,2] both contain y = 1; with threshold 1.5 only that point
  // has two votes
  std::vector<SweepEntry> entries = {{Interval(0.0, 1.0), 1.0}, {Interval(1.0, 2.0), 1.0}};
  auto set = sweep_union(entries, 1.5);
  REQUIRE(set.pieces().size() == 1);
  CHECK(set.pieces()[0] == Interval(1.0, 1.0));
}

TEST_CASE("sweep handles repeated identical intervals") {
  std::vector<SweepEntry> entries = {
      {Interval(0.0, 2.0), 1.0}, {Interval(0.0, 2.0), 1.0}, {Interval(0.0, 2.0), 1.0}};
  auto set = sweep_union(entries, 2.0);
  REQUIRE(set.pieces().size() == 1);
  CHECK(set.pieces()[0] == Interval(0.0, 2.0));
  CHECK(sweep_union(entries, 3.0).is_empty());
}

TEST_CASE("sweep equals brute force on random unweighted instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(50));
    std::vector<SweepEntry> entries;
    entries.reserve(n);
    for (int i = 0; i < n; ++i) {
      double a = 20.0 * rng.uniform01() - 10.0;
      double b = 20.0 * rng.uniform01() - 10.0;
      if (a > b) std::swap(a, b);
      entries.push_back({Interval(a, b), 1.0});
    }
    const double alpha = 0.05 + 0.45 * rng.uniform01();
    const double threshold = unweighted_threshold(alpha, n);
    CHECK(testing::sweep_matches_bruteforce(entries, threshold, sweep_union(entries, threshold)));
  }
}

TEST_CASE("sweep equals brute force on random weighted instances") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(30));
    std::vector<SweepEntry> entries;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = rng.normal(), b = rng.normal();
      if (a > b) std::swap(a, b);
      double w = 0.05 + rng.uniform01();
      total += w;
      entries.push_back({Interval(a, b), w});
    }
    const double threshold = total * rng.uniform01() * 0.8;
    CHECK(testing::sweep_matches_bruteforce(entries, threshold, sweep_union(entries, threshold)));
  }
}

TEST_CASE("sweep with duplicated endpoints across entries") {
  // shared endpoints force the tie ordering through the merge logic
  std::vector<SweepEntry> entries = {{Interval(0.0, 1.0), 1.0},
                                     {Interval(1.0, 1.0), 1.0},
                                     {Interval(1.0, 3.0), 1.0},
                                     {Interval(3.0, 3.0), 1.0}};
  auto set = sweep_union(entries, 1.0);
  REQUIRE(set.pieces().size() == 2);
  CHECK(set.pieces()[0] == Interval(1.0, 1.0));
  CHECK(set.pieces()[1] == Interval(3.0, 3.0));
}
