// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <vector>

#include "stabilimeter/parallel.hpp"
#include "stabilimeter/random.hpp"

using namespace stabilimeter;

TEST(DeriveSeed, PureFunction) {
  EXPECT_EQ(derive_seed(42, "split", 3), derive_seed(42, "split", 3));
  static_assert(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
}

TEST(DeriveSeed, DistinctContextsGiveDistinctSeeds) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ULL, 1ULL, 0xdeadbeefULL})
    for (const char* purpose : {"split", "train1", "train2", "agreement"})
      for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(master, purpose, i));
  EXPECT_EQ(seen.size(), 3u * 4u * 100u);
}

TEST(SeedSpec, ChildMatchesDerive) {
  SeedSpec s{7};
  EXPECT_EQ(s.child("grid", 2).master_seed, s.derive("grid", 2));
}

TEST(Rng, EngineIsMt19937_64) {
  // The 10000th output of the default-seeded engine is fixed by the standard.
  Rng rng(5489u);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  // Each bucket expects 10000 with sd ~93; 6 sd tolerance.
  for (int h : hits) EXPECT_NEAR(h, 10000, 560);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(2);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.006);
}

TEST(Rng, ShuffleIsPermutationAndDeterministic) {
  std::vector<int> a(50), b(50);
  for (int i = 0; i < 50; ++i) a[i] = b[i] = i;
  Rng r1(9), r2(9);
  r1.shuffle(std::span<int>(a));
  r2.shuffle(std::span<int>(b));
  EXPECT_EQ(a, b);
  std::set<int> values(a.begin(), a.end());
  EXPECT_EQ(values.size(), 50u);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned threads : {1u, 2u, 8u}) {
    std::vector<std::atomic<int>> visits(1000);
    parallel_for(visits.size(), ExecutionPolicy{threads}, [&](std::size_t i) { ++visits[i]; });
    for (auto& v : visits) EXPECT_EQ(v.load(), 1);
  }
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  for (unsigned threads : {1u, 4u}) {
    try {
      parallel_for(100, ExecutionPolicy{threads}, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "17");
    }
  }
}
