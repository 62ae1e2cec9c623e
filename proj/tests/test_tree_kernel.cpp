#include <cmath>

#include <gtest/gtest.h>

#include "dtk/tree_kernel.hpp"
#include "support/oracles.hpp"

using namespace dtk;

TEST(TreeKernel, SmallTreeClosedForm) {
  const Tree t = parse_tree("(S (A a) (B b))");
  EXPECT_EQ(tk_exact(t, t, 1.0), 6.0);
  EXPECT_EQ(tk_fast(t, t, 1.0), 6.0);
  for (double l : {0.1, 0.4, 0.75}) EXPECT_NEAR(tk_exact(t, t, l), 2 * l + l * (1 + l) * (1 + l), 1e-15);
}

TEST(TreeKernel, MatchesBruteForceOracle) {
  SplitMix64 rng(1234);
  for (int i = 0; i < 150; ++i) {
    const Tree a = oracle::random_tree(rng, 1 + rng.bounded(12), 3);
    const Tree b = oracle::random_tree(rng, 1 + rng.bounded(12), 3);
    for (double l : {0.3, 1.0}) {
      const double want = oracle::brute_force_tk(a, b, l);
      EXPECT_NEAR(tk_exact(a, b, l), want, 1e-9 * std::max(1.0, want));
    }
  }
}

TEST(TreeKernel, FastEqualsExact) {
  SplitMix64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const Tree a = oracle::random_tree(rng, 1 + rng.bounded(25), 3);
    const Tree b = oracle::random_tree(rng, 1 + rng.bounded(25), 3);
    const double e = tk_exact(a, b, 0.4);
    EXPECT_NEAR(tk_fast(a, b, 0.4), e, 1e-12 * std::max(1.0, e));
  }
}

TEST(TreeKernel, FastEvaluatesOnlyMatchingPairs) {
  const Tree a = parse_tree("(S (NP a) (VP b) (NP a))");
  const Tree b = parse_tree("(S (NP a) (VP c))");
  FastKernelStats stats;
  tk_fast(a, b, 0.5, &stats);
  // NP→a matches twice; S productions and VP productions differ.
  EXPECT_EQ(stats.delta_evaluations, 2u);
}

TEST(TreeKernel, FeatureMapChain) {
  SplitMix64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const Tree a = oracle::random_tree(rng, 1 + rng.bounded(10), 3);
    const Tree b = oracle::random_tree(rng, 1 + rng.bounded(10), 3);
    const double e = tk_exact(a, b, 0.4);
    EXPECT_NEAR(0.4 * tk_by_feature_map(a, b, 0.4), e, 1e-9 * std::max(1.0, e));
  }
}

TEST(TreeKernel, NodeCountFeatureMapDiffersFromRecursion) {
  const Tree t = parse_tree("(S (A a) (B b))");
  const double rec = tk_by_feature_map(t, t, 0.5, WeightConvention::recursion);
  const double nodes = tk_by_feature_map(t, t, 0.5, WeightConvention::node_count);
  // Fragments: A→a, B→b (2 nodes each), S→A B (3), S with one expansion (4) ×2, full (5).
  EXPECT_NEAR(nodes, 2 * 0.5 + 0.25 + 2 * 0.125 + 0.0625, 1e-15);
  EXPECT_NEAR(rec, 2 + 1 + 2 * 0.5 + 0.25, 1e-15);
}

TEST(TreeKernel, SymmetricNonNegativeMonotone) {
  SplitMix64 rng(31);
  for (int i = 0; i < 50; ++i) {
    const Tree a = oracle::random_tree(rng, 2 + rng.bounded(15), 3);
    const Tree b = oracle::random_tree(rng, 2 + rng.bounded(15), 3);
    EXPECT_EQ(tk_exact(a, b, 0.4), tk_exact(b, a, 0.4));
    EXPECT_GE(tk_exact(a, b, 0.4), 0.0);
    EXPECT_LE(tk_exact(a, b, 0.2), tk_exact(a, b, 0.6));
  }
}

TEST(TreeKernel, DisjointAndSingleNodeAreZero) {
  EXPECT_EQ(tk_exact(parse_tree("(A b)"), parse_tree("(C d)"), 0.4), 0.0);
  EXPECT_EQ(tk_exact(parse_tree("w"), parse_tree("w"), 0.4), 0.0);
  EXPECT_EQ(tk_fast(parse_tree("w"), parse_tree("(A w)"), 0.4), 0.0);
}

TEST(TreeKernel, LabelBoundariesAreRespected) {
  // Production ids must not collide when labels concatenate to the same text.
  EXPECT_EQ(tk_exact(parse_tree("(A bc d)"), parse_tree("(A b cd)"), 1.0), 0.0);
  EXPECT_EQ(tk_fast(parse_tree("(A bc d)"), parse_tree("(A b cd)"), 1.0), 0.0);
}

TEST(TreeKernel, Normalized) {
  const Tree a = parse_tree("(S (NP a) (VP b))");
  EXPECT_NEAR(tk_normalized(a, a, 0.4), 1.0, 1e-15);
  EXPECT_THROW(tk_normalized(a, parse_tree("w"), 0.4), std::domain_error);
  EXPECT_THROW(tk_exact(a, a, 0.0), std::invalid_argument);
}
