#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace treelstm;
using namespace treelstm::testing;

TEST(CostModel, ClosedFormExamples) {
  const CostModel cm{100, 0, 10, 1, 3};
  EXPECT_EQ(zi_cost(cm), 47000U);
  EXPECT_EQ(fi_cost(cm), 51000U);
  EXPECT_DOUBLE_EQ(tree_max_cost(cm), 611000.0);
  EXPECT_EQ(zi_cost(CostModel{0, 0, 10, 1, 3}), 0U);
}

TEST(CostModel, AllMissingCostsNothing) {
  const CostModel cm{50, 50, 8, 2, 4};
  EXPECT_EQ(tree_max_cost(cm), 0.0);
  EXPECT_EQ(tree_min_cost(cm), 0.0);
}

TEST(CostModel, MinMatchesDirectEvaluation) {
  for (std::uint64_t missing : {0U, 10U, 37U, 60U, 99U}) {
    const CostModel cm{100, missing, 6, 2, 3};
    const Real r = static_cast<Real>(missing) / 100.0;
    const Real e = 3.0 * (1.0 - r);
    const Real expect = (100.0 - static_cast<Real>(missing)) * (1.0 + std::pow(2.0, e) * e / 2.0) *
                        static_cast<Real>(4 * 36 + 4 * 6 * 2 + 3 * 6);
    EXPECT_NEAR(tree_min_cost(cm), expect, 1e-9 * expect);
    EXPECT_LE(tree_min_cost(cm), tree_max_cost(cm) + 1e-9);
  }
}

TEST(CostModel, RejectsInconsistentInput) {
  EXPECT_THROW(zi_cost(CostModel{5, 6, 1, 1, 1}), InvalidArgument);
  EXPECT_THROW(tree_max_cost(CostModel{5, 1, 1, 1, 0}), InvalidArgument);
}

TEST(Measure, BaselinesMatchClosedForms) {
  for (const BaselineKind kind : {BaselineKind::ZeroImpute, BaselineKind::ForwardFill}) {
    BaselineConfig c;
    c.kind = kind;
    c.hidden = 10;
    c.input = 1;
    const auto model = BaselineModel::initialize(c);
    const MaskedSequence seq = random_sequence(100, 1, 0.3, 2);
    const BaselineRun run = baseline_forward(model, model.prepare(seq));
    const CostModel cm{100, 30, 10, 1, 3};
    const std::uint64_t expect = kind == BaselineKind::ZeroImpute ? zi_cost(cm) : fi_cost(cm);
    // FI's closed form charges the indicator as 4q extra, which is the InputWidth tally at m+1.
    EXPECT_EQ(measure(model, run, BiasConvention::InputWidth).cell, expect);
    const std::uint64_t folded = 100 * cell_multiplications(10, c.cell_input(), BiasConvention::BiasFolded);
    EXPECT_EQ(measure(model, run, BiasConvention::BiasFolded).cell, folded);
    EXPECT_EQ(measure(model, run, BiasConvention::BiasFolded).cell - expect, 100U * 4 * 10);
  }
}

TEST(Measure, TreeLeafCallsPerFullWindow) {
  TreeLstmConfig c;
  c.window = 2;
  c.hidden = 3;
  const auto model = TreeLstmModel::initialize(c);
  const MaskedSequence seq = synth_sine(20, 0.0, 0);
  const TreeRun run = sequence_forward(model, seq);
  const MultCounter counted = measure(model, run, BiasConvention::InputWidth);
  EXPECT_EQ(counted.cell_calls, 20U + 4U * run.steps.size());
}

TEST(Measure, TreeBoundsOnCompleteAndSparseData) {
  TreeLstmConfig c;
  c.window = 3;
  c.hidden = 4;
  const auto model = TreeLstmModel::initialize(c);
  for (const Real r : {0.0, 0.2, 0.5, 0.8}) {
    const MaskedSequence seq = random_sequence(200, 1, r, 11);
    const TreeRun run = sequence_forward(model, seq);
    const CostModel cm{200, seq.missing_count(), 4, 1, 3};
    const Real measured = static_cast<Real>(measure(model, run, BiasConvention::InputWidth).cell);
    EXPECT_LE(measured, tree_max_cost(cm)) << "r=" << r;
    EXPECT_GE(measured, static_cast<Real>(zi_cost(CostModel{200 - seq.missing_count(), 0, 4, 1, 3})));
  }
}

TEST(Measure, CountersMerge) {
  MultCounter a{10, 2, 1};
  const MultCounter b{5, 3, 2};
  a += b;
  EXPECT_EQ(a, (MultCounter{15, 5, 3}));
  a.reset();
  EXPECT_EQ(a, MultCounter{});
}

TEST(Crossover, KnownWindowValues) {
  EXPECT_NEAR(*crossover_scan(8, 1, 2, 1000).crossover, 0.5, 1e-9);
  EXPECT_NEAR(*crossover_scan(8, 1, 3, 1000).crossover, 0.591, 1e-3);
  EXPECT_NEAR(*crossover_scan(8, 1, 4, 1000).crossover, 0.6495, 1e-4);
  EXPECT_NEAR(*crossover_scan(8, 1, 4, 1000).first_grid_crossing, 0.65, 1e-12);
  EXPECT_NEAR(*crossover_scan(8, 1, 3, 1000).first_grid_crossing, 0.6, 1e-12);
}

TEST(Crossover, CrossoverGrowsWithWindow) {
  Real prev = 0.0;
  for (std::size_t L = 1; L <= 8; ++L) {
    const auto scan = crossover_scan(8, 1, L, 1000);
    ASSERT_TRUE(scan.crossover.has_value());
    EXPECT_GE(*scan.crossover, prev);
    prev = *scan.crossover;
  }
}

TEST(Crossover, RatioIsNonincreasingInR) {
  for (std::size_t L = 1; L <= 6; ++L) {
    Real prev = tree_min_to_zi_ratio(0.0, L);
    for (int k = 1; k <= 100; ++k) {
      const Real cur = tree_min_to_zi_ratio(0.01 * k, L);
      EXPECT_LE(cur, prev + 1e-12);
      prev = cur;
    }
  }
}

TEST(Crossover, RejectsBadArguments) {
  EXPECT_THROW(crossover_scan(8, 1, 2, 100, 0.0), InvalidArgument);
  EXPECT_THROW(crossover_scan(8, 1, 0, 100), InvalidArgument);
  EXPECT_THROW(crossover_scan(8, 1, 2, 0), InvalidArgument);
}
