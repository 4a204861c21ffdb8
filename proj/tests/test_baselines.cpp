#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace treelstm;
using namespace treelstm::testing;

namespace {

BaselineModel make(BaselineKind kind, std::size_t q, std::size_t m, std::uint64_t seed,
                   Real variance = 0.1, std::size_t horizon = 64) {
  BaselineConfig c;
  c.kind = kind;
  c.hidden = q;
  c.input = m;
  c.seed = seed;
  c.init_variance = variance;
  c.bptt_horizon = horizon;
  return BaselineModel::initialize(c);
}

Real baseline_loss(const BaselineModel& model, const DenseSequence& dense) {
  const BaselineRun run = baseline_forward(model, dense);
  Real loss = 0.0;
  for (std::size_t k = 0; k < run.predictions.size(); ++k) {
    if (dense.targets[k]) loss += step_loss(*dense.targets[k], run.predictions[k]);
  }
  return loss;
}

std::vector<Real> baseline_dpred(const DenseSequence& dense, const BaselineRun& run) {
  std::vector<Real> d(run.predictions.size(), 0.0);
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (dense.targets[k]) d[k] = run.predictions[k] - *dense.targets[k];
  }
  return d;
}

}  // namespace

TEST(Impute, ZeroFillsMissingSlots) {
  const DenseSequence d = impute_zero(MaskedSequence::from_values({3.0, std::nullopt, 5.0}));
  EXPECT_EQ(d.inputs[0], Vector{3.0});
  EXPECT_EQ(d.inputs[1], Vector{0.0});
  EXPECT_EQ(d.inputs[2], Vector{5.0});
}

TEST(Impute, ForwardFillRepeatsLastInputWithIndicator) {
  const DenseSequence d = impute_forward_fill(MaskedSequence::from_values({3.0, std::nullopt, 5.0}));
  EXPECT_EQ(d.inputs[0], (Vector{3.0, 1.0}));
  EXPECT_EQ(d.inputs[1], (Vector{3.0, 0.0}));
  EXPECT_EQ(d.inputs[2], (Vector{5.0, 1.0}));
}

TEST(Impute, ForwardFillLeadingGapIsZero) {
  const DenseSequence d =
      impute_forward_fill(MaskedSequence::from_values({std::nullopt, std::nullopt, 2.0}));
  EXPECT_EQ(d.inputs[0], (Vector{0.0, 0.0}));
  EXPECT_EQ(d.inputs[1], (Vector{0.0, 0.0}));
  EXPECT_EQ(d.inputs[2], (Vector{2.0, 1.0}));
}

TEST(Impute, Fig2ForwardFill) {
  const MaskedSequence seq = fig2_sequence();
  const DenseSequence d = impute_forward_fill(seq);
  EXPECT_EQ(d.inputs[3], (Vector{seq.input(2)[0], 0.0}));
  EXPECT_EQ(d.inputs[6], (Vector{seq.input(5)[0], 0.0}));
  EXPECT_EQ(d.inputs[7], (Vector{seq.input(5)[0], 0.0}));
  EXPECT_EQ(d.inputs[8], (Vector{seq.input(8)[0], 1.0}));
}

TEST(BaselineForward, OneCellCallPerSlot) {
  for (const BaselineKind kind : {BaselineKind::ZeroImpute, BaselineKind::ForwardFill}) {
    const auto model = make(kind, 3, 1, 1);
    const MaskedSequence seq = fig2_sequence();
    const BaselineRun run = baseline_forward(model, model.prepare(seq));
    EXPECT_EQ(run.cell_calls(), seq.size());
    EXPECT_EQ(run.predictions.size(), seq.size());
  }
}

TEST(BaselineForward, ZeroImputeOnCompleteDataIsVanillaLstm) {
  const auto model = make(BaselineKind::ZeroImpute, 4, 1, 2);
  const MaskedSequence seq = synth_sine(40, 0.1, 3);
  const BaselineRun run = baseline_forward(model, model.prepare(seq));
  LstmState s = LstmState::zeros(4);
  const Vector& w = model.weights().w_hat;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    s = oracle_cell(model.weights().params, seq.input(t).values(), s);
    ASSERT_EQ(s, state_of(run.steps[t]));
    ASSERT_EQ(run.predictions[t], dot(w.span().first(4), s.h.span()) + w[4]);
  }
}

TEST(BaselineForward, ForwardFillWithZeroIndicatorColumnMatchesZeroImputeOnCompleteData) {
  const auto zi = make(BaselineKind::ZeroImpute, 3, 2, 5);
  auto fi = make(BaselineKind::ForwardFill, 3, 2, 6);
  // Give FI the ZI weights, with a zero column for the indicator.
  BaselineWeights w = fi.weights();
  const auto& src = zi.weights().params;
  auto dst = w.params.matrices();
  auto from = const_cast<LstmParams&>(src).matrices();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    Matrix& d = *dst[k];
    const Matrix& s = *from[k];
    for (std::size_t r = 0; r < d.rows(); ++r) {
      for (std::size_t c = 0; c < d.cols(); ++c) {
        if (d.cols() == s.cols()) {
          d(r, c) = s(r, c);
        } else if (c < 2) {
          d(r, c) = s(r, c);
        } else if (c == 2) {
          d(r, c) = 0.0;  // indicator
        } else {
          d(r, c) = s(r, c - 1);  // bias
        }
      }
    }
  }
  w.w_hat = zi.weights().w_hat;
  fi = BaselineModel::from_weights(fi.config(), w);
  const MaskedSequence seq = random_sequence(30, 2, 0.0, 9);
  const BaselineRun a = baseline_forward(zi, zi.prepare(seq));
  const BaselineRun b = baseline_forward(fi, fi.prepare(seq));
  for (std::size_t t = 0; t < seq.size(); ++t) EXPECT_NEAR(a.predictions[t], b.predictions[t], 1e-14);
}

TEST(BaselineForward, WidthMismatchThrows) {
  const auto model = make(BaselineKind::ForwardFill, 3, 2, 1);
  EXPECT_THROW(model.prepare(MaskedSequence::from_values({1.0, 2.0})), DimensionError);
  EXPECT_THROW(baseline_forward(model, impute_zero(random_sequence(5, 2, 0.0, 1))), DimensionError);
}

TEST(BaselineBackward, MatchesFiniteDifferences) {
  for (const BaselineKind kind : {BaselineKind::ZeroImpute, BaselineKind::ForwardFill}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto model = make(kind, 3, 2, seed, 0.3, 100);
      const DenseSequence dense = model.prepare(random_sequence(12, 2, 0.3, seed + 10));
      const BaselineRun run = baseline_forward(model, dense);
      const BaselineWeights g = baseline_backward(model, run, baseline_dpred(dense, run));
      const Real err = worst_gradient_error<BaselineModel>(
          model, g, [&](const BaselineModel& m) { return baseline_loss(m, dense); });
      EXPECT_LT(err, 1e-5) << to_string(kind) << " seed " << seed;
    }
  }
}

TEST(BaselineBackward, ZeroLossGradientsGiveZeroGradients) {
  const auto model = make(BaselineKind::ZeroImpute, 3, 1, 1);
  const BaselineRun run = baseline_forward(model, model.prepare(synth_sine(10, 0.0, 0)));
  EXPECT_EQ(baseline_backward(model, run, std::vector<Real>(10, 0.0)), model.weights().zeros_like());
}

TEST(BaselineBackward, TruncationCutsGradientFlow) {
  const auto full = make(BaselineKind::ZeroImpute, 3, 1, 4, 0.3, 1000);
  const auto cut = make(BaselineKind::ZeroImpute, 3, 1, 4, 0.3, 1);
  const DenseSequence dense = full.prepare(random_sequence(20, 1, 0.2, 4));
  const BaselineRun run = baseline_forward(full, dense);
  // Only the last step has a loss gradient; with horizon 1 nothing reaches earlier steps.
  std::vector<Real> d(20, 0.0);
  d.back() = 1.0;
  const BaselineWeights g_cut = baseline_backward(cut, run, d);
  LstmParams one = LstmParams::zeros(3, 1);
  const Vector zero(3);
  Vector dh(3);
  for (std::size_t j = 0; j < 3; ++j) dh[j] = full.weights().w_hat[j];
  cell_backward(full.weights().params, run.steps.back(), dh.span(), zero.span(), one);
  EXPECT_EQ(g_cut.params, one);
  EXPECT_NE(baseline_backward(full, run, d).params, one);
}

TEST(BaselineModel, FromWeightsChecksShapes) {
  const auto model = make(BaselineKind::ForwardFill, 3, 2, 1);
  BaselineConfig zi = model.config();
  zi.kind = BaselineKind::ZeroImpute;
  EXPECT_THROW(BaselineModel::from_weights(zi, model.weights()), DimensionError);
  EXPECT_EQ(BaselineModel::from_weights(model.config(), model.weights()), model);
}
