#pragma once

// Independent oracles and fixtures shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "treelstm/treelstm.hpp"

namespace treelstm::testing {

/// Scalar-loop LSTM step written without the library's linear algebra.
inline LstmState oracle_cell(const LstmParams& p, const std::vector<Real>& x, const LstmState& s) {
  const std::size_t q = p.hidden_size();
  const std::size_t m = p.input_size();
  auto pre = [&](const Matrix& w, const Matrix& r, std::size_t row) {
    Real acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) acc += w(row, k) * x[k];
    acc += w(row, m);
    Real rec = 0.0;
    for (std::size_t k = 0; k < q; ++k) rec += r(row, k) * s.h[k];
    return acc + rec;
  };
  // Logistic written in the overflow-free two-branch form.
  auto logistic = [](Real v) {
    return v < 0.0 ? std::exp(v) / (1.0 + std::exp(v)) : 1.0 / (1.0 + std::exp(-v));
  };
  LstmState out = LstmState::zeros(q);
  for (std::size_t j = 0; j < q; ++j) {
    const Real z = std::tanh(pre(p.wz, p.rz, j));
    const Real i = logistic(pre(p.wi, p.ri, j));
    const Real f = logistic(pre(p.wf, p.rf, j));
    const Real o = logistic(pre(p.wo, p.ro, j));
    out.c[j] = i * z + f * s.c[j];
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

/// |a − b| / max(|a|, |b|, floor). The floor keeps round-off on near-zero gradients
/// from dominating.
inline Real relative_error(Real a, Real b, Real floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Σ ½(d − d̂)² over defined targets, full sequence.
inline Real tree_total_loss(const TreeLstmModel& model, const MaskedSequence& seq) {
  const TreeRun run = sequence_forward(model, seq);
  Real loss = 0.0;
  for (const StepOutput& s : run.steps) {
    if (const auto d = seq.target(s.slot)) loss += step_loss(*d, s.prediction);
  }
  return loss;
}

/// d̂ − d at defined targets, 0 elsewhere: the per-step gradient of the summed half-squared loss.
inline std::vector<Real> loss_dpred(const MaskedSequence& seq, const TreeRun& run) {
  std::vector<Real> d(run.steps.size(), 0.0);
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    if (const auto t = seq.target(run.steps[k].slot)) d[k] = run.steps[k].prediction - *t;
  }
  return d;
}

/// Worst relative error between analytic gradients and central differences over every
/// trainable scalar. `loss` evaluates a perturbed copy of the model.
template <class Model, class Weights>
Real worst_gradient_error(const Model& model, Weights analytic,
                          const std::function<Real(const Model&)>& loss, Real step = 1e-5) {
  Model probe = model;
  auto tensors = probe.weights().tensors();
  auto grads = analytic.tensors();
  Real worst = 0.0;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    for (std::size_t j = 0; j < tensors[k].size(); ++j) {
      const Real theta = tensors[k][j];
      const Real h = step * std::max<Real>(1.0, std::abs(theta));
      tensors[k][j] = theta + h;
      const Real up = loss(probe);
      tensors[k][j] = theta - h;
      const Real down = loss(probe);
      tensors[k][j] = theta;
      worst = std::max(worst, relative_error(grads[k][j], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

/// Random sequence of width m with next-value-style random targets and exactly
/// round(ratio·n) missing inputs.
inline MaskedSequence random_sequence(std::size_t n, std::size_t m, Real ratio, std::uint64_t seed) {
  Rng rng(seed);
  MaskedSequence seq(m);
  for (std::size_t t = 0; t < n; ++t) {
    Vector x(m);
    for (std::size_t k = 0; k < m; ++k) x[k] = 2.0 * rng.uniform() - 1.0;
    seq.push_back(Slot{std::move(x), 2.0 * rng.uniform() - 1.0});
  }
  return inject_missingness(seq, ratio, seed + 1);
}

/// Fig. 2 layout: 11 grid slots 0..10 with slots 3, 6 and 7 missing.
inline MaskedSequence fig2_sequence() {
  std::vector<std::optional<Real>> v;
  for (int t = 0; t <= 10; ++t) {
    if (t == 3 || t == 6 || t == 7) {
      v.push_back(std::nullopt);
    } else {
      v.push_back(0.1 * t - 0.4);
    }
  }
  return MaskedSequence::from_values(v);
}

}  // namespace treelstm::testing
