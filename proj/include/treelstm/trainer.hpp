#pragma once

// Squared-error loss, constant-rate SGD, epoch reporting and contiguous-fold
// cross-validation, shared by the Tree-LSTM and the imputation baselines.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "treelstm/baselines.hpp"
#include "treelstm/complexity.hpp"
#include "treelstm/sequence.hpp"
#include "treelstm/tree_lstm.hpp"

namespace treelstm {

/// ½(d − d̂)²
inline Real step_loss(Real target, Real prediction) noexcept {
  const Real e = target - prediction;
  return 0.5 * e * e;
}

/// Mean of (d − d̂)² over the steps whose target is defined.
inline Real sequence_mse(std::span<const Real> predictions,
                         std::span<const std::optional<Real>> targets) {
  if (predictions.size() != targets.size()) {
    throw DimensionError("sequence_mse: " + std::to_string(predictions.size()) +
                         " predictions for " + std::to_string(targets.size()) + " targets");
  }
  Real sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!targets[i]) continue;
    const Real e = *targets[i] - predictions[i];
    sum += e * e;
    ++n;
  }
  if (n == 0) throw InvalidArgument("sequence_mse: no defined targets");
  return sum / static_cast<Real>(n);
}

/// When parameters are updated during an epoch.
///   Sequence: once per pass over the training sequence.
///   Chunk: after every bptt_horizon predictions, carrying the recurrent state forward.
enum class UpdateGranularity { Sequence, Chunk };

struct TrainConfig {
  Real learning_rate = 1e-3;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::vector<std::size_t> q_grid;
  std::vector<Real> lr_grid;
  std::size_t folds = 5;
  std::size_t bptt_horizon = 64;
  /// Global-norm gradient clip; 0 disables clipping.
  Real clip_norm = 5.0;
  UpdateGranularity granularity = UpdateGranularity::Sequence;
  /// Grid slots before this index never enter the loss or the MSE.
  std::size_t score_from = 0;
  bool record_wall_time = false;

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgument("TrainConfig: learning rate must be a finite value >= 0");
    }
    if (epochs < 1) throw InvalidArgument("TrainConfig: epochs must be at least 1");
    if (folds < 2) throw InvalidArgument("TrainConfig: folds must be at least 2");
    if (bptt_horizon < 1) throw InvalidArgument("TrainConfig: bptt horizon must be at least 1");
    if (clip_norm < 0.0) throw InvalidArgument("TrainConfig: clip norm must be >= 0");
  }
};

struct EpochReport {
  std::size_t epoch = 0;
  Real train_mse = 0.0;
  std::optional<Real> test_mse;
  std::optional<Real> wall_ms;
  std::uint64_t mult_count = 0;  // cumulative forward multiplications
};

using TrainLogger = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Per-architecture adapters

template <class Model>
struct ModelOps;

template <>
struct ModelOps<TreeLstmModel> {
  using Weights = TreeLstmWeights;
  using Data = const MaskedSequence*;
  using Carry = MainCursor;
  using Pass = TreeRun;

  static Data prepare(const TreeLstmModel&, const MaskedSequence& seq) { return &seq; }
  static std::size_t first_slot(const TreeLstmModel& m) { return m.window(); }
  static std::size_t length(Data d) { return d->size(); }
  static std::optional<Real> target(Data d, std::size_t t) { return d->target(t); }
  static Carry start(const TreeLstmModel& m) { return MainCursor::start(m.hidden()); }

  static Pass forward(const TreeLstmModel& m, Data d, std::size_t begin, std::size_t end,
                      const Carry& carry) {
    return forward_range(m, *d, begin, end, carry, false);
  }
  static Carry carry_out(const Pass& p) { return p.final_cursor; }
  static Real prediction(const Pass& p, std::size_t i) { return p.steps[i].prediction; }
  static std::size_t count(const Pass& p) { return p.steps.size(); }

  static Weights backward(const TreeLstmModel& m, const Pass& p, std::span<const Real> d) {
    return sequence_backward(m, p, d);
  }
  static MultCounter measure(const TreeLstmModel& m, const Pass& p) {
    return treelstm::measure(m, p, BiasConvention::InputWidth);
  }
};

template <>
struct ModelOps<BaselineModel> {
  using Weights = BaselineWeights;
  using Data = DenseSequence;
  using Carry = LstmState;
  using Pass = BaselineRun;

  static Data prepare(const BaselineModel& m, const MaskedSequence& seq) { return m.prepare(seq); }
  static std::size_t first_slot(const BaselineModel&) { return 0; }
  static std::size_t length(const Data& d) { return d.size(); }
  static std::optional<Real> target(const Data& d, std::size_t t) { return d.targets[t]; }
  static Carry start(const BaselineModel& m) { return LstmState::zeros(m.hidden()); }

  static Pass forward(const BaselineModel& m, const Data& d, std::size_t begin, std::size_t end,
                      const Carry& carry) {
    return baseline_forward(m, d, begin, end, carry);
  }
  static Carry carry_out(const Pass& p) { return p.final_state; }
  static Real prediction(const Pass& p, std::size_t i) { return p.predictions[i]; }
  static std::size_t count(const Pass& p) { return p.predictions.size(); }

  static Weights backward(const BaselineModel& m, const Pass& p, std::span<const Real> d) {
    return baseline_backward(m, p, d);
  }
  static MultCounter measure(const BaselineModel& m, const Pass& p) {
    return treelstm::measure(m, p, BiasConvention::InputWidth);
  }
};

/// Predictions for every slot the model emits, paired with their grid slots.
struct Predictions {
  std::vector<std::size_t> slots;
  std::vector<Real> values;
  std::vector<std::optional<Real>> targets;
};

template <class Model>
Predictions predict(const Model& model, const MaskedSequence& seq) {
  using Ops = ModelOps<Model>;
  const auto data = Ops::prepare(model, seq);
  const std::size_t first = Ops::first_slot(model);
  const std::size_t n = Ops::length(data);
  if (n <= first) {
    throw InvalidArgument("predict: sequence of " + std::to_string(n) +
                          " slots yields no predictions");
  }
  const auto pass = Ops::forward(model, data, first, n, Ops::start(model));
  Predictions out;
  for (std::size_t i = 0; i < Ops::count(pass); ++i) {
    out.slots.push_back(first + i);
    out.values.push_back(Ops::prediction(pass, i));
    out.targets.push_back(Ops::target(data, first + i));
  }
  return out;
}

/// MSE over slots in [begin, end) with defined targets.
template <class Model>
Real evaluate_mse(const Model& model, const MaskedSequence& seq, std::size_t begin,
                  std::size_t end) {
  const Predictions p = predict(model, seq);
  std::vector<Real> values;
  std::vector<std::optional<Real>> targets;
  for (std::size_t i = 0; i < p.slots.size(); ++i) {
    if (p.slots[i] < begin || p.slots[i] >= end) continue;
    values.push_back(p.values[i]);
    targets.push_back(p.targets[i]);
  }
  return sequence_mse(values, targets);
}

namespace detail {

template <class Weights>
Real global_norm(Weights& g) {
  Real sum = 0.0;
  for (auto span : g.tensors()) {
    for (const Real v : span) sum += v * v;
  }
  return std::sqrt(sum);
}

template <class Weights>
void sgd_update(Weights& weights, Weights& grads, Real learning_rate, Real scale) {
  auto w = weights.tensors();
  auto g = grads.tensors();
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (std::size_t j = 0; j < w[k].size(); ++j) w[k][j] -= learning_rate * (scale * g[k][j]);
  }
}

}  // namespace detail

/// Outcome of one pass over the training data.
struct EpochStats {
  Real loss_sum = 0.0;  // Σ ½(d − d̂)² over scored steps
  Real squared_error_sum = 0.0;
  std::size_t scored = 0;
  std::size_t updates = 0;
  std::size_t clipped = 0;
  MultCounter mults;

  Real mse() const {
    return scored == 0 ? 0.0 : squared_error_sum / static_cast<Real>(scored);
  }
};

/// Gradient of the summed step loss over one forward pass, without updating.
template <class Model>
struct LossGradient {
  typename ModelOps<Model>::Weights grads;
  typename ModelOps<Model>::Pass pass;
  Real loss_sum = 0.0;
  Real squared_error_sum = 0.0;
  std::size_t scored = 0;
};

template <class Model>
LossGradient<Model> loss_gradient(const Model& model, const typename ModelOps<Model>::Data& data,
                                  std::size_t begin, std::size_t end,
                                  const typename ModelOps<Model>::Carry& carry,
                                  std::size_t score_from) {
  using Ops = ModelOps<Model>;
  LossGradient<Model> out{{}, Ops::forward(model, data, begin, end, carry), 0.0, 0.0, 0};
  std::vector<Real> dpred(Ops::count(out.pass), 0.0);
  for (std::size_t i = 0; i < dpred.size(); ++i) {
    const std::size_t slot = begin + i;
    const auto target = Ops::target(data, slot);
    if (slot < score_from || !target) continue;
    const Real pred = Ops::prediction(out.pass, i);
    const Real err = pred - *target;
    out.loss_sum += step_loss(*target, pred);
    out.squared_error_sum += err * err;
    ++out.scored;
    dpred[i] = err;
  }
  out.grads = Ops::backward(model, out.pass, dpred);
  return out;
}

/// One epoch of constant-rate SGD over `train`.
template <class Model>
EpochStats sgd_epoch(Model& model, const MaskedSequence& train, const TrainConfig& config,
                     const TrainLogger& log = {}) {
  using Ops = ModelOps<Model>;
  config.validate();
  model.set_bptt_horizon(config.bptt_horizon);
  const auto data = Ops::prepare(model, train);
  const std::size_t first = Ops::first_slot(model);
  const std::size_t n = Ops::length(data);
  if (n <= first) {
    throw InvalidArgument("sgd_epoch: training sequence of " + std::to_string(n) +
                          " slots yields no predictions");
  }
  const std::size_t chunk =
      config.granularity == UpdateGranularity::Chunk ? config.bptt_horizon : n - first;

  EpochStats stats;
  auto carry = Ops::start(model);
  for (std::size_t begin = first; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    auto lg = loss_gradient(model, data, begin, end, carry, config.score_from);
    carry = Ops::carry_out(lg.pass);
    stats.mults += Ops::measure(model, lg.pass);
    stats.loss_sum += lg.loss_sum;
    stats.squared_error_sum += lg.squared_error_sum;
    stats.scored += lg.scored;

    const Real norm = detail::global_norm(lg.grads);
    if (!std::isfinite(lg.loss_sum) || !std::isfinite(norm)) {
      throw NumericError("non-finite " + std::string(std::isfinite(lg.loss_sum) ? "gradient" : "loss") +
                         " in training chunk starting at slot " + std::to_string(begin));
    }
    Real scale = 1.0;
    if (config.clip_norm > 0.0 && norm > config.clip_norm) {
      scale = config.clip_norm / norm;
      ++stats.clipped;
      if (log) {
        log("gradient norm " + std::to_string(norm) + " clipped to " +
            std::to_string(config.clip_norm) + " (chunk at slot " + std::to_string(begin) + ")");
      }
    }
    if (lg.scored > 0) {
      detail::sgd_update(model.weights(), lg.grads, config.learning_rate, scale);
      ++stats.updates;
    }
  }
  return stats;
}

/// Trains for config.epochs epochs. After every epoch the model is evaluated on `train`
/// and, when `full` is given, on slots [test_begin, full.size()) of `full`.
template <class Model>
std::vector<EpochReport> train(Model& model, const MaskedSequence& train_seq,
                               const MaskedSequence* full, std::size_t test_begin,
                               const TrainConfig& config, const TrainLogger& log = {},
                               const std::function<void(const EpochReport&)>& on_epoch = {}) {
  config.validate();
  std::vector<EpochReport> reports;
  std::uint64_t mults = 0;
  for (std::size_t e = 1; e <= config.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const EpochStats stats = sgd_epoch(model, train_seq, config, log);
    mults += stats.mults.cell + stats.mults.combination;
    EpochReport r;
    r.epoch = e;
    r.train_mse = evaluate_mse(model, train_seq, config.score_from, train_seq.size());
    if (full) {
      r.test_mse = evaluate_mse(model, *full, std::max(test_begin, config.score_from), full->size());
    }
    if (!std::isfinite(r.train_mse) || (r.test_mse && !std::isfinite(*r.test_mse))) {
      throw NumericError("non-finite MSE after epoch " + std::to_string(e));
    }
    if (config.record_wall_time) {
      r.wall_ms = std::chrono::duration<Real, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    }
    r.mult_count = mults;
    reports.push_back(r);
    if (on_epoch) on_epoch(r);
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CvRow {
  std::size_t q = 0;
  Real learning_rate = 0.0;
  std::vector<Real> fold_mse;
  Real mean_mse = 0.0;
};

struct CvResult {
  std::size_t best_q = 0;
  Real best_learning_rate = 0.0;
  std::vector<CvRow> table;
  bool tie_broken = false;
};

/// Lowest mean MSE wins; equal means (within 1e-12 relative) go to the smaller q,
/// then the larger learning rate.
inline CvResult select_best(std::vector<CvRow> table) {
  if (table.empty()) throw InvalidArgument("cross_validate: empty grid");
  const auto ties = [](Real a, Real b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  std::size_t best = 0;
  bool tie = false;
  for (std::size_t k = 1; k < table.size(); ++k) {
    const CvRow& c = table[k];
    const CvRow& b = table[best];
    if (ties(c.mean_mse, b.mean_mse)) {
      tie = true;
      if (c.q < b.q || (c.q == b.q && c.learning_rate > b.learning_rate)) best = k;
    } else if (c.mean_mse < b.mean_mse) {
      best = k;
      tie = false;
    }
  }
  CvResult out;
  out.best_q = table[best].q;
  out.best_learning_rate = table[best].learning_rate;
  out.tie_broken = tie;
  out.table = std::move(table);
  return out;
}

/// Contiguous fold boundaries over n slots.
inline std::vector<std::pair<std::size_t, std::size_t>> contiguous_folds(std::size_t n,
                                                                         std::size_t folds) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t f = 0; f < folds; ++f) out.emplace_back(f * n / folds, (f + 1) * n / folds);
  return out;
}

/// Grid search over (q, η). For each fold the model trains on the whole training
/// sequence with that fold's targets hidden, then is scored on the fold's slots.
/// `make_model(q, seed)` builds a fresh model; `min_fold` is the shortest allowed fold.
template <class Model>
CvResult cross_validate(const MaskedSequence& train_seq,
                        const std::function<Model(std::size_t, std::uint64_t)>& make_model,
                        const TrainConfig& config, std::size_t min_fold,
                        std::size_t threads = 1) {
  config.validate();
  if (config.q_grid.empty() || config.lr_grid.empty()) {
    throw InvalidArgument("cross_validate: q and learning-rate grids must be non-empty");
  }
  const auto folds = contiguous_folds(train_seq.size(), config.folds);
  for (const auto& [lo, hi] : folds) {
    if (hi - lo < min_fold) {
      throw InvalidArgument("cross_validate: fold of " + std::to_string(hi - lo) +
                            " slots is shorter than the minimum " + std::to_string(min_fold));
    }
  }

  struct Job {
    std::size_t row, fold;
  };
  std::vector<CvRow> table;
  std::vector<Job> jobs;
  for (const std::size_t q : config.q_grid) {
    for (const Real lr : config.lr_grid) {
      table.push_back({q, lr, std::vector<Real>(folds.size()), 0.0});
      for (std::size_t f = 0; f < folds.size(); ++f) jobs.push_back({table.size() - 1, f});
    }
  }

  const auto run_job = [&](const Job& job) {
    const auto [lo, hi] = folds[job.fold];
    MaskedSequence masked = train_seq;
    for (std::size_t t = lo; t < hi; ++t) masked[t].target.reset();
    TrainConfig cfg = config;
    cfg.learning_rate = table[job.row].learning_rate;
    Model model = make_model(table[job.row].q, config.seed);
    train(model, masked, nullptr, 0, cfg);
    return evaluate_mse(model, train_seq, std::max(lo, config.score_from), hi);
  };

  threads = std::max<std::size_t>(1, threads);
  std::vector<Real> results(jobs.size());
  for (std::size_t start = 0; start < jobs.size(); start += threads) {
    std::vector<std::future<Real>> batch;
    const std::size_t stop = std::min(jobs.size(), start + threads);
    for (std::size_t j = start; j < stop; ++j) {
      batch.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async,
                                 run_job, jobs[j]));
    }
    for (std::size_t j = start; j < stop; ++j) results[j] = batch[j - start].get();
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    table[jobs[j].row].fold_mse[jobs[j].fold] = results[j];
  }
  for (CvRow& row : table) {
    Real sum = 0.0;
    for (const Real v : row.fold_mse) sum += v;
    row.mean_mse = sum / static_cast<Real>(row.fold_mse.size());
  }
  return select_best(std::move(table));
}

}  // namespace treelstm
