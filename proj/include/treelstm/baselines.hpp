#pragma once

// Imputation baselines: a single LSTM fed either zero vectors (ZI) or the last
// received input plus a presence indicator (FI) at missing slots.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treelstm/lstm_cell.hpp"
#include "treelstm/numeric.hpp"
#include "treelstm/sequence.hpp"

namespace treelstm {

enum class BaselineKind { ZeroImpute, ForwardFill };

inline const char* to_string(BaselineKind kind) {
  return kind == BaselineKind::ZeroImpute ? "zi" : "fi";
}

/// Fully populated inputs on the same grid as the source sequence.
struct DenseSequence {
  std::vector<Vector> inputs;
  std::vector<std::optional<Real>> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  std::size_t width() const noexcept { return inputs.empty() ? 0 : inputs.front().size(); }
};

inline DenseSequence impute_zero(const MaskedSequence& seq) {
  DenseSequence out;
  const std::size_t m = seq.width();
  for (const Slot& s : seq.slots()) {
    out.inputs.push_back(s.input ? *s.input : Vector(m));
    out.targets.push_back(s.target);
  }
  return out;
}

/// Missing slots repeat the latest received input with indicator 0; slots before the
/// first received input get the zero vector with indicator 0.
inline DenseSequence impute_forward_fill(const MaskedSequence& seq) {
  DenseSequence out;
  const std::size_t m = seq.width();
  Vector last(m);
  for (const Slot& s : seq.slots()) {
    Vector x(m + 1);
    if (s.input) last = *s.input;
    for (std::size_t k = 0; k < m; ++k) x[k] = last[k];
    x[m] = s.input ? 1.0 : 0.0;
    out.inputs.push_back(std::move(x));
    out.targets.push_back(s.target);
  }
  return out;
}

struct BaselineConfig {
  BaselineKind kind = BaselineKind::ZeroImpute;
  std::size_t hidden = 8;
  std::size_t input = 1;  // raw feature width m
  std::size_t bptt_horizon = 64;
  Real init_variance = 1e-2;
  std::uint64_t seed = 0;

  std::size_t cell_input() const noexcept {
    return kind == BaselineKind::ForwardFill ? input + 1 : input;
  }

  void validate() const {
    if (hidden < 1) throw InvalidArgument("BaselineConfig: hidden size must be at least 1");
    if (input < 1) throw InvalidArgument("BaselineConfig: input size must be at least 1");
    if (bptt_horizon < 1) throw InvalidArgument("BaselineConfig: bptt horizon must be at least 1");
    if (!(init_variance > 0.0)) throw InvalidArgument("BaselineConfig: init variance must be > 0");
  }

  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

struct BaselineWeights {
  LstmParams params;
  Vector w_hat;  // q + 1

  std::vector<std::span<Real>> tensors() {
    std::vector<std::span<Real>> out;
    for (Matrix* m : params.matrices()) out.push_back(m->flat());
    out.push_back(w_hat.span());
    return out;
  }

  BaselineWeights zeros_like() const {
    return {LstmParams::zeros(params.hidden_size(), params.input_size()), Vector(w_hat.size())};
  }

  friend bool operator==(const BaselineWeights&, const BaselineWeights&) = default;
};

class BaselineModel {
 public:
  BaselineModel() = default;

  static BaselineModel initialize(const BaselineConfig& config) {
    config.validate();
    BaselineModel model;
    model.config_ = config;
    Rng rng(config.seed);
    model.weights_.params =
        LstmParams::gaussian(rng, config.hidden, config.cell_input(), config.init_variance);
    model.weights_.w_hat = gaussian_vector(rng, config.hidden + 1, config.init_variance);
    return model;
  }

  static BaselineModel from_weights(const BaselineConfig& config, BaselineWeights weights) {
    config.validate();
    weights.params.validate();
    if (weights.params.hidden_size() != config.hidden ||
        weights.params.input_size() != config.cell_input()) {
      throw DimensionError(std::string("baseline ") + to_string(config.kind) +
                           ": weights have (q=" + std::to_string(weights.params.hidden_size()) +
                           ", width=" + std::to_string(weights.params.input_size()) +
                           ") but config needs (q=" + std::to_string(config.hidden) +
                           ", width=" + std::to_string(config.cell_input()) + ")");
    }
    if (weights.w_hat.size() != config.hidden + 1) {
      throw DimensionError("baseline head weight length " + std::to_string(weights.w_hat.size()) +
                           ", expected " + std::to_string(config.hidden + 1));
    }
    BaselineModel model;
    model.config_ = config;
    model.weights_ = std::move(weights);
    return model;
  }

  const BaselineConfig& config() const noexcept { return config_; }
  BaselineKind kind() const noexcept { return config_.kind; }
  std::size_t hidden() const noexcept { return config_.hidden; }
  const BaselineWeights& weights() const noexcept { return weights_; }
  BaselineWeights& weights() noexcept { return weights_; }

  /// Imputes `seq` the way this baseline expects.
  DenseSequence prepare(const MaskedSequence& seq) const {
    if (seq.width() != 0 && seq.width() != config_.input) {
      throw DimensionError(std::string("baseline ") + to_string(config_.kind) +
                           ": sequence width " + std::to_string(seq.width()) +
                           " but model input size " + std::to_string(config_.input));
    }
    return config_.kind == BaselineKind::ZeroImpute ? impute_zero(seq) : impute_forward_fill(seq);
  }

  void set_bptt_horizon(std::size_t horizon) {
    if (horizon < 1) throw InvalidArgument("bptt horizon must be at least 1");
    config_.bptt_horizon = horizon;
  }

  friend bool operator==(const BaselineModel&, const BaselineModel&) = default;

 private:
  BaselineConfig config_;
  BaselineWeights weights_;
};

struct BaselineRun {
  std::size_t begin = 0;               // grid slot of the first step
  std::vector<StepTrace> steps;        // one per slot
  std::vector<Real> predictions;       // aligned with steps
  LstmState initial;
  LstmState final_state;

  std::size_t cell_calls() const noexcept { return steps.size(); }
};

/// One LSTM step and one prediction d̂ = ŵᵀ[h;1] per slot in [begin, end).
inline BaselineRun baseline_forward(const BaselineModel& model, const DenseSequence& dense,
                                    std::size_t begin, std::size_t end, LstmState start) {
  const std::size_t want = model.config().cell_input();
  if (dense.size() > 0 && dense.width() != want) {
    throw DimensionError(std::string("baseline ") + to_string(model.kind()) + ": input width " +
                         std::to_string(dense.width()) + ", expected " + std::to_string(want));
  }
  if (begin > end || end > dense.size()) {
    throw InvalidArgument("baseline_forward: range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") outside sequence of " +
                          std::to_string(dense.size()));
  }
  const std::size_t q = model.hidden();
  const Vector& w_hat = model.weights().w_hat;
  BaselineRun run;
  run.begin = begin;
  run.initial = start;
  LstmState s = std::move(start);
  run.steps.reserve(end - begin);
  run.predictions.reserve(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    run.steps.push_back(cell_forward(model.weights().params, dense.inputs[t], s));
    s = state_of(run.steps.back());
    run.predictions.push_back(dot(w_hat.span().first(q), s.h.span()) + w_hat[q]);
  }
  run.final_state = std::move(s);
  return run;
}

inline BaselineRun baseline_forward(const BaselineModel& model, const DenseSequence& dense) {
  return baseline_forward(model, dense, 0, dense.size(), LstmState::zeros(model.hidden()));
}

/// Gradients of Σ_s dprediction[s]·d̂_s; recurrence truncated in blocks of bptt_horizon steps.
inline BaselineWeights baseline_backward(const BaselineModel& model, const BaselineRun& run,
                                         std::span<const Real> dprediction) {
  if (dprediction.size() != run.steps.size()) {
    throw InvalidArgument("baseline_backward: " + std::to_string(dprediction.size()) +
                          " loss gradients for " + std::to_string(run.steps.size()) + " steps");
  }
  const std::size_t q = model.hidden();
  const auto& w = model.weights();
  BaselineWeights grads = w.zeros_like();
  const std::size_t horizon = model.config().bptt_horizon;

  Vector dh(q), dc(q);
  for (std::size_t k = run.steps.size(); k-- > 0;) {
    const Real g = dprediction[k];
    const StepTrace& trace = run.steps[k];
    if (g != 0.0) {
      for (std::size_t j = 0; j < q; ++j) {
        grads.w_hat[j] += g * trace.h[j];
        dh[j] += g * w.w_hat[j];
      }
      grads.w_hat[q] += g;
    }
    CellBackward back = cell_backward(w.params, trace, dh.span(), dc.span(), grads.params);
    // Step k (0-based) is the (k+1)-th cell step of the run.
    if (k % horizon != 0) {
      dh = std::move(back.dh_prev);
      dc = std::move(back.dc_prev);
    } else {
      dh.fill(0.0);
      dc.fill(0.0);
    }
  }
  return grads;
}

}  // namespace treelstm
