#pragma once

// Tree-LSTM regressor: a main LSTM over everything before a sliding window,
// one leaf LSTM per non-zero presence pattern of the window, a masked softmax
// that mixes the active networks, and a linear head.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treelstm/lstm_cell.hpp"
#include "treelstm/numeric.hpp"
#include "treelstm/presence.hpp"
#include "treelstm/sequence.hpp"

namespace treelstm {

/// Which main state the leaves start from.
///   AfterWindowStart: the main state once slot t−L is consumed (everything before the window).
///   BeforeWindowStart: the main state before slot t−L is consumed.
enum class LeafInit { AfterWindowStart, BeforeWindowStart };

enum class CombinationWeights { PerNetwork, Shared };

struct TreeLstmConfig {
  std::size_t window = 2;  // L
  std::size_t hidden = 8;  // q
  std::size_t input = 1;   // m
  /// Leaf pattern indices in [1, 2^L); nullopt means all of them.
  std::optional<std::vector<std::size_t>> leaf_indices;
  CombinationWeights combination = CombinationWeights::PerNetwork;
  std::size_t bptt_horizon = 64;
  LeafInit leaf_init = LeafInit::AfterWindowStart;
  Real init_variance = 1e-2;
  std::uint64_t seed = 0;

  std::size_t pattern_count() const noexcept { return std::size_t{1} << window; }

  /// Length of a combination weight vector: both patterns plus the network output.
  std::size_t combination_width() const noexcept { return hidden + 2 * window; }

  void validate() const {
    if (window < 1 || window > kMaxWindow) {
      throw InvalidArgument("TreeLstmConfig: window length " + std::to_string(window) +
                            " outside [1, " + std::to_string(kMaxWindow) + "]");
    }
    if (hidden < 1) throw InvalidArgument("TreeLstmConfig: hidden size must be at least 1");
    if (input < 1) throw InvalidArgument("TreeLstmConfig: input size must be at least 1");
    if (bptt_horizon < 1) throw InvalidArgument("TreeLstmConfig: bptt horizon must be at least 1");
    if (!(init_variance > 0.0)) throw InvalidArgument("TreeLstmConfig: init variance must be > 0");
    if (leaf_indices) {
      for (const std::size_t i : *leaf_indices) {
        if (i < 1 || i >= pattern_count()) {
          throw InvalidArgument("TreeLstmConfig: leaf index " + std::to_string(i) +
                                " outside [1, " + std::to_string(pattern_count()) + ")");
        }
      }
    }
  }

  /// Sorted, de-duplicated leaf indices this configuration instantiates.
  std::vector<std::size_t> configured_leaves() const {
    std::vector<std::size_t> out;
    if (!leaf_indices) {
      for (std::size_t i = 1; i < pattern_count(); ++i) out.push_back(i);
      return out;
    }
    out = *leaf_indices;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const TreeLstmConfig&, const TreeLstmConfig&) = default;
};

/// Trainable tensors. Doubles as the gradient container.
struct TreeLstmWeights {
  LstmParams main;
  std::vector<LstmParams> leaves;  // aligned with TreeLstmModel::leaf_index
  std::vector<Vector> w_tilde;     // [main, leaves...] or a single shared vector
  Vector w_hat;                    // q + 1, last entry is the bias

  /// Every tensor as a flat span, in a fixed order.
  std::vector<std::span<Real>> tensors() {
    std::vector<std::span<Real>> out;
    for (Matrix* m : main.matrices()) out.push_back(m->flat());
    for (auto& leaf : leaves) {
      for (Matrix* m : leaf.matrices()) out.push_back(m->flat());
    }
    for (auto& w : w_tilde) out.push_back(w.span());
    out.push_back(w_hat.span());
    return out;
  }

  std::vector<std::span<const Real>> tensors() const {
    std::vector<std::span<const Real>> out;
    for (auto span : const_cast<TreeLstmWeights*>(this)->tensors()) out.emplace_back(span);
    return out;
  }

  TreeLstmWeights zeros_like() const {
    TreeLstmWeights z;
    z.main = LstmParams::zeros(main.hidden_size(), main.input_size());
    for (const auto& leaf : leaves) {
      z.leaves.push_back(LstmParams::zeros(leaf.hidden_size(), leaf.input_size()));
    }
    for (const auto& w : w_tilde) z.w_tilde.emplace_back(w.size());
    z.w_hat = Vector(w_hat.size());
    return z;
  }

  friend bool operator==(const TreeLstmWeights&, const TreeLstmWeights&) = default;
};

class TreeLstmModel {
 public:
  TreeLstmModel() = default;

  /// Gaussian initialization of every tensor, seeded by config.seed.
  static TreeLstmModel initialize(const TreeLstmConfig& config) {
    config.validate();
    TreeLstmModel model;
    model.config_ = config;
    model.leaf_index_ = config.configured_leaves();
    Rng rng(config.seed);
    const std::size_t q = config.hidden;
    const std::size_t m = config.input;
    const Real var = config.init_variance;
    model.weights_.main = LstmParams::gaussian(rng, q, m, var);
    for (std::size_t k = 0; k < model.leaf_index_.size(); ++k) {
      model.weights_.leaves.push_back(LstmParams::gaussian(rng, q, m, var));
    }
    const std::size_t combos =
        config.combination == CombinationWeights::Shared ? 1 : model.leaf_index_.size() + 1;
    for (std::size_t k = 0; k < combos; ++k) {
      model.weights_.w_tilde.push_back(gaussian_vector(rng, config.combination_width(), var));
    }
    model.weights_.w_hat = gaussian_vector(rng, q + 1, var);
    model.rebuild_lookup();
    return model;
  }

  /// Assembles a model from explicit weights; shapes are checked against the config.
  static TreeLstmModel from_weights(const TreeLstmConfig& config, TreeLstmWeights weights) {
    config.validate();
    TreeLstmModel model;
    model.config_ = config;
    model.leaf_index_ = config.configured_leaves();
    model.weights_ = std::move(weights);
    model.check_shapes();
    model.rebuild_lookup();
    return model;
  }

  const TreeLstmConfig& config() const noexcept { return config_; }
  std::size_t window() const noexcept { return config_.window; }
  std::size_t hidden() const noexcept { return config_.hidden; }
  std::size_t input() const noexcept { return config_.input; }

  const std::vector<std::size_t>& leaf_index() const noexcept { return leaf_index_; }
  const TreeLstmWeights& weights() const noexcept { return weights_; }
  TreeLstmWeights& weights() noexcept { return weights_; }

  /// Network slot of pattern index i: 0 for the main network, 1 + position for a
  /// configured leaf, nullopt when the leaf is not instantiated.
  std::optional<std::size_t> network_slot(std::size_t pattern_index) const {
    const int s = slot_of_index_.at(pattern_index);
    if (s < 0) return std::nullopt;
    return static_cast<std::size_t>(s);
  }

  const LstmParams& network(std::size_t slot) const {
    return slot == 0 ? weights_.main : weights_.leaves.at(slot - 1);
  }

  std::size_t w_tilde_slot(std::size_t network_slot) const noexcept {
    return config_.combination == CombinationWeights::Shared ? 0 : network_slot;
  }

  void set_bptt_horizon(std::size_t horizon) {
    if (horizon < 1) throw InvalidArgument("bptt horizon must be at least 1");
    config_.bptt_horizon = horizon;
  }

  friend bool operator==(const TreeLstmModel& a, const TreeLstmModel& b) {
    return a.config_ == b.config_ && a.leaf_index_ == b.leaf_index_ && a.weights_ == b.weights_;
  }

 private:
  void check_shapes() const {
    const std::size_t q = config_.hidden;
    const std::size_t m = config_.input;
    auto check_params = [&](const LstmParams& p, const std::string& name) {
      p.validate();
      if (p.hidden_size() != q || p.input_size() != m) {
        throw DimensionError(name + ": shape (q=" + std::to_string(p.hidden_size()) +
                             ", m=" + std::to_string(p.input_size()) + ") but config has (q=" +
                             std::to_string(q) + ", m=" + std::to_string(m) + ")");
      }
    };
    check_params(weights_.main, "main network");
    if (weights_.leaves.size() != leaf_index_.size()) {
      throw DimensionError("leaf count " + std::to_string(weights_.leaves.size()) +
                           " but config lists " + std::to_string(leaf_index_.size()));
    }
    for (std::size_t k = 0; k < leaf_index_.size(); ++k) {
      check_params(weights_.leaves[k], "leaf " + std::to_string(leaf_index_[k]));
    }
    const std::size_t combos =
        config_.combination == CombinationWeights::Shared ? 1 : leaf_index_.size() + 1;
    if (weights_.w_tilde.size() != combos) {
      throw DimensionError("expected " + std::to_string(combos) +
                           " combination weight vectors, got " +
                           std::to_string(weights_.w_tilde.size()));
    }
    for (const auto& w : weights_.w_tilde) {
      if (w.size() != config_.combination_width()) {
        throw DimensionError("combination weight length " + std::to_string(w.size()) +
                             ", expected " + std::to_string(config_.combination_width()));
      }
    }
    if (weights_.w_hat.size() != q + 1) {
      throw DimensionError("head weight length " + std::to_string(weights_.w_hat.size()) +
                           ", expected " + std::to_string(q + 1));
    }
  }

  void rebuild_lookup() {
    slot_of_index_.assign(config_.pattern_count(), -1);
    slot_of_index_[0] = 0;
    for (std::size_t k = 0; k < leaf_index_.size(); ++k) {
      slot_of_index_[leaf_index_[k]] = static_cast<int>(k + 1);
    }
  }

  TreeLstmConfig config_;
  std::vector<std::size_t> leaf_index_;
  TreeLstmWeights weights_;
  std::vector<int> slot_of_index_;
};

// ---------------------------------------------------------------------------
// Forward pass

/// Bit j (window offset, 0 = oldest) is set iff slot t−L+1+j holds an input.
/// Requires t + 1 ≥ L, i.e. the window lies inside the grid.
inline PresencePattern window_pattern(const MaskedSequence& seq, std::size_t t,
                                      std::size_t window) {
  if (t >= seq.size() || t + 1 < window) {
    throw InvalidArgument("window_pattern: grid slot " + std::to_string(t) +
                          " has no full length-" + std::to_string(window) +
                          " window in a sequence of " + std::to_string(seq.size()));
  }
  std::uint32_t mask = 0;
  for (std::size_t j = 0; j < window; ++j) {
    mask = (mask << 1) | static_cast<std::uint32_t>(seq.has_input(t + 1 + j - window));
  }
  return PresencePattern::from_index(mask, window);
}

/// Main network state together with how many grid slots it has consumed.
struct MainCursor {
  LstmState state;     // after consuming slots [0, next_slot)
  LstmState previous;  // before consuming slot next_slot − 1
  std::size_t next_slot = 0;

  static MainCursor start(std::size_t hidden) {
    return {LstmState::zeros(hidden), LstmState::zeros(hidden), 0};
  }
};

struct LeafTrace {
  std::size_t pattern_index = 0;
  std::vector<StepTrace> steps;
};

struct StepOutput {
  std::size_t slot = 0;  // grid index t of the prediction
  PresencePattern pattern;
  std::vector<std::size_t> active;  // pattern indices of participating networks, ascending
  std::vector<Real> logits;         // aligned with `active`
  Vector alpha;                     // over all 2^L pattern slots
  std::vector<Vector> h_bar;        // aligned with `active`
  Vector h_hat;
  Real prediction = 0.0;
  std::vector<LeafTrace> leaves;  // aligned with active[1..]
  // Indices into TreeRun::main_states; meaningful only inside a TreeRun.
  std::size_t main_state = 0;
  std::size_t leaf_start_state = 0;
};

namespace detail {

/// Combined-feature vector [p_t; p_i; h̄_i].
inline Vector combination_input(const PresencePattern& current, const PresencePattern& own,
                                const Vector& h_bar) {
  const std::size_t L = current.length();
  Vector v(2 * L + h_bar.size());
  for (std::size_t j = 0; j < L; ++j) {
    v[j] = current.present(j) ? 1.0 : 0.0;
    v[L + j] = own.present(j) ? 1.0 : 0.0;
  }
  std::copy(h_bar.begin(), h_bar.end(), v.begin() + static_cast<std::ptrdiff_t>(2 * L));
  return v;
}

inline StepOutput combine_window(const TreeLstmModel& model, const MaskedSequence& seq,
                                 std::size_t t, const LstmState& main_state,
                                 const LstmState& leaf_start) {
  const std::size_t L = model.window();
  const std::size_t q = model.hidden();
  StepOutput out;
  out.slot = t;
  out.pattern = window_pattern(seq, t, L);
  for (const std::size_t i : active_set(out.pattern)) {
    if (model.network_slot(i)) out.active.push_back(i);
  }

  const std::size_t window_begin = t + 1 - L;
  out.h_bar.reserve(out.active.size());
  for (const std::size_t i : out.active) {
    if (i == 0) {
      out.h_bar.push_back(main_state.h);
      continue;
    }
    const LstmParams& params = model.network(*model.network_slot(i));
    LeafTrace leaf;
    leaf.pattern_index = i;
    LstmState s = leaf_start;
    for (const std::size_t offset : leaf_positions(pattern_of_index(static_cast<std::uint32_t>(i), L))) {
      leaf.steps.push_back(cell_forward(params, seq.input(window_begin + offset), s));
      s = state_of(leaf.steps.back());
    }
    out.h_bar.push_back(s.h);
    out.leaves.push_back(std::move(leaf));
  }

  Vector logits_full(model.config().pattern_count(), 0.0);
  out.logits.reserve(out.active.size());
  for (std::size_t a = 0; a < out.active.size(); ++a) {
    const std::size_t i = out.active[a];
    const Vector& w = model.weights().w_tilde[model.w_tilde_slot(*model.network_slot(i))];
    const Vector feat =
        combination_input(out.pattern, pattern_of_index(static_cast<std::uint32_t>(i), L), out.h_bar[a]);
    const Real logit = dot(w.span(), feat.span());
    out.logits.push_back(logit);
    logits_full[i] = logit;
  }
  out.alpha = masked_softmax(logits_full.span(), out.active);

  out.h_hat = Vector(q);
  for (std::size_t a = 0; a < out.active.size(); ++a) {
    const Real weight = out.alpha[out.active[a]];
    for (std::size_t j = 0; j < q; ++j) out.h_hat[j] += weight * out.h_bar[a][j];
  }
  const Vector& w_hat = model.weights().w_hat;
  out.prediction = dot(w_hat.span().first(q), out.h_hat.span()) + w_hat[q];
  return out;
}

}  // namespace detail

/// One prediction at grid slot t. `cursor` must have consumed exactly the slots before
/// the window, i.e. cursor.next_slot == t − L + 1.
inline StepOutput step_forward(const TreeLstmModel& model, const MaskedSequence& seq,
                               std::size_t t, const MainCursor& cursor) {
  const std::size_t L = model.window();
  if (t + 1 < L || cursor.next_slot != t + 1 - L) {
    throw InvalidArgument("step_forward: main state has consumed " +
                          std::to_string(cursor.next_slot) + " slots but the window at slot " +
                          std::to_string(t) + " needs " + std::to_string(t + 1 - std::min(t + 1, L)));
  }
  const LstmState& leaf_start =
      model.config().leaf_init == LeafInit::AfterWindowStart ? cursor.state : cursor.previous;
  return detail::combine_window(model, seq, t, cursor.state, leaf_start);
}

/// Advances the main network over grid slot `cursor.next_slot`; missing slots leave it as is.
/// Returns the trace when a cell step ran.
inline std::optional<StepTrace> advance_main(const TreeLstmModel& model, const MaskedSequence& seq,
                                             MainCursor& cursor) {
  const std::size_t s = cursor.next_slot++;
  cursor.previous = cursor.state;
  if (!seq.has_input(s)) return std::nullopt;
  StepTrace trace = cell_forward(model.weights().main, seq.input(s), cursor.state);
  cursor.state = state_of(trace);
  return trace;
}

/// Forward pass with everything backward needs.
struct TreeRun {
  std::vector<LstmState> main_states;  // [0] is the incoming state; [k] follows main_steps[k-1]
  std::vector<StepTrace> main_steps;
  std::vector<StepOutput> steps;
  MainCursor final_cursor;      // before flushing
  LstmState final_main;         // after flushing the trailing window slots
  std::size_t flush_calls = 0;  // main cell steps spent on the flush

  std::size_t main_cell_calls() const noexcept { return main_steps.size() + flush_calls; }
};

/// Predictions for grid slots [t_begin, t_end), starting from `cursor`. With `flush`, the
/// main network also consumes the trailing in-window slots so final_main covers the whole
/// range; flushed steps carry no gradient.
inline TreeRun forward_range(const TreeLstmModel& model, const MaskedSequence& seq,
                             std::size_t t_begin, std::size_t t_end, MainCursor cursor,
                             bool flush) {
  const std::size_t L = model.window();
  if (seq.width() != 0 && seq.width() != model.input()) {
    throw DimensionError("Tree-LSTM: sequence width " + std::to_string(seq.width()) +
                         " but model input size " + std::to_string(model.input()));
  }
  if (t_begin < L || t_end > seq.size() || t_begin > t_end) {
    throw InvalidArgument("forward_range: [" + std::to_string(t_begin) + ", " +
                          std::to_string(t_end) + ") invalid for window " + std::to_string(L) +
                          " and sequence length " + std::to_string(seq.size()));
  }
  TreeRun run;
  run.main_states.push_back(cursor.state);
  run.steps.reserve(t_end - t_begin);
  for (std::size_t t = t_begin; t < t_end; ++t) {
    // Bring the main network up to slot t − L.
    bool stepped = false;
    while (cursor.next_slot <= t - L) {
      auto trace = advance_main(model, seq, cursor);
      stepped = trace.has_value();
      if (stepped) {
        run.main_steps.push_back(std::move(*trace));
        run.main_states.push_back(cursor.state);
      }
    }
    const std::size_t k = run.main_states.size() - 1;
    StepOutput out = step_forward(model, seq, t, cursor);
    out.main_state = k;
    out.leaf_start_state =
        model.config().leaf_init == LeafInit::BeforeWindowStart && stepped ? k - 1 : k;
    run.steps.push_back(std::move(out));
  }
  run.final_cursor = cursor;
  if (flush) {
    LstmState s = cursor.state;
    for (std::size_t slot = cursor.next_slot; slot < t_end; ++slot) {
      if (!seq.has_input(slot)) continue;
      s = state_of(cell_forward(model.weights().main, seq.input(slot), s));
      ++run.flush_calls;
    }
    run.final_main = s;
  } else {
    run.final_main = cursor.state;
  }
  return run;
}

/// Full pass: one prediction per grid slot t ∈ [L, N).
inline TreeRun sequence_forward(const TreeLstmModel& model, const MaskedSequence& seq) {
  if (seq.size() < model.window() + 1) {
    throw InvalidArgument("sequence_forward: sequence of " + std::to_string(seq.size()) +
                          " slots is shorter than window + 1 = " +
                          std::to_string(model.window() + 1));
  }
  return forward_range(model, seq, model.window(), seq.size(),
                       MainCursor::start(model.hidden()), true);
}

// ---------------------------------------------------------------------------
// Backward pass

/// Gradients of Σ_s dprediction[s]·d̂_s with respect to every weight.
/// `dprediction` is aligned with run.steps. Main-network gradients are truncated at
/// blocks of `bptt_horizon` main cell steps; leaf recurrences are always fully unrolled.
inline TreeLstmWeights sequence_backward(const TreeLstmModel& model, const TreeRun& run,
                                         std::span<const Real> dprediction) {
  if (dprediction.size() != run.steps.size()) {
    throw InvalidArgument("sequence_backward: " + std::to_string(dprediction.size()) +
                          " loss gradients for " + std::to_string(run.steps.size()) + " steps");
  }
  if (run.main_states.size() != run.main_steps.size() + 1) {
    throw InvalidArgument("sequence_backward: run traces are inconsistent");
  }
  const std::size_t q = model.hidden();
  const std::size_t L = model.window();
  const auto& w = model.weights();
  TreeLstmWeights grads = w.zeros_like();

  const std::size_t states = run.main_states.size();
  std::vector<Vector> dh(states, Vector(q)), dc(states, Vector(q));
  const Vector zero(q);

  for (std::size_t s = 0; s < run.steps.size(); ++s) {
    const Real g = dprediction[s];
    if (g == 0.0) continue;
    const StepOutput& step = run.steps[s];
    if (step.main_state >= states || step.leaf_start_state >= states) {
      throw InvalidArgument("sequence_backward: stale step trace");
    }

    Vector d_hhat(q);
    for (std::size_t j = 0; j < q; ++j) {
      grads.w_hat[j] += g * step.h_hat[j];
      d_hhat[j] = g * w.w_hat[j];
    }
    grads.w_hat[q] += g;

    const std::size_t n = step.active.size();
    std::vector<Real> d_alpha(n);
    Real mean = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      d_alpha[a] = dot(d_hhat.span(), step.h_bar[a].span());
      mean += step.alpha[step.active[a]] * d_alpha[a];
    }

    std::size_t leaf_pos = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t i = step.active[a];
      const std::size_t net = *model.network_slot(i);
      const std::size_t ws = model.w_tilde_slot(net);
      const Real alpha = step.alpha[i];
      const Real d_logit = alpha * (d_alpha[a] - mean);

      const PresencePattern own = pattern_of_index(static_cast<std::uint32_t>(i), L);
      const Vector feat = detail::combination_input(step.pattern, own, step.h_bar[a]);
      Vector& gw = grads.w_tilde[ws];
      for (std::size_t j = 0; j < feat.size(); ++j) gw[j] += d_logit * feat[j];

      Vector d_hbar(q);
      const Vector& wt = w.w_tilde[ws];
      for (std::size_t j = 0; j < q; ++j) d_hbar[j] = alpha * d_hhat[j] + d_logit * wt[2 * L + j];

      if (i == 0) {
        dh[step.main_state] += d_hbar;
        continue;
      }
      const LeafTrace& leaf = step.leaves.at(leaf_pos++);
      const LstmParams& params = model.network(net);
      LstmParams& gparams = grads.leaves[net - 1];
      Vector d_h = std::move(d_hbar);
      Vector d_c(q);
      for (auto it = leaf.steps.rbegin(); it != leaf.steps.rend(); ++it) {
        CellBackward back = cell_backward(params, *it, d_h.span(), d_c.span(), gparams);
        d_h = std::move(back.dh_prev);
        d_c = std::move(back.dc_prev);
      }
      dh[step.leaf_start_state] += d_h;
      dc[step.leaf_start_state] += d_c;
    }
  }

  const std::size_t horizon = model.config().bptt_horizon;
  for (std::size_t k = states - 1; k >= 1; --k) {
    const bool carries = (k - 1) % horizon != 0;
    CellBackward back =
        cell_backward(w.main, run.main_steps[k - 1], dh[k].span(), dc[k].span(), grads.main);
    if (carries) {
      dh[k - 1] += back.dh_prev;
      dc[k - 1] += back.dc_prev;
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Window growth

/// Builds an (L+1)-window model from a trained L-window model. Leaves whose new pattern
/// starts with 0 keep the index, and hence the weights, of the old leaf with the same
/// trailing bits; all other leaves are drawn fresh from N(0, init_variance) with `seed`.
/// Combination vectors of inherited networks get zeros in the two new pattern slots.
inline TreeLstmModel grow_window(const TreeLstmModel& source, std::uint64_t seed) {
  const TreeLstmConfig& old_cfg = source.config();
  TreeLstmConfig cfg = old_cfg;
  cfg.window = old_cfg.window + 1;
  cfg.seed = seed;
  // Explicit leaf lists carry over unchanged: index i names [0; p_i] in the grown window.
  cfg.validate();

  const std::size_t L = old_cfg.window;
  const std::size_t q = old_cfg.hidden;
  const Real var = cfg.init_variance;
  const std::vector<std::size_t> leaves = cfg.configured_leaves();
  Rng rng(seed);

  auto pad = [&](const Vector& old) {
    // [p (L); p_i (L); h] -> [0, p; 0, p_i; h]
    Vector v(q + 2 * (L + 1));
    for (std::size_t j = 0; j < L; ++j) {
      v[1 + j] = old[j];
      v[L + 2 + j] = old[L + j];
    }
    for (std::size_t j = 0; j < q; ++j) v[2 * (L + 1) + j] = old[2 * L + j];
    return v;
  };

  TreeLstmWeights weights;
  weights.main = source.weights().main;
  weights.w_hat = source.weights().w_hat;
  const bool shared = cfg.combination == CombinationWeights::Shared;
  // Slot 0 is the main network's vector, or the shared one.
  weights.w_tilde.push_back(pad(source.weights().w_tilde[0]));
  for (const std::size_t i : leaves) {
    const auto old_slot = i < old_cfg.pattern_count() ? source.network_slot(i) : std::nullopt;
    if (old_slot) {
      weights.leaves.push_back(source.network(*old_slot));
      if (!shared) weights.w_tilde.push_back(pad(source.weights().w_tilde[*old_slot]));
    } else {
      weights.leaves.push_back(LstmParams::gaussian(rng, q, cfg.input, var));
      if (!shared) weights.w_tilde.push_back(gaussian_vector(rng, cfg.combination_width(), var));
    }
  }
  return TreeLstmModel::from_weights(cfg, std::move(weights));
}

}  // namespace treelstm
