#pragma once

// Multiplication counting for forward passes and the closed-form cost model of
// the ZI, FI and Tree-LSTM architectures.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "treelstm/baselines.hpp"
#include "treelstm/errors.hpp"
#include "treelstm/tree_lstm.hpp"

namespace treelstm {

/// How input width is charged for a cell step.
///   InputWidth: 4q² + 4q·m + 3q, the input width without the bias column.
///   BiasFolded: 4q² + 4q·(m+1) + 3q, every multiplication actually performed.
enum class BiasConvention { InputWidth, BiasFolded };

inline std::uint64_t cell_multiplications(std::size_t hidden, std::size_t input_width,
                                          BiasConvention convention) {
  const std::uint64_t q = hidden;
  const std::uint64_t m = input_width + (convention == BiasConvention::BiasFolded ? 1 : 0);
  return 4 * q * q + 4 * q * m + 3 * q;
}

struct MultCounter {
  std::uint64_t cell = 0;         // LSTM cell steps
  std::uint64_t combination = 0;  // logits, α-weighted sums and the head
  std::uint64_t cell_calls = 0;

  MultCounter& operator+=(const MultCounter& o) noexcept {
    cell += o.cell;
    combination += o.combination;
    cell_calls += o.cell_calls;
    return *this;
  }
  friend MultCounter operator+(MultCounter a, const MultCounter& b) noexcept { return a += b; }
  friend bool operator==(const MultCounter&, const MultCounter&) = default;

  void reset() noexcept { *this = {}; }
};

/// Tally of a Tree-LSTM forward pass, flushed main steps included.
inline MultCounter measure(const TreeLstmModel& model, const TreeRun& run,
                           BiasConvention convention) {
  const std::size_t q = model.hidden();
  const std::uint64_t per_cell = cell_multiplications(q, model.input(), convention);
  MultCounter c;
  c.cell_calls = run.main_cell_calls();
  const std::uint64_t combo_width = model.config().combination_width();
  for (const StepOutput& step : run.steps) {
    for (const LeafTrace& leaf : step.leaves) c.cell_calls += leaf.steps.size();
    // w̃ᵀh̃ and α·h̄ per active network, then ŵᵀ[ĥ;1].
    c.combination += step.active.size() * (combo_width + q) + (q + 1);
  }
  c.cell = c.cell_calls * per_cell;
  return c;
}

inline MultCounter measure(const BaselineModel& model, const BaselineRun& run,
                           BiasConvention convention) {
  const std::size_t q = model.hidden();
  MultCounter c;
  c.cell_calls = run.cell_calls();
  c.cell = c.cell_calls * cell_multiplications(q, model.config().cell_input(), convention);
  c.combination = run.predictions.size() * (q + 1);
  return c;
}

struct CostModel {
  std::uint64_t n = 0;  // sequence length N
  std::uint64_t m_missing = 0;  // missing slots M
  std::uint64_t q = 0;
  std::uint64_t m = 0;  // input width
  std::uint64_t window = 1;  // L

  void validate() const {
    if (m_missing > n) throw InvalidArgument("CostModel: M exceeds N");
    if (window < 1) throw InvalidArgument("CostModel: window length must be at least 1");
  }

  std::uint64_t cell_cost() const noexcept { return 4 * q * q + 4 * q * m + 3 * q; }
  Real missing_ratio() const {
    if (n == 0) throw InvalidArgument("CostModel: missing ratio undefined for N = 0");
    return static_cast<Real>(m_missing) / static_cast<Real>(n);
  }
};

/// N(4q² + 4qm + 3q)
inline std::uint64_t zi_cost(const CostModel& cm) {
  cm.validate();
  return cm.n * cm.cell_cost();
}

/// N(4q² + 4qm + 7q)
inline std::uint64_t fi_cost(const CostModel& cm) {
  cm.validate();
  return cm.n * (4 * cm.q * cm.q + 4 * cm.q * cm.m + 7 * cm.q);
}

/// (N − M)(1 + 2^{L−1}L)(4q² + 4qm + 3q): every received input sees a full window.
inline Real tree_max_cost(const CostModel& cm) {
  cm.validate();
  const Real present = static_cast<Real>(cm.n - cm.m_missing);
  const Real L = static_cast<Real>(cm.window);
  return present * (1.0 + std::exp2(L - 1.0) * L) * static_cast<Real>(cm.cell_cost());
}

/// (N − M)(1 + 2^{L(1−r)}L(1−r)/2)(4q² + 4qm + 3q), r = M/N.
inline Real tree_min_cost(const CostModel& cm) {
  cm.validate();
  if (cm.n == 0) throw InvalidArgument("tree_min_cost: N must be positive");
  const Real r = cm.missing_ratio();
  const Real present = static_cast<Real>(cm.n - cm.m_missing);
  const Real eff = static_cast<Real>(cm.window) * (1.0 - r);
  return present * (1.0 + std::exp2(eff) * eff / 2.0) * static_cast<Real>(cm.cell_cost());
}

/// tree_min / zi as a function of a continuous missing ratio. Independent of N, q, m.
inline Real tree_min_to_zi_ratio(Real r, std::size_t window) {
  const Real eff = static_cast<Real>(window) * (1.0 - r);
  return (1.0 - r) * (1.0 + std::exp2(eff) * eff / 2.0);
}

struct CrossoverRow {
  Real r = 0.0;
  std::uint64_t missing = 0;
  Real tree_min = 0.0;
  Real tree_max = 0.0;
  std::uint64_t zi = 0;
  std::uint64_t fi = 0;
};

struct CrossoverScan {
  std::vector<CrossoverRow> rows;
  /// Smallest grid ratio with tree_min < zi, if any.
  std::optional<Real> first_grid_crossing;
  /// Infimum of the ratios at which tree_min < zi, located by bisection on the
  /// continuous formula; nullopt when the tree never wins.
  std::optional<Real> crossover;
};

/// Sweeps r over {0, step, ..., 1} and locates where Tree-LSTM (min) undercuts ZI.
inline CrossoverScan crossover_scan(std::size_t q, std::size_t m, std::size_t window,
                                    std::size_t n, Real step = 0.05) {
  if (!(step > 0.0 && step <= 1.0)) throw InvalidArgument("crossover_scan: step outside (0, 1]");
  if (n == 0) throw InvalidArgument("crossover_scan: N must be positive");
  if (window < 1) throw InvalidArgument("crossover_scan: window must be at least 1");
  CrossoverScan scan;
  const auto count = static_cast<std::size_t>(std::llround(1.0 / step));
  for (std::size_t k = 0; k <= count; ++k) {
    const Real r = std::min(1.0, static_cast<Real>(k) * step);
    CostModel cm{n, static_cast<std::uint64_t>(std::llround(r * static_cast<Real>(n))), q, m,
                 window};
    CrossoverRow row{r, cm.m_missing, tree_min_cost(cm), tree_max_cost(cm), zi_cost(cm),
                     fi_cost(cm)};
    if (!scan.first_grid_crossing && row.tree_min < static_cast<Real>(row.zi)) {
      scan.first_grid_crossing = r;
    }
    scan.rows.push_back(row);
  }

  // The ratio is nonincreasing in r, so the winning region is an interval [r*, 1].
  const auto wins = [&](Real r) { return tree_min_to_zi_ratio(r, window) < 1.0; };
  if (wins(0.0)) {
    scan.crossover = 0.0;
  } else if (wins(1.0)) {
    Real lo = 0.0;
    Real hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const Real mid = 0.5 * (lo + hi);
      (wins(mid) ? hi : lo) = mid;
    }
    scan.crossover = hi;
  }
  return scan;
}

}  // namespace treelstm
