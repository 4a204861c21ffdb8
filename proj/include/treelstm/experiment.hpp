#pragma once

// Shared data pipeline for the CLI and the benchmarks: mask, split, scale, build targets.

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "treelstm/dataio.hpp"
#include "treelstm/trainer.hpp"

namespace treelstm {

struct ExperimentData {
  MaskedSequence full;   // whole grid, used for evaluation
  MaskedSequence train;  // first 60%, targets confined to the slice
  std::size_t test_begin = 0;
  std::optional<ScalerParams> scaler;
};

struct PipelineOptions {
  Real missing_ratio = 0.0;
  std::uint64_t seed = 0;
  bool scale = true;
  /// Build next-value targets; otherwise the targets already in the data are used.
  bool next_value_targets = true;
};

/// Missingness is injected on the whole sequence before the chronological split.
inline ExperimentData prepare_experiment(const MaskedSequence& raw, const PipelineOptions& opt) {
  MaskedSequence masked = inject_missingness(raw, opt.missing_ratio, opt.seed);
  const std::size_t cut = train_length(masked.size());
  if (cut < 2 || masked.size() - cut < 1) {
    throw InvalidArgument("prepare_experiment: sequence of " + std::to_string(masked.size()) +
                          " slots is too short to split");
  }
  ExperimentData out;
  out.test_begin = cut;
  if (opt.scale) {
    out.scaler = fit_scaler(masked.slice(0, cut));
    masked = apply_scaler(masked, *out.scaler);
  }
  if (opt.next_value_targets) {
    out.full = make_next_value_targets(masked);
    out.train = make_next_value_targets(masked.slice(0, cut));
  } else {
    out.full = masked;
    out.train = masked.slice(0, cut);
  }
  return out;
}

/// epoch,train_mse,test_mse,wall_ms,mult_count. Absent values are empty cells.
inline void write_epoch_csv(std::ostream& out, const std::vector<EpochReport>& reports) {
  out << "epoch,train_mse,test_mse,wall_ms,mult_count\n";
  for (const EpochReport& r : reports) {
    out << r.epoch << ',' << format_real(r.train_mse) << ',';
    if (r.test_mse) out << format_real(*r.test_mse);
    out << ',';
    if (r.wall_ms) out << format_real(*r.wall_ms);
    out << ',' << r.mult_count << '\n';
  }
}

/// slot,split,prediction,target for every emitted slot at or after `from`.
inline void write_predictions_csv(std::ostream& out, const Predictions& p, std::size_t test_begin,
                                  std::size_t from) {
  out << "slot,split,prediction,target\n";
  for (std::size_t i = 0; i < p.slots.size(); ++i) {
    if (p.slots[i] < from) continue;
    out << p.slots[i] << ',' << (p.slots[i] < test_begin ? "train" : "test") << ','
        << format_real(p.values[i]) << ',';
    if (p.targets[i]) out << format_real(*p.targets[i]);
    out << '\n';
  }
}

}  // namespace treelstm
