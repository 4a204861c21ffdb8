#pragma once

// CSV ingestion, missingness injection, splitting, scaling, target
// construction and the synthetic sine generator.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treelstm/numeric.hpp"
#include "treelstm/sequence.hpp"

namespace treelstm {

class CsvError : public DataError {
 public:
  enum class Kind { Unreadable, Ragged, NonNumeric, Schema };

  CsvError(Kind kind, std::size_t row, const std::string& what)
      : DataError(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
        kind_(kind),
        row_(row) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based line number in the file; 0 when not tied to a row.
  std::size_t row() const noexcept { return row_; }

 private:
  Kind kind_;
  std::size_t row_;
};

struct CsvSchema {
  enum class Header { Auto, Present, Absent };

  /// Feature columns; empty means every column except the target.
  std::vector<std::size_t> feature_columns;
  std::optional<std::size_t> target_column;
  Header header = Header::Auto;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline std::optional<Real> parse_real(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  Real value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline bool looks_like_header(const std::vector<std::string_view>& cells) {
  return std::any_of(cells.begin(), cells.end(),
                     [](std::string_view c) { return !c.empty() && !parse_real(c); });
}

}  // namespace detail

/// Shortest text that parses back to exactly `v`.
inline std::string format_real(Real v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline MaskedSequence read_csv(std::istream& in, const CsvSchema& schema = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> columns;
  std::vector<std::size_t> features = schema.feature_columns;
  MaskedSequence seq;
  bool first = true;

  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = detail::split_commas(line);
    if (first) {
      first = false;
      const bool header = schema.header == CsvSchema::Header::Present ||
                          (schema.header == CsvSchema::Header::Auto &&
                           detail::looks_like_header(cells));
      columns = cells.size();
      if (schema.target_column && *schema.target_column >= *columns) {
        throw CsvError(CsvError::Kind::Schema, line_no,
                       "target column " + std::to_string(*schema.target_column) +
                           " but only " + std::to_string(*columns) + " columns");
      }
      if (features.empty()) {
        for (std::size_t c = 0; c < *columns; ++c) {
          if (!schema.target_column || c != *schema.target_column) features.push_back(c);
        }
      }
      for (const std::size_t c : features) {
        if (c >= *columns) {
          throw CsvError(CsvError::Kind::Schema, line_no,
                         "feature column " + std::to_string(c) + " but only " +
                             std::to_string(*columns) + " columns");
        }
      }
      if (features.empty()) throw CsvError(CsvError::Kind::Schema, line_no, "no feature columns");
      seq = MaskedSequence(features.size());
      if (header) continue;
    }
    if (cells.size() == 1 && cells[0].empty()) {
      seq.push_back(Slot{});  // a blank line is a fully missing slot
      continue;
    }
    if (cells.size() != *columns) {
      throw CsvError(CsvError::Kind::Ragged, line_no,
                     "expected " + std::to_string(*columns) + " cells, found " +
                         std::to_string(cells.size()));
    }

    Slot slot;
    Vector x(features.size());
    bool complete = true;
    for (std::size_t k = 0; k < features.size(); ++k) {
      const auto cell = cells[features[k]];
      if (cell.empty()) {
        complete = false;
        continue;
      }
      const auto value = detail::parse_real(cell);
      if (!value) {
        throw CsvError(CsvError::Kind::NonNumeric, line_no,
                       "non-numeric cell \"" + std::string(cell) + "\" in column " +
                           std::to_string(features[k]));
      }
      x[k] = *value;
    }
    // A vector is either fully received or fully missing.
    if (complete) slot.input = std::move(x);
    if (schema.target_column) {
      const auto cell = cells[*schema.target_column];
      if (!cell.empty()) {
        const auto value = detail::parse_real(cell);
        if (!value) {
          throw CsvError(CsvError::Kind::NonNumeric, line_no,
                         "non-numeric target \"" + std::string(cell) + "\"");
        }
        slot.target = *value;
      }
    }
    seq.push_back(std::move(slot));
  }
  return seq;
}

inline MaskedSequence load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvError::Kind::Unreadable, 0, "cannot open " + path);
  return read_csv(in, schema);
}

/// Writes a header row then one row per slot; missing values are empty cells.
inline void write_csv(std::ostream& out, const MaskedSequence& seq, bool with_targets = false) {
  const std::size_t m = std::max<std::size_t>(seq.width(), 1);
  for (std::size_t k = 0; k < m; ++k) out << (k ? "," : "") << (m == 1 ? "x" : "x" + std::to_string(k));
  if (with_targets) out << ",target";
  out << '\n';
  for (const Slot& s : seq.slots()) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k) out << ',';
      if (s.input) out << format_real((*s.input)[k]);
    }
    if (with_targets) {
      out << ',';
      if (s.target) out << format_real(*s.target);
    }
    out << '\n';
  }
}

inline void save_csv(const std::string& path, const MaskedSequence& seq,
                     bool with_targets = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError(CsvError::Kind::Unreadable, 0, "cannot write " + path);
  write_csv(out, seq, with_targets);
  if (!out) throw CsvError(CsvError::Kind::Unreadable, 0, "write failed for " + path);
}

/// Deletes exactly round(ratio·N) inputs chosen uniformly without replacement.
inline MaskedSequence inject_missingness(const MaskedSequence& seq, Real ratio,
                                         std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw InvalidArgument("inject_missingness: ratio " + std::to_string(ratio) +
                          " outside [0, 1]");
  }
  const std::size_t n = seq.size();
  const auto count = static_cast<std::size_t>(std::llround(ratio * static_cast<Real>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(order[k], order[pick]);
  }
  MaskedSequence out = seq;
  for (std::size_t k = 0; k < count; ++k) out.remove_input(order[k]);
  return out;
}

/// Number of training slots in the 60/40 chronological split: ⌊0.6·N⌋.
inline std::size_t train_length(std::size_t n) { return (n * 6) / 10; }

inline std::pair<MaskedSequence, MaskedSequence> split_60_40(const MaskedSequence& seq) {
  if (seq.size() < 5) {
    throw InvalidArgument("split_60_40: sequence of " + std::to_string(seq.size()) +
                          " slots is too short (need at least 5)");
  }
  const std::size_t cut = train_length(seq.size());
  return {seq.slice(0, cut), seq.slice(cut, seq.size())};
}

/// Target at slot t is the first feature of slot t+1 when that input exists.
inline MaskedSequence make_next_value_targets(const MaskedSequence& seq) {
  MaskedSequence out = seq;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (t + 1 < seq.size() && seq.has_input(t + 1)) {
      out[t].target = seq.input(t + 1)[0];
    } else {
      out[t].target.reset();
    }
  }
  return out;
}

/// Per-feature min-max map onto [-1, 1]; an optional second map for explicit targets.
struct ScalerParams {
  std::vector<Real> min, max;
  std::optional<std::pair<Real, Real>> target_range;

  static Real forward(Real v, Real lo, Real hi) {
    if (hi == lo) return 0.0;
    return 2.0 * (v - lo) / (hi - lo) - 1.0;
  }
  static Real backward(Real v, Real lo, Real hi) {
    if (hi == lo) return lo;
    return (v + 1.0) * 0.5 * (hi - lo) + lo;
  }

  Real scale(std::size_t feature, Real v) const { return forward(v, min.at(feature), max.at(feature)); }
  Real unscale(std::size_t feature, Real v) const {
    return backward(v, min.at(feature), max.at(feature));
  }

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

inline ScalerParams fit_scaler(const MaskedSequence& train) {
  ScalerParams params;
  bool any = false;
  for (const Slot& s : train.slots()) {
    if (!s.input) continue;
    if (!any) {
      params.min = s.input->values();
      params.max = s.input->values();
      any = true;
      continue;
    }
    for (std::size_t k = 0; k < s.input->size(); ++k) {
      params.min[k] = std::min(params.min[k], (*s.input)[k]);
      params.max[k] = std::max(params.max[k], (*s.input)[k]);
    }
  }
  if (!any) throw DataError("fit_scaler: training data has no present inputs");
  for (const Slot& s : train.slots()) {
    if (!s.target) continue;
    if (!params.target_range) {
      params.target_range = std::pair{*s.target, *s.target};
    } else {
      params.target_range->first = std::min(params.target_range->first, *s.target);
      params.target_range->second = std::max(params.target_range->second, *s.target);
    }
  }
  return params;
}

inline MaskedSequence apply_scaler(const MaskedSequence& seq, const ScalerParams& params) {
  if (seq.width() != 0 && seq.width() != params.min.size()) {
    throw DimensionError("apply_scaler: sequence width " + std::to_string(seq.width()) +
                         " but scaler fitted on " + std::to_string(params.min.size()) +
                         " features");
  }
  MaskedSequence out = seq;
  for (std::size_t t = 0; t < out.size(); ++t) {
    Slot& s = out[t];
    if (s.input) {
      for (std::size_t k = 0; k < s.input->size(); ++k) (*s.input)[k] = params.scale(k, (*s.input)[k]);
    }
    if (s.target && params.target_range) {
      s.target = ScalerParams::forward(*s.target, params.target_range->first,
                                       params.target_range->second);
    }
  }
  return out;
}

inline MaskedSequence invert_scaler(const MaskedSequence& seq, const ScalerParams& params) {
  MaskedSequence out = seq;
  for (std::size_t t = 0; t < out.size(); ++t) {
    Slot& s = out[t];
    if (s.input) {
      for (std::size_t k = 0; k < s.input->size(); ++k) {
        (*s.input)[k] = params.unscale(k, (*s.input)[k]);
      }
    }
    if (s.target && params.target_range) {
      s.target = ScalerParams::backward(*s.target, params.target_range->first,
                                        params.target_range->second);
    }
  }
  return out;
}

inline constexpr std::size_t kSinePeriod = 40;

/// x_j = sin(2πj/40) + ε_j, ε ~ N(0, noise_std²). Fully observed.
inline MaskedSequence synth_sine(std::size_t n, Real noise_std, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("synth_sine: N must be at least 1");
  if (noise_std < 0.0) throw InvalidArgument("synth_sine: negative noise_std");
  Rng rng(seed);
  MaskedSequence seq(1);
  for (std::size_t j = 0; j < n; ++j) {
    const Real phase = 2.0 * std::numbers::pi * static_cast<Real>(j) / kSinePeriod;
    Real v = std::sin(phase);
    if (noise_std > 0.0) v += noise_std * rng.normal();
    seq.push_back(Slot{Vector{v}, std::nullopt});
  }
  return seq;
}

}  // namespace treelstm
