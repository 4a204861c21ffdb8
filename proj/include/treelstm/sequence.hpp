#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treelstm/numeric.hpp"

namespace treelstm {

/// One grid slot: an input vector that may be missing, and a target that may be undefined.
struct Slot {
  std::optional<Vector> input;
  std::optional<Real> target;

  friend bool operator==(const Slot&, const Slot&) = default;
};

/// Inputs on a uniform time grid. Slot t holds x_{tΔ}; all present inputs share one width.
class MaskedSequence {
 public:
  MaskedSequence() = default;
  explicit MaskedSequence(std::size_t width) : width_(width) {}

  static MaskedSequence from_values(const std::vector<std::optional<Real>>& values) {
    MaskedSequence seq(1);
    for (const auto& v : values) {
      Slot s;
      if (v) s.input = Vector{*v};
      seq.push_back(std::move(s));
    }
    return seq;
  }

  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  std::size_t width() const noexcept { return width_; }

  const Slot& operator[](std::size_t t) const { return slots_.at(t); }
  Slot& operator[](std::size_t t) { return slots_.at(t); }
  const std::vector<Slot>& slots() const noexcept { return slots_; }

  bool has_input(std::size_t t) const { return slots_.at(t).input.has_value(); }
  const Vector& input(std::size_t t) const { return *slots_.at(t).input; }
  std::optional<Real> target(std::size_t t) const { return slots_.at(t).target; }

  void push_back(Slot slot) {
    if (slot.input) {
      if (width_ == 0 && slots_.empty()) width_ = slot.input->size();
      if (slot.input->size() != width_) {
        throw DimensionError("MaskedSequence: slot " + std::to_string(slots_.size()) +
                             " has width " + std::to_string(slot.input->size()) +
                             ", sequence width is " + std::to_string(width_));
      }
    }
    slots_.push_back(std::move(slot));
  }

  void remove_input(std::size_t t) { slots_.at(t).input.reset(); }

  std::size_t missing_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.input ? 0 : 1;
    return n;
  }

  std::size_t target_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.target ? 1 : 0;
    return n;
  }

  /// Grid indices t_1 < t_2 < ... of received inputs.
  std::vector<std::size_t> present_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < slots_.size(); ++t) {
      if (slots_[t].input) out.push_back(t);
    }
    return out;
  }

  /// Δt_k = t_k − t_{k−1} between consecutive received inputs.
  std::vector<std::size_t> arrival_intervals() const {
    const auto idx = present_indices();
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k < idx.size(); ++k) out.push_back(idx[k] - idx[k - 1]);
    return out;
  }

  MaskedSequence slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > slots_.size()) {
      throw InvalidArgument("MaskedSequence::slice: [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") outside length " +
                            std::to_string(slots_.size()));
    }
    MaskedSequence out(width_);
    out.slots_.assign(slots_.begin() + static_cast<std::ptrdiff_t>(begin),
                      slots_.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
  }

  friend bool operator==(const MaskedSequence&, const MaskedSequence&) = default;

 private:
  std::size_t width_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace treelstm
