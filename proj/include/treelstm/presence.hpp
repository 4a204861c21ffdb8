#pragma once

// Presence patterns over a length-L window.
//
// Wire format: bit p_1 is the oldest in-window slot and the most significant
// bit of the pattern index; p_L is the newest slot and the least significant
// bit. "101" therefore has index 5 and says the oldest and newest slots hold
// inputs while the middle one is missing.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treelstm/errors.hpp"

namespace treelstm {

inline constexpr std::size_t kMaxWindow = 20;

class PresencePattern {
 public:
  PresencePattern() = default;

  /// Pattern whose index is `index` over a window of `length` slots.
  static PresencePattern from_index(std::uint32_t index, std::size_t length) {
    check_length(length);
    if (length < 32 && index >= (std::uint32_t{1} << length)) {
      throw InvalidArgument("PresencePattern: index " + std::to_string(index) +
                            " does not fit in " + std::to_string(length) + " bits");
    }
    PresencePattern p;
    p.length_ = length;
    p.mask_ = index;
    return p;
  }

  /// Parses the '0'/'1' text form, p_1 first.
  static PresencePattern parse(std::string_view text) {
    check_length(text.size());
    std::uint32_t mask = 0;
    for (const char ch : text) {
      if (ch != '0' && ch != '1') {
        throw InvalidArgument("PresencePattern: invalid character in \"" + std::string(text) +
                              "\"");
      }
      mask = (mask << 1) | static_cast<std::uint32_t>(ch == '1');
    }
    return from_index(mask, text.size());
  }

  static PresencePattern from_bits(const std::vector<int>& bits) {
    std::string text;
    for (const int b : bits) text.push_back(b ? '1' : '0');
    return parse(text);
  }

  std::size_t length() const noexcept { return length_; }

  /// Decimal representation Σ_j p_j·2^{L−j}.
  std::uint32_t index() const noexcept { return mask_; }

  /// Whether the slot at window offset `offset` (0 = oldest) is present.
  bool present(std::size_t offset) const noexcept {
    return ((mask_ >> (length_ - 1 - offset)) & 1U) != 0;
  }

  std::size_t ones() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }

  std::string to_string() const {
    std::string s(length_, '0');
    for (std::size_t j = 0; j < length_; ++j) s[j] = present(j) ? '1' : '0';
    return s;
  }

  friend bool operator==(const PresencePattern&, const PresencePattern&) = default;

 private:
  static void check_length(std::size_t length) {
    if (length == 0 || length > kMaxWindow) {
      throw InvalidArgument("PresencePattern: window length " + std::to_string(length) +
                            " outside [1, " + std::to_string(kMaxWindow) + "]");
    }
  }

  std::size_t length_ = 0;
  std::uint32_t mask_ = 0;
};

inline std::uint32_t index_of(const PresencePattern& p) noexcept { return p.index(); }

inline PresencePattern pattern_of_index(std::uint32_t index, std::size_t length) {
  return PresencePattern::from_index(index, length);
}

/// q ≤ p bitwise and q ≠ p.
inline bool is_strict_subpattern(const PresencePattern& q, const PresencePattern& p) {
  if (q.length() != p.length()) {
    throw DimensionError("is_strict_subpattern: lengths " + std::to_string(q.length()) + " and " +
                         std::to_string(p.length()));
  }
  return (q.index() & ~p.index()) == 0 && q.index() != p.index();
}

/// Indices of p and all its strict subpatterns, ascending. Always contains 0.
inline std::vector<std::size_t> active_set(const PresencePattern& p) {
  const std::uint32_t full = p.index();
  std::vector<std::size_t> out;
  out.reserve(std::size_t{1} << p.ones());
  // Sub-mask enumeration visits submasks in descending order.
  for (std::uint32_t sub = full;; sub = (sub - 1) & full) {
    out.push_back(sub);
    if (sub == 0) break;
  }
  return {out.rbegin(), out.rend()};
}

/// Window offsets (0 = oldest) of the set bits, oldest first.
inline std::vector<std::size_t> leaf_positions(const PresencePattern& p) {
  std::vector<std::size_t> out;
  out.reserve(p.ones());
  for (std::size_t j = 0; j < p.length(); ++j) {
    if (p.present(j)) out.push_back(j);
  }
  return out;
}

}  // namespace treelstm
