#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>

namespace sumbrella {

inline constexpr int kNumLeaves = 3;

// Subset of the three leaves, stored as bits 0..2.
class LeafSet {
 public:
  constexpr LeafSet() = default;
  constexpr explicit LeafSet(std::uint8_t mask) : mask_(mask & 0x7u) {}
  constexpr LeafSet(std::initializer_list<int> leaves) {
    for (int leaf : leaves) insert(leaf);
  }

  static constexpr LeafSet all() { return LeafSet(0x7u); }

  constexpr bool contains(int leaf) const { return ((mask_ >> leaf) & 1u) != 0; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr int count() const {
    return int((mask_ & 1u) + ((mask_ >> 1) & 1u) + ((mask_ >> 2) & 1u));
  }
  constexpr std::uint8_t mask() const { return mask_; }
  constexpr void insert(int leaf) { mask_ |= std::uint8_t(1u << leaf); }

  constexpr bool operator==(const LeafSet&) const = default;

  // "0|2" for {0,2}; empty set formats as "".
  std::string to_string() const {
    std::string out;
    for (int i = 0; i < kNumLeaves; ++i) {
      if (!contains(i)) continue;
      if (!out.empty()) out += '|';
      out += char('0' + i);
    }
    return out;
  }

 private:
  std::uint8_t mask_ = 0;
};

}  // namespace sumbrella
