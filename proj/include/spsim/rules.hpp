#pragma once

#include <cstdint>
#include <vector>

#include "spsim/symbols.hpp"
#include "spsim/types.hpp"

namespace spsim {

// Product target. Delta {0,0} means "stay here"; Out crosses the membrane's
// own border; In enters the named child membrane.
struct Target {
  enum class Kind : uint8_t { Delta, Out, In };
  Kind kind = Kind::Delta;
  Displacement delta{};
  int in_label = 0;

  static Target here() { return {}; }
  static Target at(Displacement d) { return {Kind::Delta, d, 0}; }
  static Target out() { return {Kind::Out, {}, 0}; }
  static Target in(int label) { return {Kind::In, {}, label}; }

  friend bool operator==(const Target&, const Target&) = default;
};

// One message: a payload multiset travelling to one target cell.
struct Message {
  Multiset payload;
  Target target;

  friend bool operator==(const Message&, const Message&) = default;
};

// Orientation bits for pair rules: direction from the first cell to the second.
enum OrientationBits : uint8_t {
  kOrientN = 1 << 0,
  kOrientS = 1 << 1,
  kOrientE = 1 << 2,
  kOrientW = 1 << 3,
  kOrientAll = kOrientN | kOrientS | kOrientE | kOrientW,
};

inline Displacement orientation_delta(uint8_t bit) {
  switch (bit) {
    case kOrientN: return kNorth;
    case kOrientS: return kSouth;
    case kOrientE: return kEast;
    default: return kWest;
  }
}

// Evolution rule. Single-cell form: reactants1 -> products1 (orientations 0).
// Pair form (orientations != 0): reactants1 - reactants2 -> products1 -
// products2 on two adjacent cells of the same region; products1 anchor at the
// first cell, products2 at the second.
struct Rule {
  Multiset reactants1;
  Multiset reactants2;
  std::vector<Message> products1;
  std::vector<Message> products2;
  uint8_t orientations = 0;

  bool is_pair() const { return orientations != 0; }

  friend bool operator==(const Rule&, const Rule&) = default;
};

}  // namespace spsim
