#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spsim/membranes.hpp"
#include "spsim/symbols.hpp"

namespace spsim {

// Contents of one grid cell: an ordinary-object multiset plus at most one
// mutually-exclusive object. The ME slot constraint holds at step boundaries;
// within a step an ME object may be consumed and replaced.
struct CellContents {
  Multiset ordinary;
  std::optional<SymbolId> me;

  bool empty() const { return ordinary.empty() && !me.has_value(); }
  friend bool operator==(const CellContents&, const CellContents&) = default;
};

// Full system state at one step boundary. Cells are stored densely over the
// skin grid; absent entries are empty cells. `emitted` accumulates objects
// expelled out of the skin.
struct Configuration {
  std::shared_ptr<const MembraneTree> tree;
  std::vector<CellContents> cells;
  uint64_t step = 0;
  Multiset emitted;

  explicit Configuration(std::shared_ptr<const MembraneTree> t = nullptr)
      : tree(std::move(t)) {
    if (tree) cells.resize(tree->cell_count());
  }

  CellContents& at(Position p) { return cells[tree->cell_index(p)]; }
  const CellContents& at(Position p) const { return cells[tree->cell_index(p)]; }

  // State equality ignores the tree object identity (same-geometry configs
  // from the same model compare by contents).
  bool same_state(const Configuration& o) const {
    return step == o.step && emitted == o.emitted && cells == o.cells;
  }
};

// Everything needed to simulate: alphabet, membrane hierarchy with rules,
// and the declared initial configuration.
struct Model {
  SymbolTable symbols;
  std::shared_ptr<const MembraneTree> tree;
  Configuration initial;
  std::string digest;  // stable hash of the ground model text

  Model() : initial(nullptr) {}
};

// Canonical text form of a configuration: step, emitted ledger, then
// non-empty cells sorted by (y,x) with symbols sorted lexicographically.
// Equal states produce equal text regardless of construction order.
std::string canonical_text(const SymbolTable& symbols, const Configuration& config);

// FNV-1a 64 over the canonical text, as a fixed-width hex string.
std::string canonical_digest(const SymbolTable& symbols, const Configuration& config);
uint64_t fnv1a64(const std::string& text);

}  // namespace spsim
