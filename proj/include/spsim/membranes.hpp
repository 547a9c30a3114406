#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "spsim/rules.hpp"
#include "spsim/types.hpp"

namespace spsim {

// Declarative description of one membrane. The origin of a non-skin membrane
// is relative to its parent's footprint origin, as model files write it.
// The skin has label 1, no parent, and origin (0,0).
struct MembraneSpec {
  int label = 0;
  std::optional<int> parent;
  Position origin{};  // parent-relative
  int width = 0;
  int height = 0;
  std::vector<Rule> rules;
};

// Validated membrane hierarchy with resolved global footprints, the
// cell-ownership grid, and per-membrane rule sets.
class MembraneTree {
 public:
  struct Node {
    MembraneSpec spec;
    Rect footprint;  // global coordinates
    std::vector<int> children;  // labels, ascending
  };

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_skin(Position p) const {
    return p.x >= 0 && p.x < width_ && p.y >= 0 && p.y < height_;
  }

  bool has_label(int label) const;
  const Node& node(int label) const;  // UnknownLabel if absent
  Rect footprint(int label) const { return node(label).footprint; }
  const std::vector<Rule>& rules(int label) const { return node(label).spec.rules; }
  const std::vector<int>& labels() const { return labels_; }

  // Deepest membrane whose footprint contains p. OutOfBounds outside the skin.
  int owner(Position p) const;

  size_t cell_index(Position p) const {
    return static_cast<size_t>(p.y) * static_cast<size_t>(width_) + static_cast<size_t>(p.x);
  }
  size_t cell_count() const { return static_cast<size_t>(width_) * static_cast<size_t>(height_); }
  Position cell_position(size_t idx) const {
    return {static_cast<int>(idx % width_), static_cast<int>(idx / width_)};
  }

  friend MembraneTree validate_tree(std::vector<MembraneSpec> specs, int skin_width,
                                    int skin_height);

 private:
  std::vector<Node> nodes_;              // sorted by label
  std::vector<int> labels_;              // ascending
  std::vector<int32_t> owner_grid_;      // per cell
  int width_ = 0;
  int height_ = 0;

  size_t node_index(int label) const;
};

// Checks every placement invariant and resolves global footprints:
//  - unique labels; skin present (label 1, no parent, origin (0,0), size = skin dims);
//  - every child footprint lies strictly inside its parent with at least one
//    cell of clearance on all four sides;
//  - sibling footprints are disjoint and contain no cells at Manhattan
//    distance 1 from each other (corner contact is allowed).
MembraneTree validate_tree(std::vector<MembraneSpec> specs, int skin_width, int skin_height);

// All positions owned by `label`: its footprint minus child footprints.
// Sorted by (y, x).
std::vector<Position> region_of(const MembraneTree& tree, int label);

inline int owner_of(const MembraneTree& tree, Position p) { return tree.owner(p); }

// Destination for an object sent into child `child` from `from`: the unique
// nearest cell of the child's region. `from` must be adjacent to the child's
// footprint (NotAdjacentToChild otherwise).
Position route_in(const MembraneTree& tree, Position from, int child);

// One candidate landing for an object sent out of a membrane. When the
// membrane is the skin, every landing is outside the system ("emitted").
struct OutLanding {
  bool emitted = false;
  Position pos{};
  friend auto operator<=>(const OutLanding&, const OutLanding&) = default;
};

// All candidate landings at Manhattan distance 1 from `from` outside the
// membrane's footprint. `from` must lie on the membrane's boundary ring
// (NotAdjacentToEdge otherwise). Non-empty on success; the caller picks one.
std::vector<OutLanding> route_out(const MembraneTree& tree, Position from, int membrane);

}  // namespace spsim
