#include "spsim/membranes.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace spsim {

namespace {
std::string label_str(int label) { return "membrane " + std::to_string(label); }
}  // namespace

size_t MembraneTree::node_index(int label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label)
    throw SpError(ErrorKind::UnknownLabel, label_str(label) + " does not exist");
  return static_cast<size_t>(it - labels_.begin());
}

bool MembraneTree::has_label(int label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

const MembraneTree::Node& MembraneTree::node(int label) const {
  return nodes_[node_index(label)];
}

int MembraneTree::owner(Position p) const {
  if (!in_skin(p))
    throw SpError(ErrorKind::OutOfBounds,
                  "position (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                      ") lies outside the skin");
  return owner_grid_[cell_index(p)];
}

MembraneTree validate_tree(std::vector<MembraneSpec> specs, int skin_width, int skin_height) {
  if (skin_width <= 0 || skin_height <= 0)
    throw SpError(ErrorKind::BoundsViolation, "skin dimensions must be positive");

  MembraneTree tree;
  tree.width_ = skin_width;
  tree.height_ = skin_height;

  std::sort(specs.begin(), specs.end(),
            [](const MembraneSpec& a, const MembraneSpec& b) { return a.label < b.label; });
  for (size_t i = 0; i + 1 < specs.size(); ++i)
    if (specs[i].label == specs[i + 1].label)
      throw SpError(ErrorKind::DuplicateLabel, label_str(specs[i].label) + " declared twice");

  std::unordered_map<int, size_t> by_label;
  for (size_t i = 0; i < specs.size(); ++i) by_label[specs[i].label] = i;

  auto skin_it = by_label.find(1);
  if (skin_it == by_label.end())
    throw SpError(ErrorKind::MissingSkin, "no skin membrane (label 1)");
  const MembraneSpec& skin = specs[skin_it->second];
  if (skin.parent.has_value() || skin.origin != Position{0, 0})
    throw SpError(ErrorKind::MissingSkin, "skin must have no parent and origin (0,0)");
  if (skin.width != skin_width || skin.height != skin_height)
    throw SpError(ErrorKind::BoundsViolation, "skin size does not match the grid");

  for (const MembraneSpec& s : specs) {
    if (s.width <= 0 || s.height <= 0)
      throw SpError(ErrorKind::BoundsViolation, label_str(s.label) + " has empty footprint");
    if (s.label != 1) {
      if (!s.parent.has_value())
        throw SpError(ErrorKind::MissingSkin, label_str(s.label) + " has no parent");
      if (!by_label.count(*s.parent))
        throw SpError(ErrorKind::UnknownLabel,
                      label_str(s.label) + " names missing parent " + std::to_string(*s.parent));
    }
  }

  // Resolve footprints top-down; a cycle or unreachable parent chain leaves
  // membranes unresolved.
  std::vector<Rect> footprints(specs.size());
  std::vector<bool> resolved(specs.size(), false);
  footprints[skin_it->second] = Rect{0, 0, skin.width, skin.height};
  resolved[skin_it->second] = true;
  size_t done = 1;
  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t i = 0; i < specs.size(); ++i) {
      if (resolved[i] || specs[i].label == 1) continue;
      size_t pi = by_label.at(*specs[i].parent);
      if (!resolved[pi]) continue;
      footprints[i] = Rect{footprints[pi].x0 + specs[i].origin.x,
                           footprints[pi].y0 + specs[i].origin.y, specs[i].width,
                           specs[i].height};
      resolved[i] = true;
      ++done;
      progress = true;
    }
  }
  if (done != specs.size())
    throw SpError(ErrorKind::UnknownLabel, "membrane hierarchy is not rooted at the skin");

  // Child containment with one-cell clearance on every side.
  for (size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].label == 1) continue;
    const Rect& c = footprints[i];
    const Rect& p = footprints[by_label.at(*specs[i].parent)];
    if (c.x0 < p.x0 || c.y0 < p.y0 || c.x1() > p.x1() || c.y1() > p.y1())
      throw SpError(ErrorKind::BoundsViolation,
                    label_str(specs[i].label) + " exceeds its parent's footprint");
    if (c.x0 < p.x0 + 1 || c.y0 < p.y0 + 1 || c.x1() > p.x1() - 1 || c.y1() > p.y1() - 1)
      throw SpError(ErrorKind::ClearanceViolation,
                    label_str(specs[i].label) + " touches its parent's border");
  }

  // Sibling separation: no overlap, and no two cells at Manhattan distance 1.
  for (size_t i = 0; i < specs.size(); ++i) {
    for (size_t j = i + 1; j < specs.size(); ++j) {
      if (specs[i].label == 1 || specs[j].label == 1) continue;
      if (*specs[i].parent != *specs[j].parent) continue;
      const Rect& a = footprints[i];
      const Rect& b = footprints[j];
      if (a.intersects(b))
        throw SpError(ErrorKind::OverlapViolation, label_str(specs[i].label) + " and " +
                                                       label_str(specs[j].label) + " overlap");
      // Nearest-cell Manhattan distance between the footprints (0 = overlap,
      // 1 = edge contact, 2 = corner contact or one empty row/column).
      int dx = std::max({a.x0 - (b.x1() - 1), b.x0 - (a.x1() - 1), 0});
      int dy = std::max({a.y0 - (b.y1() - 1), b.y0 - (a.y1() - 1), 0});
      if (dx + dy == 1)
        throw SpError(ErrorKind::AdjacencyViolation,
                      label_str(specs[i].label) + " and " + label_str(specs[j].label) +
                          " have cells at distance 1");
    }
  }

  for (const MembraneSpec& s : specs) tree.labels_.push_back(s.label);
  tree.nodes_.resize(specs.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    tree.nodes_[i].spec = std::move(specs[i]);
    tree.nodes_[i].footprint = footprints[i];
  }
  for (const auto& n : tree.nodes_)
    if (n.spec.parent.has_value()) {
      size_t pi = tree.node_index(*n.spec.parent);
      tree.nodes_[pi].children.push_back(n.spec.label);
    }
  for (auto& n : tree.nodes_) std::sort(n.children.begin(), n.children.end());

  // Paint ownership parents-first; children repaint their interior.
  tree.owner_grid_.assign(tree.cell_count(), 1);
  std::vector<int> queue{1};
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    const auto& n = tree.nodes_[tree.node_index(queue[qi])];
    for (int y = n.footprint.y0; y < n.footprint.y1(); ++y)
      for (int x = n.footprint.x0; x < n.footprint.x1(); ++x)
        tree.owner_grid_[tree.cell_index({x, y})] = n.spec.label;
    for (int c : n.children) queue.push_back(c);
  }
  return tree;
}

std::vector<Position> region_of(const MembraneTree& tree, int label) {
  const auto& n = tree.node(label);
  std::vector<Position> out;
  for (int y = n.footprint.y0; y < n.footprint.y1(); ++y)
    for (int x = n.footprint.x0; x < n.footprint.x1(); ++x)
      if (tree.owner({x, y}) == label) out.push_back({x, y});
  return out;
}

Position route_in(const MembraneTree& tree, Position from, int child) {
  const Rect fp = tree.footprint(child);
  if (fp.contains(from))
    throw SpError(ErrorKind::NotAdjacentToChild, "source position lies inside " + label_str(child));
  Position found{};
  int hits = 0;
  for (Displacement d : {kNorth, kSouth, kEast, kWest}) {
    Position q = from + d;
    if (fp.contains(q)) {
      found = q;
      ++hits;
    }
  }
  if (hits != 1)
    throw SpError(ErrorKind::NotAdjacentToChild,
                  "source position is not adjacent to " + label_str(child));
  // Footprint border cells always belong to the child's own region (children
  // of the child keep one cell of clearance), so `found` is the unique
  // nearest region cell.
  return found;
}

std::vector<OutLanding> route_out(const MembraneTree& tree, Position from, int membrane) {
  const Rect fp = tree.footprint(membrane);
  if (!fp.on_boundary(from))
    throw SpError(ErrorKind::NotAdjacentToEdge,
                  "source position is not adjacent to the border of " + label_str(membrane));
  std::vector<OutLanding> out;
  for (Displacement d : {kNorth, kSouth, kEast, kWest}) {
    Position q = from + d;
    if (fp.contains(q)) continue;
    if (tree.in_skin(q))
      out.push_back({false, q});
    else
      out.push_back({true, {}});
  }
  return out;
}

}  // namespace spsim
