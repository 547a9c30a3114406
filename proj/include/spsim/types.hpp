#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>

namespace spsim {

// Grid position. Coordinates are naturals inside the skin; signed ints so
// that displacement arithmetic can step outside and be range-checked.
struct Position {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Position&, const Position&) = default;
};

struct Displacement {
  int dx = 0;
  int dy = 0;
  friend auto operator<=>(const Displacement&, const Displacement&) = default;
};

inline Position operator+(Position p, Displacement d) { return {p.x + d.dx, p.y + d.dy}; }

// Velocity vocabulary: north is +y, east is +x.
inline constexpr Displacement kHere{0, 0};
inline constexpr Displacement kNorth{0, 1};
inline constexpr Displacement kSouth{0, -1};
inline constexpr Displacement kEast{1, 0};
inline constexpr Displacement kWest{-1, 0};

inline int manhattan(Position a, Position b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Two positions are adjacent iff their Manhattan distance is exactly 1.
inline bool is_adjacent(Position a, Position b) { return manhattan(a, b) == 1; }

// Half-open axis-aligned rectangle of cells: [x0, x0+w) x [y0, y0+h).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  int x1() const { return x0 + w; }
  int y1() const { return y0 + h; }
  bool contains(Position p) const {
    return p.x >= x0 && p.x < x1() && p.y >= y0 && p.y < y1();
  }
  // Manhattan distance from p to the nearest cell of the rectangle (0 if inside).
  int distance(Position p) const {
    int dx = 0, dy = 0;
    if (p.x < x0) dx = x0 - p.x;
    else if (p.x >= x1()) dx = p.x - (x1() - 1);
    if (p.y < y0) dy = y0 - p.y;
    else if (p.y >= y1()) dy = p.y - (y1() - 1);
    return dx + dy;
  }
  // True when p lies on the outermost ring of the rectangle.
  bool on_boundary(Position p) const {
    if (!contains(p)) return false;
    return p.x == x0 || p.x == x1() - 1 || p.y == y0 || p.y == y1() - 1;
  }
  bool intersects(const Rect& o) const {
    return x0 < o.x1() && o.x0 < x1() && y0 < o.y1() && o.y0 < y1();
  }
  friend auto operator<=>(const Rect&, const Rect&) = default;
};

}  // namespace spsim
