#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace sunfleet {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Axis-aligned service area anchored at the origin.
struct Area {
  double width = 1000.0;
  double height = 1000.0;

  bool contains(const Point& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  Point clamp(const Point& p) const;

  friend bool operator==(const Area&, const Area&) = default;
};

inline Point Area::clamp(const Point& p) const {
  return {std::fmin(std::fmax(p.x, 0.0), width), std::fmin(std::fmax(p.y, 0.0), height)};
}

// Ground users present during one slot.
struct UserField {
  std::vector<Point> positions;
  double rate_bps = 0.0;
  // How many of `positions` were drawn around a hotspot (the rest are uniform).
  std::size_t hotspot_count = 0;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
};

}  // namespace sunfleet
