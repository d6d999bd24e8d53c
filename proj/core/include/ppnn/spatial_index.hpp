#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ppnn/geometry.hpp"

namespace ppnn {

// Uniform bucket grid over a rectangular domain supporting O(1) insert and
// swap-remove, range counting and nearest-neighbour queries. Point indices
// are dense in [0, size()); remove(i) moves the last point into slot i.
class PointGrid {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  PointGrid(const Window& domain, double cell_size, int max_cells_per_axis = 256);
  PointGrid(const PointPattern& pattern, double cell_size, int max_cells_per_axis = 256);

  std::size_t insert(Point p);
  void remove(std::size_t index);
  void clear();

  std::span<const Point> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  // Calls f(index, squared_distance) for every stored point with
  // distance(point, u) <= r. Squared distances within rounding of r * r are
  // settled by the square root so the test agrees with distance().
  template <class F>
  void for_each_within(Point u, double r, F&& f) const {
    const double r2 = r * r;
    const double r2_hi = r2 * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
    const int ix0 = cell_x(u.x - r), ix1 = cell_x(u.x + r);
    const int iy0 = cell_y(u.y - r), iy1 = cell_y(u.y + r);
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        for (std::uint32_t idx : cells_[static_cast<std::size_t>(iy) * nx_ + ix]) {
          const double d2 = squared_distance(points_[idx], u);
          if (d2 <= r2 || (d2 <= r2_hi && std::sqrt(d2) <= r)) f(static_cast<std::size_t>(idx), d2);
        }
      }
    }
  }

  // Points within distance r of u (inclusive), optionally skipping one index.
  std::size_t count_within(Point u, double r, std::size_t skip = npos) const;

  // Distance from u to the nearest stored point other than `skip`;
  // +infinity when there is none.
  double nearest_distance(Point u, std::size_t skip = npos) const;

 private:
  int cell_x(double x) const;
  int cell_y(double y) const;
  std::size_t cell_of(Point p) const {
    return static_cast<std::size_t>(cell_y(p.y)) * nx_ + cell_x(p.x);
  }

  Window domain_;
  int nx_ = 1;
  int ny_ = 1;
  double cw_ = 1.0;
  double ch_ = 1.0;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::vector<Point> points_;
  std::vector<std::uint32_t> cell_of_point_;
  std::vector<std::uint32_t> slot_;
};

}  // namespace ppnn
