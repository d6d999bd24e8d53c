#include "ppnn/spatial_index.hpp"

#include <algorithm>
#include <cassert>

namespace ppnn {

PointGrid::PointGrid(const Window& domain, double cell_size, int max_cells_per_axis)
    : domain_(domain) {
  const double size = cell_size > 0.0 ? cell_size : domain.shorter_side();
  const auto axis_cells = [&](double extent) {
    const double cells = std::floor(extent / size);
    return static_cast<int>(std::clamp(cells, 1.0, static_cast<double>(max_cells_per_axis)));
  };
  nx_ = axis_cells(domain.width());
  ny_ = axis_cells(domain.height());
  cw_ = domain.width() / nx_;
  ch_ = domain.height() / ny_;
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
}

PointGrid::PointGrid(const PointPattern& pattern, double cell_size, int max_cells_per_axis)
    : PointGrid(pattern.window(), cell_size, max_cells_per_axis) {
  points_.reserve(pattern.size());
  for (const auto& p : pattern.points()) insert(p);
}

int PointGrid::cell_x(double x) const {
  const double c = std::floor((x - domain_.x_min()) / cw_);
  return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(nx_ - 1)));
}

int PointGrid::cell_y(double y) const {
  const double c = std::floor((y - domain_.y_min()) / ch_);
  return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(ny_ - 1)));
}

std::size_t PointGrid::insert(Point p) {
  const std::size_t idx = points_.size();
  const std::size_t cell = cell_of(p);
  points_.push_back(p);
  cell_of_point_.push_back(static_cast<std::uint32_t>(cell));
  slot_.push_back(static_cast<std::uint32_t>(cells_[cell].size()));
  cells_[cell].push_back(static_cast<std::uint32_t>(idx));
  return idx;
}

void PointGrid::remove(std::size_t index) {
  assert(index < points_.size());
  // Unlink from its cell.
  auto& bucket = cells_[cell_of_point_[index]];
  const std::uint32_t s = slot_[index];
  bucket[s] = bucket.back();
  slot_[bucket[s]] = s;
  bucket.pop_back();

  const std::size_t last = points_.size() - 1;
  if (index != last) {
    points_[index] = points_[last];
    cell_of_point_[index] = cell_of_point_[last];
    slot_[index] = slot_[last];
    cells_[cell_of_point_[index]][slot_[index]] = static_cast<std::uint32_t>(index);
  }
  points_.pop_back();
  cell_of_point_.pop_back();
  slot_.pop_back();
}

void PointGrid::clear() {
  for (auto& c : cells_) c.clear();
  points_.clear();
  cell_of_point_.clear();
  slot_.clear();
}

std::size_t PointGrid::count_within(Point u, double r, std::size_t skip) const {
  std::size_t count = 0;
  for_each_within(u, r, [&](std::size_t idx, double) {
    if (idx != skip) ++count;
  });
  return count;
}

double PointGrid::nearest_distance(Point u, std::size_t skip) const {
  const std::size_t others = points_.size() - (skip < points_.size() ? 1 : 0);
  if (others == 0) return std::numeric_limits<double>::infinity();

  double best2 = std::numeric_limits<double>::infinity();
  const auto scan = [&](int ix, int iy) {
    for (std::uint32_t idx : cells_[static_cast<std::size_t>(iy) * nx_ + ix]) {
      if (idx == skip) continue;
      best2 = std::min(best2, squared_distance(points_[idx], u));
    }
  };

  if (!domain_.contains(u)) {
    for (int iy = 0; iy < ny_; ++iy)
      for (int ix = 0; ix < nx_; ++ix) scan(ix, iy);
    return std::sqrt(best2);
  }

  const int cx = cell_x(u.x), cy = cell_y(u.y);
  const int max_ring = std::max(nx_, ny_);
  const double step = std::min(cw_, ch_);
  for (int k = 0; k <= max_ring; ++k) {
    const int x0 = cx - k, x1 = cx + k, y0 = cy - k, y1 = cy + k;
    for (int ix = std::max(x0, 0); ix <= std::min(x1, nx_ - 1); ++ix) {
      if (y0 >= 0) scan(ix, y0);
      if (k > 0 && y1 < ny_) scan(ix, y1);
    }
    for (int iy = std::max(y0 + 1, 0); iy <= std::min(y1 - 1, ny_ - 1); ++iy) {
      if (x0 >= 0) scan(x0, iy);
      if (k > 0 && x1 < nx_) scan(x1, iy);
    }
    // Every cell outside ring k is at least k * step away from u.
    const double reach = k * step;
    if (best2 <= reach * reach) break;
  }
  return std::sqrt(best2);
}

}  // namespace ppnn
