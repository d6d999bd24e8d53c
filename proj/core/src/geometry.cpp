#include "ppnn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppnn/spatial_index.hpp"

namespace ppnn {

double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

Window::Window(double x_min, double x_max, double y_min, double y_max)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max) {
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
        std::isfinite(y_max))) {
    throw std::invalid_argument("Window: non-finite bounds");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    std::ostringstream msg;
    msg << "Window: empty rectangle [" << x_min << "," << x_max << "]x[" << y_min
        << "," << y_max << "]";
    throw std::invalid_argument(msg.str());
  }
}

double Window::shorter_side() const { return std::min(width(), height()); }

double Window::diameter() const { return std::hypot(width(), height()); }

bool Window::contains(Point u) const {
  return u.x >= x_min_ && u.x <= x_max_ && u.y >= y_min_ && u.y <= y_max_;
}

Window Window::dilate(double margin) const {
  if (!(margin >= 0.0)) throw std::invalid_argument("dilate: negative margin");
  return {x_min_ - margin, x_max_ + margin, y_min_ - margin, y_max_ + margin};
}

Window Window::erode(double margin) const {
  if (!(margin >= 0.0)) throw std::invalid_argument("erode: negative margin");
  if (!(2.0 * margin < shorter_side())) {
    throw std::invalid_argument("erode: margin leaves an empty window");
  }
  return {x_min_ + margin, x_max_ - margin, y_min_ + margin, y_max_ - margin};
}

double distance_to_boundary(Point u, const Window& w) {
  if (!w.contains(u)) {
    throw std::invalid_argument("distance_to_boundary: point outside window");
  }
  return std::min({u.x - w.x_min(), w.x_max() - u.x, u.y - w.y_min(), w.y_max() - u.y});
}

PointPattern::PointPattern(std::vector<Point> points, Window window)
    : points_(std::move(points)), window_(window) {
  for (const auto& p : points_) {
    if (!window_.contains(p)) {
      std::ostringstream msg;
      msg << "PointPattern: point (" << p.x << "," << p.y << ") outside window";
      throw std::invalid_argument(msg.str());
    }
  }
}

bool PointPattern::has_duplicates() const {
  std::vector<Point> sorted(points_);
  std::sort(sorted.begin(), sorted.end(), [](Point a, Point b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

Eigen::MatrixXd pairwise_distances(const PointPattern& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dij = distance(p[i], p[j]);
      d(i, j) = dij;
      d(j, i) = dij;
    }
  }
  return d;
}

std::size_t count_r_close_pairs(const PointPattern& p, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("count_r_close_pairs: negative R");
  if (p.size() < 2) return 0;
  const PointGrid grid(p, std::max(r, p.window().shorter_side() / 256.0));
  std::size_t twice = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    twice += grid.count_within(p[i], r, i);
  }
  return twice / 2;
}

}  // namespace ppnn
