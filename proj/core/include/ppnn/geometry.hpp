#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ppnn {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(Point a, Point b);

// Closed axis-aligned rectangle. Immutable once built.
class Window {
 public:
  Window(double x_min, double x_max, double y_min, double y_max);

  static Window unit_square() { return {0.0, 1.0, 0.0, 1.0}; }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double shorter_side() const;
  double diameter() const;
  double area() const { return width() * height(); }

  // Boundary points count as inside.
  bool contains(Point u) const;

  Window dilate(double margin) const;
  // Throws std::invalid_argument if the result would be empty.
  Window erode(double margin) const;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  double x_min_;
  double x_max_;
  double y_min_;
  double y_max_;
};

// Minimum distance from u to the four edges of w. Throws if u is outside w.
double distance_to_boundary(Point u, const Window& w);

class PointPattern {
 public:
  explicit PointPattern(Window window) : window_(window) {}
  // Throws std::invalid_argument if any point lies outside the window.
  PointPattern(std::vector<Point> points, Window window);

  const Window& window() const { return window_; }
  std::span<const Point> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  // Diagnostic only; duplicates are legal.
  bool has_duplicates() const;

  // Observed intensity n / |W|.
  double intensity() const {
    return static_cast<double>(points_.size()) / window_.area();
  }

  friend bool operator==(const PointPattern&, const PointPattern&) = default;

 private:
  std::vector<Point> points_;
  Window window_;
};

// Full symmetric n x n distance matrix.
Eigen::MatrixXd pairwise_distances(const PointPattern& p);

// Number of unordered pairs i < j with |x_i - x_j| <= r.
std::size_t count_r_close_pairs(const PointPattern& p, double r);

}  // namespace ppnn
