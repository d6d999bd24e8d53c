#include "ppnn/sumstats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ppnn/spatial_index.hpp"

namespace ppnn {

std::string_view to_string(StatKind kind) {
  switch (kind) {
    case StatKind::K: return "K";
    case StatKind::LCentered: return "L";
    case StatKind::F: return "F";
    case StatKind::G: return "G";
    case StatKind::J: return "J";
  }
  return "?";
}

StatKind parse_stat_kind(std::string_view name) {
  if (name.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(name[0]))) {
      case 'K': return StatKind::K;
      case 'L': return StatKind::LCentered;
      case 'F': return StatKind::F;
      case 'G': return StatKind::G;
      case 'J': return StatKind::J;
      default: break;
    }
  }
  throw std::invalid_argument("unknown statistic '" + std::string(name) + "'");
}

bool SummaryCurve::valid_at(std::size_t i) const {
  return std::isfinite(values[i]) && r[i] >= valid_min && r[i] <= valid_max;
}

namespace {

void check_grid(std::span<const double> r) {
  if (r.empty()) throw std::invalid_argument("r grid is empty");
  if (!(r.front() >= 0.0)) throw std::invalid_argument("r grid must start at r >= 0");
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) throw std::invalid_argument("r grid must be strictly increasing");
  }
}

SummaryCurve make_curve(StatKind kind, std::span<const double> r) {
  SummaryCurve c;
  c.kind = kind;
  c.r.assign(r.begin(), r.end());
  c.values.assign(r.size(), 0.0);
  c.valid_min = r.front();
  c.valid_max = r.back();
  return c;
}

}  // namespace

std::vector<double> default_r_grid(const Window& w, int m) {
  if (m < 2) throw std::invalid_argument("default_r_grid: need at least 2 values");
  const double rmax = w.shorter_side() / 4.0;
  std::vector<double> r(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = rmax * i / (m - 1);
  return r;
}

double recommended_rmax_nearest_neighbour(const Window& w, double intensity) {
  const double quarter = w.shorter_side() / 4.0;
  if (!(intensity > 0.0)) return quarter;
  return std::min(quarter, std::sqrt(std::log(4.0) / (std::numbers::pi * intensity)));
}

std::vector<double> nearest_neighbour_r_grid(const Window& w, double intensity, int m) {
  if (m < 2) throw std::invalid_argument("nearest_neighbour_r_grid: need at least 2 values");
  const double rmax = recommended_rmax_nearest_neighbour(w, intensity);
  std::vector<double> r(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = rmax * i / (m - 1);
  return r;
}

double isotropic_weight(Point centre, double d, const Window& w) {
  const double e[4] = {centre.x - w.x_min(), w.x_max() - centre.x, centre.y - w.y_min(),
                       w.y_max() - centre.y};
  if (d <= std::min({e[0], e[1], e[2], e[3]})) return 1.0;

  // Half-angle of the arc cut off by each edge.
  double a[4];
  for (int k = 0; k < 4; ++k) a[k] = e[k] < d ? std::acos(std::max(e[k], 0.0) / d) : 0.0;

  double excluded = 2.0 * (a[0] + a[1] + a[2] + a[3]);
  // Arcs of perpendicular edges overlap when the shared corner is within d.
  constexpr double half_pi = std::numbers::pi / 2.0;
  const int corners[4][2] = {{0, 2}, {0, 3}, {1, 2}, {1, 3}};
  for (const auto& c : corners) {
    excluded -= std::max(0.0, a[c[0]] + a[c[1]] - half_pi);
  }
  const double inside = 1.0 - excluded / (2.0 * std::numbers::pi);
  return 1.0 / std::max(inside, 1e-12);
}

double isotropic_weight(Point xi, Point xj, const Window& w) {
  return isotropic_weight(xi, distance(xi, xj), w);
}

SummaryCurve estimate_K(const PointPattern& p, std::span<const double> r) {
  check_grid(r);
  const std::size_t n = p.size();
  if (n < 2) throw DegeneratePattern("estimate_K: need at least two points");
  const Window& w = p.window();
  SummaryCurve c = make_curve(StatKind::K, r);

  const double rmax = r.back();
  std::vector<double> increments(r.size(), 0.0);
  const PointGrid grid(p, std::max(rmax, w.shorter_side() / 256.0));
  for (std::size_t i = 0; i < n; ++i) {
    const Point xi = p[i];
    grid.for_each_within(xi, rmax, [&](std::size_t j, double d2) {
      if (j <= i) return;
      const double d = std::sqrt(d2);
      const auto k = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), d) - r.begin());
      if (k == r.size()) return;
      increments[k] += isotropic_weight(xi, d, w) + isotropic_weight(p[j], d, w);
    });
  }

  const double scale = w.area() / (static_cast<double>(n) * static_cast<double>(n - 1));
  double cumulative = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    cumulative += increments[k];
    c.values[k] = scale * cumulative;
  }
  return c;
}

SummaryCurve estimate_L_centered(const PointPattern& p, std::span<const double> r) {
  SummaryCurve c = estimate_K(p, r);
  c.kind = StatKind::LCentered;
  for (std::size_t k = 0; k < c.size(); ++k) {
    c.values[k] = std::sqrt(c.values[k] / std::numbers::pi) - c.r[k];
  }
  return c;
}

SummaryCurve centered_L_or_zero(const PointPattern& p, std::span<const double> r) {
  if (p.size() >= 2) return estimate_L_centered(p, r);
  check_grid(r);
  SummaryCurve c = make_curve(StatKind::LCentered, r);
  c.degenerate = true;
  return c;
}

std::vector<double> kaplan_meier_cdf(std::span<const double> times, std::span<const char> events,
                                     std::span<const double> r) {
  if (times.size() != events.size()) throw std::invalid_argument("kaplan_meier_cdf: size mismatch");
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] < times[b];
    return events[a] > events[b];
  });

  std::vector<double> out(r.size(), 0.0);
  double survival = 1.0;
  double at_risk = static_cast<double>(times.size());
  std::size_t pos = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    while (pos < order.size() && times[order[pos]] <= r[k]) {
      const double t = times[order[pos]];
      double deaths = 0.0, leaving = 0.0;
      while (pos < order.size() && times[order[pos]] == t) {
        deaths += events[order[pos]] ? 1.0 : 0.0;
        leaving += 1.0;
        ++pos;
      }
      if (deaths > 0.0) survival *= 1.0 - deaths / at_risk;
      at_risk -= leaving;
    }
    out[k] = 1.0 - survival;
  }
  return out;
}

namespace {

// KM on (min(d, b), d <= b); once r reaches the largest raw distance every
// sampled location is covered, so the estimate is set to 1 there.
std::vector<double> censored_cdf(const std::vector<double>& dist, const std::vector<double>& bdry,
                                 std::span<const double> r) {
  std::vector<double> times(dist.size());
  std::vector<char> events(dist.size());
  double largest = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    times[i] = std::min(dist[i], bdry[i]);
    events[i] = dist[i] <= bdry[i] ? 1 : 0;
    largest = std::max(largest, dist[i]);
  }
  auto cdf = kaplan_meier_cdf(times, events, r);
  if (std::isfinite(largest)) {
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r[k] >= largest) cdf[k] = 1.0;
  }
  return cdf;
}

}  // namespace

SummaryCurve estimate_F(const PointPattern& p, std::span<const double> r, int grid) {
  check_grid(r);
  if (p.empty()) throw DegeneratePattern("estimate_F: empty-space distance to an empty pattern");
  if (grid < 1) throw std::invalid_argument("estimate_F: grid must be >= 1");
  const Window& w = p.window();
  SummaryCurve c = make_curve(StatKind::F, r);

  const double cell = std::sqrt(2.0 * w.area() / static_cast<double>(p.size()));
  const PointGrid index(p, cell);
  const std::size_t count = static_cast<std::size_t>(grid) * grid;
  std::vector<double> dist(count), bdry(count);
  const double dx = w.width() / grid, dy = w.height() / grid;
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      const Point u{w.x_min() + (ix + 0.5) * dx, w.y_min() + (iy + 0.5) * dy};
      const auto k = static_cast<std::size_t>(iy) * grid + ix;
      dist[k] = index.nearest_distance(u);
      bdry[k] = distance_to_boundary(u, w);
    }
  }
  c.values = censored_cdf(dist, bdry, r);
  return c;
}

SummaryCurve estimate_G(const PointPattern& p, std::span<const double> r) {
  check_grid(r);
  if (p.empty()) throw DegeneratePattern("estimate_G: undefined for an empty pattern");
  const Window& w = p.window();
  SummaryCurve c = make_curve(StatKind::G, r);

  const double cell = std::sqrt(2.0 * w.area() / static_cast<double>(p.size()));
  const PointGrid index(p, cell);
  std::vector<double> dist(p.size()), bdry(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    dist[i] = index.nearest_distance(p[i], i);
    bdry[i] = distance_to_boundary(p[i], w);
  }
  c.values = censored_cdf(dist, bdry, r);
  return c;
}

SummaryCurve estimate_J(const PointPattern& p, std::span<const double> r, int grid) {
  const SummaryCurve f = estimate_F(p, r, grid);
  const SummaryCurve g = estimate_G(p, r);
  SummaryCurve c = make_curve(StatKind::J, r);
  c.valid_max = c.r.front();
  bool in_range = true;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double one_minus_f = 1.0 - f.values[k];
    if (one_minus_f > kJValidityEpsilon) {
      c.values[k] = (1.0 - g.values[k]) / one_minus_f;
      if (in_range) c.valid_max = c.r[k];
    } else {
      c.values[k] = std::numeric_limits<double>::quiet_NaN();
      in_range = false;
    }
  }
  if (!std::isfinite(c.values.front())) {
    // F(r_0) already at 1: no usable range.
    c.valid_min = 1.0;
    c.valid_max = 0.0;
  }
  return c;
}

SummaryCurve estimate_statistic(StatKind kind, const PointPattern& p, std::span<const double> r) {
  switch (kind) {
    case StatKind::K: return estimate_K(p, r);
    case StatKind::LCentered: return estimate_L_centered(p, r);
    case StatKind::F: return estimate_F(p, r);
    case StatKind::G: return estimate_G(p, r);
    case StatKind::J: return estimate_J(p, r);
  }
  throw std::invalid_argument("estimate_statistic: bad kind");
}

}  // namespace ppnn
