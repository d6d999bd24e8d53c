#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ppnn/geometry.hpp"

namespace ppnn {

enum class StatKind { K, LCentered, F, G, J };

std::string_view to_string(StatKind kind);
// Accepts K, L, F, G, J (case-insensitive).
StatKind parse_stat_kind(std::string_view name);

// Thrown when a statistic is requested for a pattern with too few points.
struct DegeneratePattern : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SummaryCurve {
  StatKind kind = StatKind::K;
  std::vector<double> r;
  std::vector<double> values;
  // Closed interval [valid_min, valid_max] where the estimate is reliable.
  double valid_min = 0.0;
  double valid_max = 0.0;
  // Set on zero curves substituted for patterns with fewer than two points.
  bool degenerate = false;

  std::size_t size() const { return r.size(); }
  bool valid_at(std::size_t i) const;
};

inline constexpr int kDefaultCurveLength = 513;
inline constexpr int kDefaultEmptySpaceGrid = 128;
inline constexpr double kJValidityEpsilon = 1e-9;

// m equally spaced values on [0, shorter side / 4].
std::vector<double> default_r_grid(const Window& w, int m = kDefaultCurveLength);

// Upper end of the recommended range for F, G and J: the smaller of a
// quarter of the shorter side and the distance at which the Poisson
// empty-space function with the given intensity reaches 3/4.
double recommended_rmax_nearest_neighbour(const Window& w, double intensity);
std::vector<double> nearest_neighbour_r_grid(const Window& w, double intensity,
                                             int m = kDefaultCurveLength);

// Ripley's isotropic correction: reciprocal of the fraction of the circle
// of radius d centred at `centre` that lies inside w.
double isotropic_weight(Point centre, double d, const Window& w);
double isotropic_weight(Point xi, Point xj, const Window& w);

// K(r) = |W| / (n(n-1)) sum_{i != j} 1[d_ij <= r] e_ij. Requires n >= 2.
SummaryCurve estimate_K(const PointPattern& p, std::span<const double> r);
// sqrt(K(r) / pi) - r. Requires n >= 2.
SummaryCurve estimate_L_centered(const PointPattern& p, std::span<const double> r);
// As estimate_L_centered, but a pattern with n < 2 yields a zero curve with
// the degenerate flag set instead of throwing.
SummaryCurve centered_L_or_zero(const PointPattern& p, std::span<const double> r);

// Kaplan-Meier estimators with censoring at the distance to the boundary.
// F uses empty-space distances from a grid x grid lattice of cell centres.
SummaryCurve estimate_F(const PointPattern& p, std::span<const double> r,
                        int grid = kDefaultEmptySpaceGrid);
SummaryCurve estimate_G(const PointPattern& p, std::span<const double> r);
// (1 - G) / (1 - F) where F < 1 - 1e-9; NaN elsewhere.
SummaryCurve estimate_J(const PointPattern& p, std::span<const double> r,
                        int grid = kDefaultEmptySpaceGrid);

SummaryCurve estimate_statistic(StatKind kind, const PointPattern& p, std::span<const double> r);

// Kaplan-Meier distribution function 1 - S(r) evaluated on an increasing
// grid from right-censored observations (time, event).
std::vector<double> kaplan_meier_cdf(std::span<const double> times, std::span<const char> events,
                                     std::span<const double> r);

}  // namespace ppnn
