#include "ppnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ppnn/spatial_index.hpp"
#include "ppnn/sumstats.hpp"

namespace ppnn {

// ---------------------------------------------------------------------------
// Nelder-Mead

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& opts) {
  const std::size_t d = start.size();
  if (d == 0) throw std::invalid_argument("nelder_mead: empty start");
  NelderMeadResult res;
  // Past the budget, trial points read as +infinity and are never accepted.
  auto eval = [&](const std::vector<double>& x) {
    if (res.evaluations >= opts.max_evals && res.evaluations > 0) return std::numeric_limits<double>::infinity();
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(d + 1, start);
  std::vector<double> values(d + 1);
  values[0] = eval(start);
  if (!std::isfinite(values[0])) throw std::invalid_argument("nelder_mead: objective not finite at start");
  for (std::size_t i = 0; i < d; ++i) {
    simplex[i + 1][i] += opts.initial_step;
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), trial(d), trial2(d);
  auto along = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
    for (std::size_t j = 0; j < d; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

    double f_spread = 0.0, x_spread = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      f_spread = std::max(f_spread, std::abs(values[i] - values[best]));
      for (std::size_t j = 0; j < d; ++j) x_spread = std::max(x_spread, std::abs(simplex[i][j] - simplex[best][j]));
    }
    if (f_spread <= opts.f_tol && x_spread <= opts.x_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opts.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j] / static_cast<double>(d);
    }

    along(-1.0, trial, simplex[worst]);
    const double fr = eval(trial);
    if (fr < values[best]) {
      along(-2.0, trial2, simplex[worst]);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    // Outside contraction when the reflection improved on the worst vertex.
    const bool outside = fr < values[worst];
    along(outside ? -0.5 : 0.5, trial2, simplex[worst]);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  res.x = simplex[best];
  res.value = values[best];
  return res;
}

// ---------------------------------------------------------------------------
// LGCP minimum contrast

namespace {

template <class F>
double simpson_step(const F& g, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // The absolute tolerance is relaxed to 1e-13 relative for huge integrands.
  const double bound = 15.0 * std::max(tol, 1e-13 * std::abs(left + right));
  if (depth <= 0 || std::abs(delta) <= bound || !std::isfinite(delta)) return left + right + delta / 15.0;
  return simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& g, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  if (!std::isfinite(whole)) return whole;
  return simpson_step(g, a, b, fa, fm, fb, whole, tol, 50);
}

void check_lgcp_params(double sigma2, double s) {
  if (!(sigma2 >= 0.0) || !(s > 0.0)) throw std::invalid_argument("lgcp K: need sigma2 >= 0 and s > 0");
}

// K(b) - K(a). The Poisson part pi (b^2 - a^2) is exact; the excess
// 2 pi t (exp(sigma2 exp(-t/s)) - 1) is concentrated within a few s of the
// origin, so it is integrated piecewise between breakpoints s, 2s, 4s, ...
// to keep narrow peaks from slipping between the initial Simpson nodes.
// Beyond 800 s, exp(-t/s) underflows and the excess is exactly zero.
double lgcp_K_increment(double a, double b, double sigma2, double s, double tol) {
  if (b <= a) return 0.0;
  const double poisson = std::numbers::pi * (b * b - a * a);
  if (sigma2 == 0.0) return poisson;
  const auto excess = [&](double t) { return 2.0 * std::numbers::pi * t * std::expm1(sigma2 * std::exp(-t / s)); };
  const double end = std::min(b, 800.0 * s);
  double total = 0.0, lo = a, edge = s;
  while (lo < end) {
    while (edge <= lo) edge *= 2.0;
    const double hi = std::min(edge, end);
    total += adaptive_simpson(excess, lo, hi, tol);
    lo = hi;
  }
  return poisson + total;
}

}  // namespace

double lgcp_theoretical_K(double r, double sigma2, double s, double tol) {
  if (!(r >= 0.0)) throw std::invalid_argument("lgcp_theoretical_K: r must be >= 0");
  check_lgcp_params(sigma2, s);
  return lgcp_K_increment(0.0, r, sigma2, s, tol);
}

std::vector<double> lgcp_theoretical_K(std::span<const double> r, double sigma2, double s, double tol) {
  check_lgcp_params(sigma2, s);
  std::vector<double> k(r.size());
  double prev = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= prev)) throw std::invalid_argument("lgcp_theoretical_K: grid must be nondecreasing and >= 0");
    acc += lgcp_K_increment(prev, r[i], sigma2, s, tol);
    k[i] = acc;
    prev = r[i];
  }
  return k;
}

double lgcp_contrast(std::span<const double> r, std::span<const double> k_hat, double sigma2, double s,
                     double exponent_p, double exponent_q) {
  if (r.size() != k_hat.size() || r.size() < 2) throw std::invalid_argument("lgcp_contrast: bad grid");
  const auto k = lgcp_theoretical_K(r, sigma2, s);
  double total = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = std::pow(std::abs(std::pow(k[i], exponent_q) - std::pow(std::max(k_hat[i], 0.0), exponent_q)),
                              exponent_p);
    if (i > 0) total += 0.5 * (d + prev) * (r[i] - r[i - 1]);
    prev = d;
  }
  return total;
}

MinContrastResult minimum_contrast_lgcp(const PointPattern& p, const MinContrastOptions& opts) {
  if (p.size() < 2) throw DegeneratePattern("minimum_contrast_lgcp: need at least two points");
  const Window& w = p.window();
  const double a2 = std::isnan(opts.a2) ? w.shorter_side() / 4.0 : opts.a2;
  if (!(opts.a1 >= 0.0) || !(a2 > opts.a1)) throw std::invalid_argument("minimum_contrast_lgcp: need 0 <= a1 < a2");
  if (opts.grid_size < 2) throw std::invalid_argument("minimum_contrast_lgcp: grid_size must be >= 2");

  std::vector<double> r(static_cast<std::size_t>(opts.grid_size));
  for (int i = 0; i < opts.grid_size; ++i)
    r[static_cast<std::size_t>(i)] = opts.a1 + (a2 - opts.a1) * i / (opts.grid_size - 1);
  const auto k_hat = estimate_K(p, r).values;

  const auto objective = [&](std::span<const double> x) {
    const double sigma2 = std::exp(x[0]), s = std::exp(x[1]);
    if (!(sigma2 > 0.0 && s > 0.0 && std::isfinite(sigma2) && std::isfinite(s)))
      return std::numeric_limits<double>::infinity();
    return lgcp_contrast(r, k_hat, sigma2, s, opts.exponent_p, opts.exponent_q);
  };

  // Coarse scan for a starting point, then two simplex runs.
  std::vector<double> start{0.0, std::log(a2 / 5.0)};
  double best = std::numeric_limits<double>::infinity();
  int scan_evals = 0;
  for (double ls2 : {-3.0, -1.5, -0.5, 0.0, 0.5, 1.0, 1.5}) {
    for (double frac : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0}) {
      const std::vector<double> x{ls2, std::log(a2 * frac)};
      const double v = objective(x);
      ++scan_evals;
      if (v < best) {
        best = v;
        start = x;
      }
    }
  }
  NelderMeadResult nm = nelder_mead(objective, start, opts.optimizer);
  const int first_evals = nm.evaluations;
  nm = nelder_mead(objective, nm.x, opts.optimizer);

  MinContrastResult res;
  res.sigma2 = std::exp(nm.x[0]);
  // When s has shrunk below the grid resolution the contrast no longer
  // depends on sigma2; report the Poisson limit sigma2 = 0 in that case.
  if (lgcp_contrast(r, k_hat, 0.0, std::exp(nm.x[1]), opts.exponent_p, opts.exponent_q) <= nm.value) res.sigma2 = 0.0;
  res.s = std::exp(nm.x[1]);
  res.mu = std::log(static_cast<double>(p.size()) / w.area()) - res.sigma2 / 2.0;
  res.contrast = nm.value;
  res.evaluations = scan_evals + first_evals + nm.evaluations;
  res.converged = nm.converged;
  return res;
}

// ---------------------------------------------------------------------------
// Strauss pseudo-likelihood

StraussPlTerms strauss_pl_terms(const PointPattern& p, double R, const Window& region, int grid) {
  if (!(R >= 0.0)) throw std::invalid_argument("strauss_pl_terms: R must be >= 0");
  if (grid < 1) throw std::invalid_argument("strauss_pl_terms: grid must be >= 1");
  StraussPlTerms t;
  t.R = R;
  t.region = region;

  const PointGrid index(p, std::max(R, p.window().shorter_side() / 256.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!region.contains(p[i])) continue;
    ++t.n_region;
    t.close_pairs += static_cast<double>(index.count_within(p[i], R, i));
  }

  // Rasterize each disc of radius R onto the lattice of cell centres.
  const double dx = region.width() / grid, dy = region.height() / grid;
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(grid) * grid, 0);
  const double r2 = R * R;
  for (const Point& x : p.points()) {
    const int iy0 = std::max(0, static_cast<int>(std::ceil((x.y - R - region.y_min()) / dy - 0.5)));
    const int iy1 = std::min(grid - 1, static_cast<int>(std::floor((x.y + R - region.y_min()) / dy - 0.5)));
    for (int iy = iy0; iy <= iy1; ++iy) {
      const double cy = region.y_min() + (iy + 0.5) * dy;
      const double rem = r2 - (cy - x.y) * (cy - x.y);
      if (rem < 0.0) continue;
      const double h = std::sqrt(rem);
      const int ix0 = std::max(0, static_cast<int>(std::ceil((x.x - h - region.x_min()) / dx - 0.5)));
      const int ix1 = std::min(grid - 1, static_cast<int>(std::floor((x.x + h - region.x_min()) / dx - 0.5)));
      auto* row = counts.data() + static_cast<std::size_t>(iy) * grid;
      for (int ix = ix0; ix <= ix1; ++ix) ++row[ix];
    }
  }
  const std::uint32_t kmax = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  t.area_by_count.assign(kmax + 1, 0.0);
  const double cell = dx * dy;
  for (std::uint32_t c : counts) t.area_by_count[c] += cell;
  return t;
}

double pseudo_loglik_strauss(const StraussPlTerms& t, double log_beta, double log_gamma) {
  if (std::isinf(log_gamma) && log_gamma < 0.0 && t.close_pairs > 0.0)
    return -std::numeric_limits<double>::infinity();
  double integral = 0.0;
  for (std::size_t k = 0; k < t.area_by_count.size(); ++k) {
    const double g = k == 0 ? 1.0 : std::exp(log_gamma * static_cast<double>(k));
    integral += g * t.area_by_count[k];
  }
  double value = -std::exp(log_beta) * integral;
  if (t.n_region > 0) value += static_cast<double>(t.n_region) * log_beta;
  if (t.close_pairs > 0.0) value += t.close_pairs * log_gamma;
  return value;
}

double pseudo_loglik_strauss(const PointPattern& p, double R, double log_beta, double log_gamma, int grid) {
  return pseudo_loglik_strauss(strauss_pl_terms(p, R, p.window().erode(R), grid), log_beta, log_gamma);
}

namespace {

// Moments of k under weights gamma^k area_k, with gamma = exp(b).
struct CountMoments {
  double log_s0 = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

CountMoments count_moments(const std::vector<double>& area, double b) {
  std::size_t kmin = 0;
  while (kmin < area.size() && area[kmin] <= 0.0) ++kmin;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k = kmin; k < area.size(); ++k) {
    if (area[k] <= 0.0) continue;
    const double kk = static_cast<double>(k);
    const double w = std::exp(b * (kk - static_cast<double>(kmin))) * area[k];
    s0 += w;
    s1 += kk * w;
    s2 += kk * kk * w;
  }
  CountMoments m;
  m.log_s0 = std::log(s0) + b * static_cast<double>(kmin);
  m.mean = s1 / s0;
  m.var = std::max(0.0, s2 / s0 - m.mean * m.mean);
  return m;
}

}  // namespace

StraussMple mple_strauss(const StraussPlTerms& t) {
  StraussMple res;
  res.R = t.R;
  const double n = static_cast<double>(t.n_region);
  if (t.n_region == 0) {
    res.beta = 0.0;
    res.gamma = 1.0;
    res.log_pl = 0.0;
    return res;
  }

  // Profile derivative in b = log gamma with log beta at its optimum.
  const auto score = [&](double b) { return t.close_pairs - n * count_moments(t.area_by_count, b).mean; };
  auto finish = [&](double b) {
    const auto m = count_moments(t.area_by_count, b);
    const double a = std::log(n) - m.log_s0;
    res.beta = std::exp(a);
    res.gamma = std::exp(b);
    res.log_pl = pseudo_loglik_strauss(t, a, b);
    res.grad_log_beta = 0.0;
    res.grad_log_gamma = t.close_pairs - n * m.mean;
  };

  const double at_one = score(0.0);
  if (at_one >= 0.0) {
    res.gamma_clamped = at_one > 0.0;
    finish(0.0);
    return res;
  }

  if (t.close_pairs <= 0.0) {
    const double a0 = t.area_by_count.empty() ? 0.0 : t.area_by_count[0];
    res.gamma = 0.0;
    if (a0 > 0.0) {
      res.beta = n / a0;
      res.log_pl = n * std::log(res.beta) - n;
    } else {
      // Every location is within R of a point: the supremum is unbounded.
      res.beta = n / t.area();
      res.log_pl = pseudo_loglik_strauss(t, std::log(res.beta), -std::numeric_limits<double>::infinity());
      res.converged = false;
    }
    return res;
  }

  constexpr double kFloor = -60.0;
  double hi = 0.0, lo = -1.0;
  while (score(lo) <= 0.0) {
    hi = lo;
    lo *= 2.0;
    if (lo < kFloor) {
      res.converged = false;
      finish(kFloor);
      return res;
    }
  }

  double b = 0.5 * (lo + hi);
  const double tol = 1e-12 * std::max(1.0, t.close_pairs);
  bool done = false;
  for (int it = 0; it < 200 && !done; ++it) {
    const auto m = count_moments(t.area_by_count, b);
    const double g = t.close_pairs - n * m.mean;
    if (std::abs(g) <= tol) {
      done = true;
      break;
    }
    if (g > 0.0) lo = b; else hi = b;
    const double curvature = n * m.var;
    double next = curvature > 0.0 ? b + g / curvature : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-14) done = true;
    b = next;
  }
  res.converged = done;
  finish(b);
  return res;
}

StraussMple mple_strauss_given_R(const PointPattern& p, double R, int grid) {
  return mple_strauss(strauss_pl_terms(p, R, p.window().erode(R), grid));
}

std::vector<double> default_strauss_r_grid() {
  std::vector<double> r(50);
  for (int i = 0; i < 50; ++i) r[static_cast<std::size_t>(i)] = 0.001 + (0.05 - 0.001) * i / 49.0;
  return r;
}

ProfileMpleResult profile_mple_strauss(const PointPattern& p, std::span<const double> R_grid, int grid) {
  if (R_grid.empty()) throw std::invalid_argument("profile_mple_strauss: empty R grid");
  const double rmax = *std::max_element(R_grid.begin(), R_grid.end());
  const Window region = p.window().erode(rmax);

  ProfileMpleResult res;
  res.R_grid.assign(R_grid.begin(), R_grid.end());
  double best = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (double R : R_grid) {
    const StraussMple fit = mple_strauss(strauss_pl_terms(p, R, region, grid));
    res.pl_values.push_back(fit.log_pl);
    const bool better = !have || fit.log_pl > best || (fit.log_pl == best && R < res.R);
    if (better) {
      have = true;
      best = fit.log_pl;
      res.beta = fit.beta;
      res.gamma = fit.gamma;
      res.R = R;
      res.converged = fit.converged;
    }
  }
  return res;
}

}  // namespace ppnn
