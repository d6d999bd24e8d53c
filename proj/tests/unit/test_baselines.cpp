#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ppnn/baselines.hpp"
#include "ppnn/simulate.hpp"
#include "ppnn/sumstats.hpp"

using namespace ppnn;

namespace {

// Plain Poisson log-PL on A: n_A log beta - beta |A|.
double poisson_log_pl(std::size_t n_a, double area, double beta) {
  return static_cast<double>(n_a) * std::log(beta) - beta * area;
}

double log_pl_at(const StraussPlTerms& t, double lb, double lg) { return pseudo_loglik_strauss(t, lb, lg); }

}  // namespace

TEST(NelderMead, Quadratic) {
  int calls = 0;
  const auto res = nelder_mead(
      [&](std::span<const double> x) {
        ++calls;
        return (x[0] - 2) * (x[0] - 2) + (x[1] + 1) * (x[1] + 1);
      },
      {0.0, 0.0});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 2.0, 1e-5);
  EXPECT_NEAR(res.x[1], -1.0, 1e-5);
  EXPECT_EQ(res.evaluations, calls);
}

TEST(NelderMead, Rosenbrock) {
  const auto rosen = [](std::span<const double> x) {
    return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
  };
  const auto res = nelder_mead(rosen, {-1.2, 1.0});
  EXPECT_LT(res.value, 1e-6);
  EXPECT_NEAR(res.x[0], 1.0, 1e-3);
  EXPECT_NEAR(res.x[1], 1.0, 1e-3);
}

TEST(NelderMead, EvaluationBudgetAndBadStart) {
  NelderMeadOptions o;
  o.max_evals = 37;
  int calls = 0;
  const auto res = nelder_mead(
      [&](std::span<const double> x) {
        ++calls;
        return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
      },
      {-1.2, 1.0}, o);
  EXPECT_LE(res.evaluations, 37);
  EXPECT_LE(calls, 37);
  EXPECT_FALSE(res.converged);
  EXPECT_THROW(nelder_mead([](std::span<const double>) { return std::nan(""); }, {0.0}), std::invalid_argument);
}

TEST(NelderMead, NonFiniteRegionsAreAvoided) {
  const auto res = nelder_mead(
      [](std::span<const double> x) { return x[0] < 0 ? std::numeric_limits<double>::infinity() : (x[0] - 1) * (x[0] - 1); },
      {3.0});
  EXPECT_NEAR(res.x[0], 1.0, 1e-5);
}

TEST(TheoreticalK, PoissonCollapse) {
  for (double r : {0.0, 0.01, 0.1, 0.25, 3.0})
    EXPECT_NEAR(lgcp_theoretical_K(r, 0.0, 0.05), std::numbers::pi * r * r, 1e-9 * (1 + r * r));
}

TEST(TheoreticalK, MatchesMidpointOracle) {
  const double want = oracle::lgcp_k_midpoint(0.1, 1.0, 0.05, 1'000'000);
  EXPECT_NEAR(lgcp_theoretical_K(0.1, 1.0, 0.05), want, 1e-6 * want);
  for (auto [r, s2, s] : {std::tuple{0.25, 4.0, 0.001}, std::tuple{0.05, 0.3, 0.1}, std::tuple{20.0, 0.32, 10.93}}) {
    const double w = oracle::lgcp_k_midpoint(r, s2, s, 1'000'000);
    EXPECT_NEAR(lgcp_theoretical_K(r, s2, s), w, 1e-6 * w) << r << ' ' << s2 << ' ' << s;
  }
}

TEST(TheoreticalK, OrderingProperties) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const double s2 = uniform(rng, 0.01, 4), s = uniform(rng, 0.001, 0.1);
    const auto r = default_r_grid(Window::unit_square(), 65);
    const auto k = lgcp_theoretical_K(r, s2, s);
    const auto k_more = lgcp_theoretical_K(r, s2 * 1.5, s);
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_GE(k[i], std::numbers::pi * r[i] * r[i] * (1 - 1e-12));
      if (i > 0) {
        EXPECT_GE(k[i], k[i - 1]);
        EXPECT_GT(k_more[i], k[i]);
      }
      EXPECT_NEAR(k[i], lgcp_theoretical_K(r[i], s2, s), 1e-9 * (1 + k[i]));
    }
  }
}

TEST(Contrast, ZeroAtTheoreticalCurve) {
  const auto r = default_r_grid(Window::unit_square());
  const auto k = lgcp_theoretical_K(r, 1.3, 0.04);
  EXPECT_NEAR(lgcp_contrast(r, k, 1.3, 0.04), 0.0, 1e-18);
  EXPECT_GT(lgcp_contrast(r, k, 1.0, 0.04), 0.0);
}

TEST(MinContrast, PoissonCollapseOnAverage) {
  const int reps = 100;
  double mu = 0, s2 = 0;
  for (int i = 0; i < reps; ++i) {
    Rng g = substream(41, static_cast<std::uint64_t>(i));
    const auto x = sample_poisson(Window::unit_square(), std::exp(5.0), g);
    const auto f = minimum_contrast_lgcp(x);
    mu += f.mu / reps;
    s2 += f.sigma2 / reps;
  }
  // Near means within a tenth of the study's prior range width (2 for mu,
  // 4 for sigma2). Sampling noise in K-hat can only push sigma2 upward.
  EXPECT_NEAR(mu, 5.0, 0.2);
  EXPECT_LT(s2, 0.4);
}

TEST(MinContrast, OptimumBeatsRandomProbes) {
  Rng rng(2);
  const auto x = sample_lgcp(Window::unit_square(), {5, 1.5, 0.03}, 128, rng);
  const auto f = minimum_contrast_lgcp(x);
  const auto r = default_r_grid(x.window());
  const auto k = estimate_K(x, r);
  const double at = lgcp_contrast(r, k.values, f.sigma2, f.s);
  EXPECT_NEAR(at, f.contrast, 1e-12 * (1 + at));
  EXPECT_NEAR(f.mu, std::log(static_cast<double>(x.size())) - f.sigma2 / 2, 1e-12);
  for (int t = 0; t < 20; ++t) {
    const double ls2 = std::log(f.sigma2) + uniform(rng, -1, 1), ls = std::log(f.s) + uniform(rng, -1, 1);
    EXPECT_LE(f.contrast, lgcp_contrast(r, k.values, std::exp(ls2), std::exp(ls)));
  }
}

TEST(PseudoLikelihood, UnitGammaIsPoisson) {
  Rng rng(3);
  const auto x = sample_strauss(Window::unit_square(), {300, 0.4, 0.03}, rng);
  const auto t = strauss_pl_terms(x, 0.03, Window::unit_square().erode(0.03));
  for (double beta : {100.0, 250.0, 400.0})
    EXPECT_NEAR(log_pl_at(t, std::log(beta), 0.0), poisson_log_pl(t.n_region, t.area(), beta), 1e-9 * beta);
  // Maximized at n_A / |A| along gamma = 1.
  const double b = static_cast<double>(t.n_region) / t.area();
  EXPECT_GT(log_pl_at(t, std::log(b), 0.0), log_pl_at(t, std::log(b * 1.01), 0.0));
  EXPECT_GT(log_pl_at(t, std::log(b), 0.0), log_pl_at(t, std::log(b * 0.99), 0.0));
}

TEST(PseudoLikelihood, EmptyPattern) {
  const PointPattern empty(Window::unit_square());
  const double a = Window::unit_square().erode(0.02).area();
  EXPECT_NEAR(pseudo_loglik_strauss(empty, 0.02, std::log(50.0), std::log(0.3)), -50.0 * a, 1e-9);
  EXPECT_NEAR(pseudo_loglik_strauss(empty, 0.02, std::log(50.0), -std::numeric_limits<double>::infinity()), -50.0 * a,
              1e-9);
}

TEST(PseudoLikelihood, HardCoreViolationIsMinusInfinity) {
  const PointPattern p({{0.5, 0.5}, {0.51, 0.5}}, Window::unit_square());
  EXPECT_EQ(pseudo_loglik_strauss(p, 0.05, 1.0, -std::numeric_limits<double>::infinity()),
            -std::numeric_limits<double>::infinity());
}

TEST(PseudoLikelihood, GridRefinementAgreesToThreeDecimals) {
  Rng rng(4);
  const auto x = oracle::uniform_pattern(10, Window::unit_square(), rng);
  for (double R : {0.05, 0.1, 0.2}) {
    const double coarse = pseudo_loglik_strauss(x, R, std::log(10.0), std::log(0.5), 256);
    const double fine = pseudo_loglik_strauss(x, R, std::log(10.0), std::log(0.5), 512);
    EXPECT_NEAR(coarse, fine, 1e-3) << R;
  }
}

TEST(PseudoLikelihood, AreasPartitionRegion) {
  Rng rng(5);
  const auto x = oracle::uniform_pattern(60, Window::unit_square(), rng);
  const auto t = strauss_pl_terms(x, 0.08, Window::unit_square().erode(0.08));
  double total = 0;
  for (double a : t.area_by_count) total += a;
  EXPECT_NEAR(total, t.area(), 1e-12);
}

TEST(PseudoLikelihood, ConcaveAlongSegments) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::uniform_pattern(20 + static_cast<std::size_t>(uniform(rng, 0, 80)), Window::unit_square(), rng);
    const auto terms = strauss_pl_terms(x, uniform(rng, 0.01, 0.1), Window::unit_square().erode(0.1));
    for (int k = 0; k < 10; ++k) {
      const double b0 = uniform(rng, 1, 7), g0 = uniform(rng, -4, 1), b1 = uniform(rng, 1, 7), g1 = uniform(rng, -4, 1);
      const double mid = log_pl_at(terms, (b0 + b1) / 2, (g0 + g1) / 2);
      const double avg = (log_pl_at(terms, b0, g0) + log_pl_at(terms, b1, g1)) / 2;
      EXPECT_GE(mid, avg - 1e-9 * (1 + std::abs(avg)));
    }
  }
}

TEST(Mple, PoissonDataClampsGamma) {
  // Clamped fits are the Poisson MLE n_A / |A|; unclamped fits with gamma
  // below one push beta upward, so the average is only approximately 500.
  const int reps = 60;
  double beta = 0, gamma = 0;
  int clamped = 0;
  std::vector<double> mle;
  for (int i = 0; i < reps; ++i) {
    Rng g = substream(43, static_cast<std::uint64_t>(i));
    const auto x = sample_poisson(Window::unit_square(), 500, g);
    const auto t = strauss_pl_terms(x, 0.03, x.window().erode(0.03));
    const auto f = mple_strauss(t);
    const double poisson_mle = static_cast<double>(t.n_region) / t.area();
    EXPECT_LE(f.gamma, 1.0);
    if (f.gamma_clamped) {
      EXPECT_EQ(f.gamma, 1.0);
      EXPECT_NEAR(f.beta, poisson_mle, 1e-9 * poisson_mle);
      ++clamped;
    } else {
      EXPECT_GE(f.beta, poisson_mle * (1 - 1e-9));
    }
    mle.push_back(poisson_mle);
    beta += f.beta / reps;
    gamma += f.gamma / reps;
  }
  const auto m = oracle::mean_se(mle);
  EXPECT_NEAR(m.mean, 500, 4 * m.se);
  EXPECT_NEAR(beta, 500, 0.1 * 500);
  EXPECT_GT(gamma, 0.9);
  EXPECT_GT(clamped, reps / 5);
}

TEST(Mple, InteriorOptimumIsStationary) {
  Rng rng(7);
  const auto x = sample_strauss(Window::unit_square(), {500, 0.3, 0.03}, rng);
  const auto f = mple_strauss_given_R(x, 0.03);
  ASSERT_FALSE(f.gamma_clamped);
  ASSERT_GT(f.gamma, 0.0);
  EXPECT_LT(std::hypot(f.grad_log_beta, f.grad_log_gamma), 1e-6);
  // Finite differences agree with the reported gradient being zero.
  const auto t = strauss_pl_terms(x, 0.03, x.window().erode(0.03));
  const double h = 1e-5, lb = std::log(f.beta), lg = std::log(f.gamma);
  EXPECT_NEAR((log_pl_at(t, lb + h, lg) - log_pl_at(t, lb - h, lg)) / (2 * h), 0.0, 1e-3);
  EXPECT_NEAR((log_pl_at(t, lb, lg + h) - log_pl_at(t, lb, lg - h)) / (2 * h), 0.0, 1e-3);
  EXPECT_NEAR(f.log_pl, log_pl_at(t, lb, lg), 1e-9 * std::abs(f.log_pl));
}

TEST(Mple, HardCoreRecovery) {
  double gamma = 0;
  const int reps = 10;
  for (int i = 0; i < reps; ++i) {
    Rng g = substream(44, static_cast<std::uint64_t>(i));
    const auto x = sample_strauss(Window::unit_square(), {500, 0.0, 0.03}, g);
    gamma += mple_strauss_given_R(x, 0.03).gamma / reps;
  }
  EXPECT_LT(gamma, 0.05);
}

TEST(ProfileMple, DefaultGrid) {
  const auto g = default_strauss_r_grid();
  ASSERT_EQ(g.size(), 50u);
  EXPECT_DOUBLE_EQ(g.front(), 0.001);
  EXPECT_DOUBLE_EQ(g.back(), 0.05);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] - g[i - 1], 0.049 / 49, 1e-15);
}

TEST(ProfileMple, ExhaustiveAndRestrictedToGrid) {
  Rng rng(8);
  const auto x = sample_strauss(Window::unit_square(), {400, 0.3, 0.03}, rng);
  const std::vector<double> grid{0.01, 0.02, 0.03, 0.04};
  const auto res = profile_mple_strauss(x, grid, 256);
  ASSERT_EQ(res.pl_values.size(), grid.size());
  const auto best = std::max_element(res.pl_values.begin(), res.pl_values.end());
  EXPECT_EQ(res.R, grid[static_cast<std::size_t>(best - res.pl_values.begin())]);
  EXPECT_GE(res.gamma, 0.0);
  EXPECT_LE(res.gamma, 1.0);
  // Each entry is the per-R maximum on the common region.
  const Window common = x.window().erode(0.04);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto fit = mple_strauss(strauss_pl_terms(x, grid[i], common, 256));
    EXPECT_NEAR(res.pl_values[i], fit.log_pl, 1e-9 * std::abs(fit.log_pl));
  }
}

TEST(ProfileMple, RecoversInteractionRadius) {
  const auto grid = default_strauss_r_grid();
  const double step = grid[1] - grid[0];
  const int reps = 50;
  int hits = 0;
  for (int i = 0; i < reps; ++i) {
    Rng g = substream(45, static_cast<std::uint64_t>(i));
    const auto x = sample_strauss(Window::unit_square(), {500, 0.3, 0.03}, g);
    const auto res = profile_mple_strauss(x, grid);
    EXPECT_TRUE(std::find(grid.begin(), grid.end(), res.R) != grid.end());
    hits += std::abs(res.R - 0.03) <= step + 1e-12;
  }
  EXPECT_GT(hits, reps / 2);
}
