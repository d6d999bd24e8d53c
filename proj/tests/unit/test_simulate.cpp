#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ppnn/model.hpp"
#include "ppnn/simulate.hpp"
#include "ppnn/sumstats.hpp"

using namespace ppnn;

namespace {

std::vector<double> counts_of(int draws, const std::function<PointPattern(Rng&)>& sample, std::uint64_t seed) {
  std::vector<double> out;
  for (int i = 0; i < draws; ++i) {
    Rng g = substream(seed, static_cast<std::uint64_t>(i));
    out.push_back(static_cast<double>(sample(g).size()));
  }
  return out;
}

}  // namespace

TEST(Grf, ZeroVarianceIsConstant) {
  Rng rng(1);
  for (auto method : {FieldMethod::Circulant, FieldMethod::Cholesky}) {
    const auto f = sample_grf(Window::unit_square(), 8, {3.5, 0.0, 0.1}, rng, nullptr, method);
    for (double v : f.values()) EXPECT_EQ(v, 3.5);
  }
}

TEST(Grf, RejectsBadParameters) {
  Rng rng(1);
  EXPECT_THROW(sample_grf(Window::unit_square(), 8, {0, -1, 0.1}, rng), std::invalid_argument);
  EXPECT_THROW(sample_grf(Window::unit_square(), 8, {0, 1, 0.0}, rng), std::invalid_argument);
  EXPECT_THROW(sample_grf(Window::unit_square(), 1, {0, 1, 0.1}, rng), std::invalid_argument);
}

class GrfMoments : public ::testing::TestWithParam<FieldMethod> {};

TEST_P(GrfMoments, MeanAndCovarianceMatchExponentialModel) {
  const Window w = Window::unit_square();
  const int res = 16;
  const GrfParams p{1.0, 2.0, 0.2};
  FieldCache cache;
  // Cells (2,3) and (5,3): distance 3 cell widths.
  const std::size_t a = 3 * res + 2, b = 3 * res + 5;
  const double d = 3.0 / res;
  std::vector<double> grid_means, ya, yb, prod;
  for (int i = 0; i < 5000; ++i) {
    Rng g = substream(77, static_cast<std::uint64_t>(i));
    const auto f = sample_grf(w, res, p, g, &cache, GetParam());
    if (i < 1000) {
      double s = 0;
      for (double v : f.values()) s += v;
      grid_means.push_back(s / static_cast<double>(f.values().size()));
    }
    ya.push_back(f.values()[a] - p.mu);
    yb.push_back(f.values()[b] - p.mu);
    prod.push_back(ya.back() * yb.back());
  }
  const auto m = oracle::mean_se(grid_means);
  EXPECT_NEAR(m.mean, p.mu, 3 * m.se);
  const auto c = oracle::mean_se(prod);
  EXPECT_NEAR(c.mean, p.sigma2 * std::exp(-d / p.s), 3 * c.se);
  const auto va = oracle::mean_se(ya);
  EXPECT_NEAR(va.var, p.sigma2, 3 * oracle::variance_se(ya));
}

INSTANTIATE_TEST_SUITE_P(Methods, GrfMoments, ::testing::Values(FieldMethod::Circulant, FieldMethod::Cholesky));

TEST(Grf, CirculantEmbeddingIsExactForStudyScales) {
  for (double s : {0.001, 0.01, 0.1}) {
    const auto f = circulant_factor(Window::unit_square(), kDefaultFieldResolution, s);
    EXPECT_FALSE(f.clipped) << s;
  }
  EXPECT_FALSE(circulant_factor(Window(0, 125, 0, 188), kDefaultFieldResolution, 15.0).clipped);
}

TEST(Grf, CacheReusesFactors) {
  FieldCache cache(2);
  Rng rng(4);
  for (int i = 0; i < 3; ++i) sample_grf(Window::unit_square(), 16, {0, 1, 0.1}, rng, &cache);
  EXPECT_EQ(cache.misses(), 1u);
  EXPECT_EQ(cache.hits(), 2u);
  FieldCache quantized(2, 0.01);
  EXPECT_DOUBLE_EQ(quantized.effective_scale(0.0234), 0.02);
}

TEST(Poisson, ZeroIntensityIsEmpty) {
  Rng rng(1);
  EXPECT_TRUE(sample_poisson(Window::unit_square(), 0.0, rng).empty());
}

TEST(Poisson, CountMomentsAndSupport) {
  const Window w(0, 2, 0, 0.5);
  const auto counts = counts_of(2000, [&](Rng& g) {
    const auto p = sample_poisson(w, 100.0, g);
    for (const auto& u : p.points()) EXPECT_TRUE(w.contains(u));
    return p;
  }, 5);
  const auto m = oracle::mean_se(counts);
  EXPECT_NEAR(m.mean, 100.0, 3.0 * std::sqrt(100.0 / 2000.0));
  EXPECT_NEAR(m.var, 100.0, 3.0 * oracle::variance_se(counts));
}

TEST(Lgcp, ZeroVarianceMatchesPoisson) {
  const Window w = Window::unit_square();
  const double mu = std::log(150.0);
  const auto lgcp = counts_of(2000, [&](Rng& g) { return sample_lgcp(w, {mu, 0.0, 0.05}, 32, g); }, 6);
  const auto pois = counts_of(2000, [&](Rng& g) { return sample_poisson(w, 150.0, g); }, 7);
  const auto a = oracle::mean_se(lgcp), b = oracle::mean_se(pois);
  EXPECT_NEAR(a.mean, b.mean, 3.0 * std::hypot(a.se, b.se));
  EXPECT_NEAR(a.var, b.var, 3.0 * std::hypot(oracle::variance_se(lgcp), oracle::variance_se(pois)));
}

TEST(Lgcp, MeanCountFollowsIntensityIdentity) {
  const Window w = Window::unit_square();
  const GrfParams p{4.0, 1.0, 0.05};
  const auto counts = counts_of(600, [&](Rng& g) { return sample_lgcp(w, p, 64, g); }, 8);
  const auto m = oracle::mean_se(counts);
  EXPECT_NEAR(m.mean, std::exp(p.mu + p.sigma2 / 2), 3 * m.se);
}

TEST(Lgcp, StudyParametersGiveHundredsToThousandsOfPoints) {
  const auto counts = counts_of(200, [&](Rng& g) { return sample_lgcp(Window::unit_square(), {5, 2, 0.05}, 128, g); }, 9);
  auto sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_GT(sorted[100], 100.0);
  EXPECT_LT(sorted[100], 5000.0);
}

TEST(Strauss, PapangelouExamples) {
  const StraussParams p{200.0, 0.5, 0.1};
  const PointPattern empty(Window::unit_square());
  EXPECT_DOUBLE_EQ(papangelou_strauss({0.5, 0.5}, empty, p), 200.0);
  const PointPattern one({{0.55, 0.5}}, Window::unit_square());
  EXPECT_DOUBLE_EQ(papangelou_strauss({0.5, 0.5}, one, p), 100.0);
  EXPECT_DOUBLE_EQ(papangelou_strauss({0.5, 0.5}, one, {200.0, 0.0, 0.1}), 0.0);
  EXPECT_DOUBLE_EQ(strauss_interaction(0.0, 0), 1.0);
}

TEST(Strauss, PapangelouMatchesNeighbourCount) {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::uniform_pattern(30, Window::unit_square(), rng);
    const Point u{uniform01(rng), uniform01(rng)};
    const StraussParams p{uniform(rng, 10, 900), uniform01(rng), uniform(rng, 0, 0.3)};
    int k = 0;
    for (const auto& v : x.points()) k += std::hypot(u.x - v.x, u.y - v.y) <= p.R;
    EXPECT_NEAR(papangelou_strauss(u, x, p), p.beta * std::pow(p.gamma, k), 1e-9 * p.beta);
  }
}

TEST(Strauss, AcceptanceRatiosAreDensityRatios) {
  // f(x) = beta^n gamma^S_R(x) up to a constant; the birth ratio is
  // f(x + u) |W| / (f(x) (n + 1)) and the death ratio its reciprocal.
  Rng rng(12);
  const StraussParams p{300.0, 0.4, 0.3};
  const double area = 2.5;
  auto density = [&](const PointPattern& x) {
    return std::pow(p.beta, static_cast<double>(x.size())) *
           std::pow(p.gamma, static_cast<double>(oracle::close_pairs(x, p.R)));
  };
  for (int t = 0; t < 50; ++t) {
    const auto x3 = oracle::uniform_pattern(3, Window::unit_square(), rng);
    const Point u{uniform01(rng), uniform01(rng)};
    std::vector<Point> plus(x3.points().begin(), x3.points().end());
    plus.push_back(u);
    const PointPattern x4(plus, Window::unit_square());
    const double birth = birth_ratio(papangelou_strauss(u, x3, p), area, 3);
    EXPECT_NEAR(birth, density(x4) / density(x3) * area / 4.0, 1e-9 * birth);
    const double death = death_ratio(papangelou_strauss(u, x3, p), area, 4);
    EXPECT_NEAR(death, density(x3) / density(x4) * 4.0 / area, 1e-9 * death);
  }
}

TEST(Strauss, NoInteractionIsPoisson) {
  const Window w = Window::unit_square();
  const auto counts = counts_of(400, [&](Rng& g) { return sample_strauss(w, {150.0, 1.0, 0.05}, g); }, 13);
  const auto m = oracle::mean_se(counts);
  EXPECT_NEAR(m.mean, 150.0, 3 * m.se);
  EXPECT_NEAR(m.var, 150.0, 3 * oracle::variance_se(counts));
}

TEST(Strauss, HardCoreHasNoClosePairs) {
  for (int i = 0; i < 20; ++i) {
    Rng g = substream(14, static_cast<std::uint64_t>(i));
    const auto x = sample_strauss(Window::unit_square(), {500.0, 0.0, 0.03}, g);
    EXPECT_GT(x.size(), 50u);
    EXPECT_EQ(count_r_close_pairs(x, 0.03), 0u);
  }
}

TEST(Strauss, InhibitionReducesClosePairs) {
  double inhibited = 0, free = 0;
  for (int i = 0; i < 30; ++i) {
    Rng g = substream(15, static_cast<std::uint64_t>(i));
    inhibited += static_cast<double>(count_r_close_pairs(sample_strauss(Window::unit_square(), {500, 0.3, 0.03}, g), 0.03));
    free += static_cast<double>(count_r_close_pairs(sample_strauss(Window::unit_square(), {500, 1.0, 0.03}, g), 0.03));
  }
  EXPECT_LT(inhibited, 0.5 * free);
}

TEST(Strauss, SeededRunsAreReproducible) {
  Rng a(99), b(99);
  EXPECT_EQ(sample_strauss(Window::unit_square(), {400, 0.3, 0.03}, a),
            sample_strauss(Window::unit_square(), {400, 0.3, 0.03}, b));
  Rng c(5), d(5);
  EXPECT_EQ(sample_lgcp(Window::unit_square(), {5, 1, 0.05}, 64, c),
            sample_lgcp(Window::unit_square(), {5, 1, 0.05}, 64, d));
}

TEST(Samplers, OutputsStayInsideWindow) {
  const Window w(10, 12, -3, -2);
  for (int i = 0; i < 10; ++i) {
    Rng g = substream(16, static_cast<std::uint64_t>(i));
    for (const auto& x : {sample_strauss(w, {300, 0.5, 0.1}, g), sample_lgcp(w, {5, 1, 0.2}, 32, g),
                          sample_lgcp_strauss(w, {{5, 1, 0.2}, 0.5, 0.1}, 32, g, {.iterations = 20'000})})
      for (const auto& u : x.points()) EXPECT_TRUE(w.contains(u));
  }
}

TEST(LgcpStrauss, NoInteractionCollapsesToLgcp) {
  const Window w = Window::unit_square();
  const GrfParams grf{4.5, 0.5, 0.05};
  const auto mixed = counts_of(300, [&](Rng& g) {
    return sample_lgcp_strauss(w, {grf, 1.0, 0.03}, 32, g, {.iterations = 20'000});
  }, 17);
  const auto lgcp = counts_of(300, [&](Rng& g) { return sample_lgcp(w, grf, 32, g); }, 18);
  const auto a = oracle::mean_se(mixed), b = oracle::mean_se(lgcp);
  EXPECT_NEAR(a.mean, b.mean, 3 * std::hypot(a.se, b.se));
  EXPECT_NEAR(a.var, b.var, 3 * std::hypot(oracle::variance_se(mixed), oracle::variance_se(lgcp)));
}

TEST(LgcpStrauss, ZeroVarianceCollapsesToStrauss) {
  const Window w = Window::unit_square();
  std::vector<double> n1, n2, s1, s2;
  for (int i = 0; i < 200; ++i) {
    Rng g = substream(19, static_cast<std::uint64_t>(i));
    const auto a = sample_lgcp_strauss(w, {{std::log(300.0), 0.0, 0.05}, 0.4, 0.03}, 32, g, {.iterations = 60'000});
    const auto b = sample_strauss(w, {300.0, 0.4, 0.03}, g, {.iterations = 60'000});
    n1.push_back(static_cast<double>(a.size()));
    n2.push_back(static_cast<double>(b.size()));
    s1.push_back(static_cast<double>(count_r_close_pairs(a, 0.03)));
    s2.push_back(static_cast<double>(count_r_close_pairs(b, 0.03)));
  }
  const auto a = oracle::mean_se(n1), b = oracle::mean_se(n2);
  EXPECT_NEAR(a.mean, b.mean, 3 * std::hypot(a.se, b.se));
  const auto c = oracle::mean_se(s1), d = oracle::mean_se(s2);
  EXPECT_NEAR(c.mean, d.mean, 3 * std::hypot(c.se, d.se));
}

TEST(LgcpStrauss, RepulsionAtSmallScaleClusteringAtLarge) {
  const std::vector<double> r{0.01, 0.015, 0.1, 0.15};
  std::vector<double> mean(r.size(), 0.0);
  const int draws = 40;
  for (int i = 0; i < draws; ++i) {
    Rng g = substream(20, static_cast<std::uint64_t>(i));
    const auto x = sample_lgcp_strauss(Window::unit_square(), {{5, 1, 0.05}, 0.2, 0.03}, 128, g);
    const auto c = centered_L_or_zero(x, r);
    for (std::size_t k = 0; k < r.size(); ++k) mean[k] += c.values[k] / draws;
  }
  EXPECT_LT(mean[0], 0.0);
  EXPECT_LT(mean[1], 0.0);
  EXPECT_GT(mean[2], 0.0);
  EXPECT_GT(mean[3], 0.0);
}

TEST(Trace, ThinningAndPoissonLevel) {
  ChainTrace trace;
  Rng rng(21);
  const StraussParams p{200.0, 1.0, 0.05};
  sample_strauss(Window::unit_square(), p, rng, {.iterations = 100'000, .thin = 50, .trace = &trace});
  EXPECT_EQ(trace.samples.size(), 100'000u / 50u);
  EXPECT_EQ(trace.samples.back().iteration, 100'000);
  // Second half of the chain fluctuates around beta |W_ext| on the 2R-dilated window.
  std::vector<double> tail;
  for (std::size_t i = trace.samples.size() / 2; i < trace.samples.size(); ++i)
    tail.push_back(static_cast<double>(trace.samples[i].n));
  const double level = p.beta * Window::unit_square().dilate(2 * p.R).area();
  const auto m = oracle::mean_se(tail);
  EXPECT_NEAR(m.mean, level, 0.1 * level);
  const auto summary = trace_diagnostics(trace);
  EXPECT_FALSE(summary.flat);
  EXPECT_EQ(summary.length, trace.samples.size());
}

TEST(Trace, ConstantChainIsFlat) {
  ChainTrace t;
  for (long i = 1; i <= 10; ++i) t.samples.push_back({i, 7, 2});
  const auto s = trace_diagnostics(t);
  EXPECT_TRUE(s.flat);
  EXPECT_DOUBLE_EQ(s.mean_n, 7.0);
  EXPECT_DOUBLE_EQ(s.sd_n, 0.0);
}

TEST(Model, ParameterParsing) {
  EXPECT_EQ(parse_parameters(ModelKind::Strauss, "500,0.3,0.03"), (std::vector<double>{500, 0.3, 0.03}));
  EXPECT_EQ(parse_parameters(ModelKind::Strauss, "R=0.03, beta=500, gamma=0.3"), (std::vector<double>{500, 0.3, 0.03}));
  EXPECT_THROW(parse_parameters(ModelKind::Strauss, "500,0.3"), std::invalid_argument);
  EXPECT_THROW(parse_parameters(ModelKind::Strauss, "500,1.3,0.03"), std::invalid_argument);
  EXPECT_EQ(parameter_count(ModelKind::LgcpStrauss), 5u);
}
