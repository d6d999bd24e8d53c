// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [criterion ...] [--envelope-sims N]
//
// With no criteria all ten run. Exit status is nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ppnn/baselines.hpp"
#include "ppnn/envelopes.hpp"
#include "ppnn/nn.hpp"
#include "ppnn/pipeline.hpp"
#include "ppnn/simulate.hpp"
#include "ppnn/sumstats.hpp"

using namespace ppnn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a named condition; any false condition fails the criterion.
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double correlation(const VectorXd& a, const VectorXd& b) {
  const VectorXd x = a.array() - a.mean(), y = b.array() - b.mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int envelope_sims = kDefaultEnvelopeSimulations;

// ---------------------------------------------------------------------------
// 1. Deterministic numerics

double gradient_check(Network& net, const Examples& data, int probes, Rng& rng) {
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(data.size()));
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  std::vector<double> grad(net.parameter_count());
  net.loss_and_gradient(data, cols, grad);
  auto params = net.parameters();
  const double h = 1e-5;
  double worst = 0.0;
  int used = 0;
  while (used < probes) {
    const auto i = static_cast<std::size_t>(uniform(rng, 0, static_cast<double>(params.size())));
    const double saved = params[i];
    params[i] = saved + h;
    const double up = net.loss_and_gradient(data, cols, {});
    params[i] = saved - h;
    const double down = net.loss_and_gradient(data, cols, {});
    params[i] = saved;
    const double fd = (up - down) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(grad[i]));
    if (scale < 1e-9) continue;  // parameter behind a dead relu
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    ++used;
  }
  return worst;
}

void criterion1(Outcome& out) {
  MatrixXd seq(1, 8);
  seq << 1, 2, 3, 4, 5, 6, 7, 8;
  const MatrixXd conv = conv1d_forward(seq, MatrixXd::Ones(1, 7), VectorXd::Zero(1), 7, Activation::Identity);
  out.require(conv.cols() == 2 && conv(0, 0) == 28.0 && conv(0, 1) == 35.0, "conv [28,35]");
  const MatrixXd clamp = conv1d_forward(seq, MatrixXd::Ones(1, 7), VectorXd::Constant(1, -1e6), 7);
  out.require((clamp.array() == 0.0).all(), "relu clamp");

  MatrixXd pool_in(1, 11);
  pool_in << 3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5;
  const PoolResult pool = maxpool1d(pool_in, 5);
  out.require(pool.output.cols() == 2 && pool.output(0, 0) == 5.0 && pool.output(0, 1) == 9.0 &&
                  pool.argmax(0, 0) == 4 && pool.argmax(0, 1) == 5,
              "maxpool [5,9]");

  const VectorXd d0 = dense_forward(VectorXd::Ones(3), MatrixXd::Zero(2, 3), (VectorXd(2) << 1.0, -1.0).finished(), Activation::Relu);
  out.require(d0(0) == 1.0 && d0(1) == 0.0, "dense (1,0)");
  const VectorXd d1 = dense_forward(VectorXd::Ones(2), (MatrixXd(1, 2) << 2.0, 3.0).finished(), VectorXd::Ones(1), Activation::Relu);
  out.require(d1(0) == 6.0, "dense 6");

  Rng rng(101);
  Network net(NetworkArch::standard(3));
  net.initialize(rng);
  for (auto& p : net.parameters()) p += uniform(rng, -0.01, 0.01);
  Examples e;
  e.curves.resize(513, 4);
  e.counts.resize(4);
  e.targets.resize(3, 4);
  for (Eigen::Index j = 0; j < 4; ++j) {
    for (Eigen::Index i = 0; i < 513; ++i) e.curves(i, j) = uniform(rng, -1, 1);
    e.counts(j) = uniform(rng, -1, 1);
    for (Eigen::Index k = 0; k < 3; ++k) e.targets(k, j) = uniform(rng, -1, 1);
  }
  const double worst = gradient_check(net, e, 40, rng);
  out.require(worst < 1e-4, fmt("gradient max rel err %.2e over 40 params", worst));

  const AdamOptions o{0.01, 0.8, 0.95, 1e-7};
  std::vector<double> p{0.5};
  AdamState s(1, o);
  double x = 0.5, m = 0, v = 0, adam_err = 0;
  const double g[2] = {0.3, -1.7};
  for (int t = 1; t <= 2; ++t) {
    s.update(p, std::vector<double>{g[t - 1]});
    m = o.beta1 * m + (1 - o.beta1) * g[t - 1];
    v = o.beta2 * v + (1 - o.beta2) * g[t - 1] * g[t - 1];
    x -= o.learning_rate * (m / (1 - std::pow(o.beta1, t))) / (std::sqrt(v / (1 - std::pow(o.beta2, t))) + o.epsilon);
    adam_err = std::max(adam_err, std::abs(p[0] - x));
  }
  out.require(adam_err <= 1e-12, fmt("adam two-step err %.1e", adam_err));
}

// ---------------------------------------------------------------------------
// 2. Summary-statistic oracles

void criterion2(Outcome& out) {
  const Window w = Window::unit_square();
  const auto r = default_r_grid(w);
  const auto rj = nearest_neighbour_r_grid(w, 200.0);
  const int draws = 500;
  std::vector<double> k_mean(r.size(), 0.0), l_mean(r.size(), 0.0), j_sum(rj.size(), 0.0);
  std::vector<int> j_valid(rj.size(), 0);
  for (int i = 0; i < draws; ++i) {
    Rng g = substream(201, static_cast<std::uint64_t>(i));
    const auto x = sample_poisson(w, 200.0, g);
    const auto k = estimate_K(x, r);
    const auto l = estimate_L_centered(x, r);
    const auto j = estimate_J(x, rj);
    for (std::size_t q = 0; q < r.size(); ++q) {
      k_mean[q] += k.values[q] / draws;
      l_mean[q] += l.values[q] / draws;
    }
    for (std::size_t q = 0; q < rj.size(); ++q)
      if (j.valid_at(q)) {
        j_sum[q] += j.values[q];
        ++j_valid[q];
      }
  }
  double k_worst = 0, l_worst = 0, j_worst = 0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    if (r[q] < 0.05 - 1e-12 || r[q] > 0.2 + 1e-12) continue;
    const double pi_r2 = std::numbers::pi * r[q] * r[q];
    k_worst = std::max(k_worst, std::abs(k_mean[q] / pi_r2 - 1.0));
    l_worst = std::max(l_worst, std::abs(l_mean[q]));
  }
  std::size_t j_points = 0;
  for (std::size_t q = 0; q < rj.size(); ++q) {
    if (j_valid[q] < draws) continue;  // valid range common to every draw
    j_worst = std::max(j_worst, std::abs(j_sum[q] / draws - 1.0));
    ++j_points;
  }
  out.require(k_worst <= 0.05, fmt("K max rel dev %.4f", k_worst));
  out.require(l_worst <= 0.005, fmt("L-r max abs dev %.5f", l_worst));
  out.require(j_points > rj.size() / 2 && j_worst <= 0.05,
              fmt2("J max dev %.4f on %.0f valid r", j_worst, static_cast<double>(j_points)));
}

// ---------------------------------------------------------------------------
// 3. Model-collapse oracles

// |a - b| within 3 SE, with either a known target or a second sample.
bool within(double diff, double se) { return std::abs(diff) <= 3.0 * se; }

void compare_to_poisson(Outcome& out, const std::string& name, const std::vector<double>& counts, double lambda) {
  const auto m = oracle::mean_se(counts);
  const double n = static_cast<double>(counts.size());
  const double mean_se = std::sqrt(lambda / n);
  const double var_se = std::sqrt((lambda + 2 * lambda * lambda) / n);
  out.require(within(m.mean - lambda, mean_se) && within(m.var - lambda, var_se),
              name + fmt2(" mean %.2f var %.2f", m.mean, m.var) + fmt(" vs %.2f", lambda));
}

void criterion3(Outcome& out) {
  const Window w = Window::unit_square();
  std::vector<double> strauss;
  for (int i = 0; i < 1000; ++i) {
    Rng g = substream(301, static_cast<std::uint64_t>(i));
    strauss.push_back(static_cast<double>(sample_strauss(w, {200.0, 1.0, 0.05}, g).size()));
  }
  compare_to_poisson(out, "strauss(g=1)", strauss, 200.0);

  std::vector<double> lgcp0;
  for (int i = 0; i < 500; ++i) {
    Rng g = substream(302, static_cast<std::uint64_t>(i));
    lgcp0.push_back(static_cast<double>(sample_lgcp(w, {5.0, 0.0, 0.05}, kDefaultFieldResolution, g).size()));
  }
  compare_to_poisson(out, "lgcp(s2=0)", lgcp0, std::exp(5.0));

  std::vector<double> lgcp, hybrid;
  const GrfParams field{5.0, 1.0, 0.05};
  for (int i = 0; i < 500; ++i) {
    Rng g = substream(303, static_cast<std::uint64_t>(i));
    lgcp.push_back(static_cast<double>(sample_lgcp(w, field, kDefaultFieldResolution, g).size()));
    Rng h = substream(304, static_cast<std::uint64_t>(i));
    hybrid.push_back(static_cast<double>(
        sample_lgcp_strauss(w, {field, 1.0, 0.03}, kDefaultFieldResolution, h).size()));
  }
  const auto a = oracle::mean_se(lgcp), b = oracle::mean_se(hybrid);
  const double var_se = std::hypot(oracle::variance_se(lgcp), oracle::variance_se(hybrid));
  out.require(within(a.mean - b.mean, std::hypot(a.se, b.se)) && within(a.var - b.var, var_se),
              fmt2("lgcp-strauss(g=1) mean %.2f var %.1f", b.mean, b.var) +
                  fmt2(" vs lgcp %.2f %.1f", a.mean, a.var));
}

// ---------------------------------------------------------------------------
// 4. Intensity identity

void criterion4(Outcome& out) {
  const Window w = Window::unit_square();
  const std::vector<GrfParams> settings{{5.0, 1.0, 0.05}, {4.5, 2.0, 0.02}, {5.5, 0.5, 0.1}};
  for (std::size_t s = 0; s < settings.size(); ++s) {
    std::vector<double> counts;
    for (int i = 0; i < 2000; ++i) {
      Rng g = substream(401 + s, static_cast<std::uint64_t>(i));
      counts.push_back(static_cast<double>(sample_lgcp(w, settings[s], kDefaultFieldResolution, g).size()));
    }
    const auto m = oracle::mean_se(counts);
    const double expect = w.area() * std::exp(settings[s].mu + settings[s].sigma2 / 2);
    out.require(within(m.mean - expect, m.se), fmt2("mean %.2f vs %.2f", m.mean, expect) + fmt(" (se %.2f)", m.se));
  }
}

// ---------------------------------------------------------------------------
// Shared LGCP desk-scale study for criteria 5, 7 and 8.

struct LgcpStudy {
  RunConfig cfg;
  TrainingSet train;  // 4000 rows; criterion 5 uses the first 2000
  TrainingSet test;   // 500 rows
  std::optional<TrainedModel> model;
};

LgcpStudy& lgcp_study() {
  static std::unique_ptr<LgcpStudy> study;
  if (!study) {
    study = std::make_unique<LgcpStudy>();
    study->cfg = preset_config("lgcp");
    study->train = generate_training_data(study->cfg, 4000, derive_seed(study->cfg.seed, SeedPurpose::TrainingData));
    study->test = generate_training_data(study->cfg, 500, derive_seed(study->cfg.seed, SeedPurpose::TestData));
  }
  return *study;
}

const TrainedModel& lgcp_model() {
  auto& s = lgcp_study();
  if (!s.model) {
    TrainingOptions o = training_options(s.cfg);
    o.seed = derive_seed(s.cfg.seed, SeedPurpose::Network);
    const TrainingSet head = s.train.head(2000);
    s.model = train_model(head, &s.test, o);
  }
  return *s.model;
}

// ---------------------------------------------------------------------------
// 5. Scaled simulation study

void criterion5(Outcome& out) {
  const auto& s = lgcp_study();
  const auto& model = lgcp_model();
  const auto rep = evaluate_on_test(model, s.test);
  const MatrixXd& t = rep.truth;
  const MatrixXd& e = rep.predicted;
  const double c_mu = correlation(t.row(0).transpose(), e.row(0).transpose());
  const double c_s2 = correlation(t.row(1).transpose(), e.row(1).transpose());
  std::vector<Eigen::Index> big;
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    if (t(1, j) > 1.0) big.push_back(j);
  VectorXd ts(static_cast<Eigen::Index>(big.size())), es(ts.size());
  for (std::size_t i = 0; i < big.size(); ++i) {
    ts(static_cast<Eigen::Index>(i)) = t(2, big[i]);
    es(static_cast<Eigen::Index>(i)) = e(2, big[i]);
  }
  const double c_s = correlation(ts, es);
  out.require(c_mu >= 0.9, fmt("corr(mu) %.3f", c_mu));
  out.require(c_s2 >= 0.7, fmt("corr(sigma2) %.3f", c_s2));
  out.require(c_s >= 0.5, fmt2("corr(s | sigma2>1) %.3f over %.0f rows", c_s, static_cast<double>(big.size())));

  double low = 0, high = 0;
  int n_low = 0, n_high = 0;
  double z_sum = 0;
  int n_interior = 0;
  const double mu_sd = model.standardizer.theta_sd[0];
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    const double err = std::abs(e(2, j) - t(2, j));
    if (t(1, j) < 0.5) {
      low += err;
      ++n_low;
    } else if (t(1, j) > 2.0) {
      high += err;
      ++n_high;
    }
    if (t(0, j) > 4.2 && t(0, j) < 5.8) {
      z_sum += (e(0, j) - t(0, j)) / mu_sd;
      ++n_interior;
    }
  }
  low /= n_low;
  high /= n_high;
  out.require(low > high, fmt2("mean |s err| %.4f at sigma2<0.5 vs %.4f at sigma2>2", low, high));
  const double z_mean = z_sum / n_interior;
  out.require(std::abs(z_mean) < 0.1, fmt("mean standardized mu error %.3f (interior)", z_mean));
}

// ---------------------------------------------------------------------------
// 6. Baseline recovery

void criterion6(Outcome& out) {
  const Window w = Window::unit_square();
  const auto grid = default_strauss_r_grid();
  const double step = grid[1] - grid[0];
  int hits = 0;
  std::vector<double> gammas;
  for (int i = 0; i < 50; ++i) {
    Rng g = substream(601, static_cast<std::uint64_t>(i));
    const auto x = sample_strauss(w, {500.0, 0.3, 0.03}, g);
    const auto fit = profile_mple_strauss(x, grid);
    hits += std::abs(fit.R - 0.03) <= step * (1 + 1e-9);
    gammas.push_back(fit.gamma);
  }
  const double med_gamma = median(gammas);
  out.require(hits > 30, fmt("R within one step in %.0f/50", hits));
  out.require(med_gamma >= 0.15 && med_gamma <= 0.5, fmt("median gamma %.3f", med_gamma));

  std::vector<double> s2;
  for (int i = 0; i < 100; ++i) {
    Rng g = substream(602, static_cast<std::uint64_t>(i));
    const auto x = sample_lgcp(w, {5.0, 1.5, 0.05}, kDefaultFieldResolution, g);
    s2.push_back(minimum_contrast_lgcp(x).sigma2);
  }
  const double med_s2 = median(s2);
  out.require(med_s2 >= 0.75 && med_s2 <= 2.5, fmt("median sigma2 %.3f", med_s2));
}

// ---------------------------------------------------------------------------
// 7. Training-set size trend

void criterion7(Outcome& out) {
  auto& s = lgcp_study();
  TrainingOptions o = training_options(s.cfg);
  o.seed = derive_seed(s.cfg.seed, SeedPurpose::Network);
  const auto rows = size_study(s.train, {500, 1000, 2000, 4000}, s.test, o);
  int inversions = 0;
  bool small = true;
  std::ostringstream trace;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    trace << (i ? " " : "") << rows[i].size << ":" << fmt("%.4f", rows[i].test_mse);
    if (i > 0 && rows[i].test_mse > rows[i - 1].test_mse) {
      ++inversions;
      small = small && rows[i].test_mse <= 1.05 * rows[i - 1].test_mse;
    }
  }
  out.require(inversions <= 1 && small, "test MSE " + trace.str());
}

// ---------------------------------------------------------------------------
// 8. No overfitting over 20 epochs

void criterion8(Outcome& out) {
  const auto& h = lgcp_model().history;
  std::size_t best = 0;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i].test_mse < h[best].test_mse) best = i;
  const double limit = 1.1 * h[best].test_mse;
  // Sustained: two consecutive epochs, or the final epoch, above the limit.
  bool sustained = h.back().test_mse > limit;
  for (std::size_t i = best + 1; i + 1 < h.size(); ++i)
    sustained = sustained || (h[i].test_mse > limit && h[i + 1].test_mse > limit);
  out.require(h.size() == 20, fmt("%.0f epochs", static_cast<double>(h.size())));
  out.require(!sustained, fmt2("min test MSE %.4f at epoch %.0f", h[best].test_mse, static_cast<double>(h[best].epoch)) +
                              fmt(", final %.4f", h.back().test_mse));
}

// ---------------------------------------------------------------------------
// 9. Envelope calibration

void criterion9(Outcome& out) {
  const Window w = Window::unit_square();
  const auto r = default_r_grid(w);
  const int datasets = 200, sims = 199;
  int rejected = 0;
  for (int d = 0; d < datasets; ++d) {
    Rng g = substream(901, static_cast<std::uint64_t>(d));
    const auto data = centered_L_or_zero(sample_poisson(w, 200.0, g), r);
    std::vector<Curve> curves;
    for (int i = 0; i < sims; ++i) curves.push_back(centered_L_or_zero(sample_poisson(w, 200.0, g), r).values);
    rejected += global_envelope(r, data.values, curves, 0.05).p_value <= 0.05;
  }
  const auto [lo, hi] = oracle::binomial_interval(datasets, 0.05);
  out.require(rejected >= lo && rejected <= hi,
              fmt("%.0f/200 rejected", rejected) + fmt2(", interval [%.0f, %.0f]", lo, hi));

  const std::vector<Curve> handmade{
      {0, 0, 1, 1, 2}, {0, 1, 1, 2, 2}, {1, 1, 1, 1, 1}, {2, 2, 0, 0, 0}, {0, 0, 0, 3, 3}, {1, 2, 2, 2, 0},
  };
  out.require(erl_ordering(handmade) == oracle::erl_measure(handmade), "ERL ordering on 6 handmade curves");
}

// ---------------------------------------------------------------------------
// 10. Oak workflow on a synthetic stand-in

void criterion10(Outcome& out) {
  RunConfig cfg = preset_config("oak");
  const std::vector<double> truth{-4.54, 0.32, 10.93, 0.21, 1.91};
  const auto train = generate_training_data(cfg, 4000, derive_seed(cfg.seed, SeedPurpose::TrainingData));
  const auto test = generate_training_data(cfg, 500, derive_seed(cfg.seed, SeedPurpose::TestData));
  TrainingOptions o = training_options(cfg);
  o.seed = derive_seed(cfg.seed, SeedPurpose::Network);
  const auto model = train_model(train, &test, o);

  ValidationOptions v;
  v.n_sim = envelope_sims;
  int good = 0;
  std::ostringstream reps;
  for (int rep = 0; rep < 10; ++rep) {
    Rng g = substream(1001, static_cast<std::uint64_t>(rep));
    const auto x = simulate_model(cfg.model, cfg.window, truth, g);
    auto theta = estimate(model, x).theta;
    const double R = theta[4], gamma = theta[3];
    // The fitted model must be simulable: project onto the training box.
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = std::clamp(theta[k], cfg.ranges[k].lo, cfg.ranges[k].hi);
    const double p = validate_fit(x, cfg.model, theta, g, v).p_value;
    const bool ok = R > 1.0 && R < 3.0 && gamma > 0.05 && gamma < 0.45 && p > 0.05;
    good += ok;
    reps << (rep ? " " : "") << fmt2("(R %.2f g %.2f", R, gamma) << fmt(" p %.3f)", p);
  }
  out.require(good >= 8, fmt("%.0f/10 repetitions pass ", good) + reps.str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"deterministic numerics", criterion1},
      {"summary-statistic oracles", criterion2},
      {"model-collapse oracles", criterion3},
      {"LGCP intensity identity", criterion4},
      {"scaled LGCP simulation study", criterion5},
      {"baseline recovery", criterion6},
      {"training-set size trend", criterion7},
      {"no overfitting over 20 epochs", criterion8},
      {"envelope calibration", criterion9},
      {"oak workflow on synthetic stand-in", criterion10},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--envelope-sims" && i + 1 < argc) {
      envelope_sims = std::atoi(argv[++i]);
    } else {
      const int c = std::atoi(a.c_str());
      if (c < 1 || c > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "usage: %s [criterion 1-10 ...] [--envelope-sims N]\n", argv[0]);
        return 2;
      }
      selected.insert(c);
    }
  }
  if (selected.empty())
    for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) selected.insert(c);

  int failed = 0;
  for (int c : selected) {
    const auto& [name, run] = criteria[static_cast<std::size_t>(c - 1)];
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !out.pass;
    std::printf("criterion %2d %s  %s: %s (%.1f s)\n", c, out.pass ? "PASS" : "FAIL", name.c_str(),
                out.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
