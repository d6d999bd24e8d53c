#include "ppnn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "json_convert.hpp"
#include "ppnn/io.hpp"
#include "ppnn/parallel.hpp"
#include "ppnn/sumstats.hpp"

namespace ppnn {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

std::vector<double> RunConfig::r_grid() const {
  if (r_max <= 0.0) return default_r_grid(window, curve_length);
  std::vector<double> r(static_cast<std::size_t>(curve_length));
  for (int i = 0; i < curve_length; ++i) r[static_cast<std::size_t>(i)] = r_max * i / (curve_length - 1);
  return r;
}

void RunConfig::validate() const {
  const auto k = parameter_count(model.kind);
  if (ranges.size() != k)
    throw std::invalid_argument("config: " + std::string(to_string(model.kind)) + " needs " + std::to_string(k) +
                                " parameter ranges, got " + std::to_string(ranges.size()));
  std::vector<double> lo(k), hi(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& r = ranges[j];
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi))
      throw std::invalid_argument("config: range for " + parameter_names(model.kind)[j] + " must have lo < hi");
    lo[j] = r.lo;
    hi[j] = r.hi;
  }
  validate_parameters(model.kind, lo);
  validate_parameters(model.kind, hi);
  if (n_train < 1) throw std::invalid_argument("config: n_train must be >= 1");
  if (curve_length < 2) throw std::invalid_argument("config: curve_length must be >= 2");
  if (!(r_max >= 0.0)) throw std::invalid_argument("config: r_max must be >= 0");
  if (epochs < 1 || batch_size < 1) throw std::invalid_argument("config: epochs and batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
  if (model.sim.field_resolution < 2) throw std::invalid_argument("config: field_resolution must be >= 2");
  if (model.sim.strauss_iterations < 1 || model.sim.lgcp_strauss_iterations < 1)
    throw std::invalid_argument("config: sampler iterations must be >= 1");
  NetworkArch::standard(static_cast<int>(k), curve_length).validate();
}

RunConfig preset_config(std::string_view name) {
  RunConfig c;
  if (name == "lgcp") {
    c.model.kind = ModelKind::Lgcp;
    c.ranges = {{4.0, 6.0}, {0.0, 4.0}, {0.001, 0.1}};
    c.n_train = 10'000;
  } else if (name == "strauss") {
    c.model.kind = ModelKind::Strauss;
    c.ranges = {{200.0, 900.0}, {0.0, 1.0}, {0.0, 0.05}};
    c.n_train = 5'000;
  } else if (name == "lgcp-strauss") {
    c.model.kind = ModelKind::LgcpStrauss;
    c.ranges = {{4.5, 6.0}, {0.0, 4.0}, {0.001, 0.1}, {0.0, 1.0}, {0.0, 0.05}};
    c.n_train = 40'000;
  } else if (name == "oak") {
    c.model.kind = ModelKind::LgcpStrauss;
    c.window = Window(0.0, 125.0, 0.0, 188.0);
    c.ranges = {{-5.6, -3.0}, {0.0, 2.0}, {0.001, 15.0}, {0.0, 0.7}, {1.0, 5.0}};
    c.n_train = 40'000;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (lgcp, strauss, lgcp-strauss, oak)");
  }
  c.n_test = 5'000;
  return c;
}

RunConfig config_from_json(std::string_view text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::vector<std::string> known{"preset", "model", "window", "ranges", "n_train", "n_test",
                                              "curve_length", "r_max", "epochs", "batch_size", "learning_rate",
                                              "seed", "threads"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");

  try {
    if (j.contains("preset")) base = preset_config(j.at("preset").get<std::string>());
    if (j.contains("model")) {
      const auto& m = j.at("model");
      base.model = m.is_string() ? detail::model_from_json(json{{"kind", m}}, base.model)
                                 : detail::model_from_json(m, base.model);
    }
    if (j.contains("window")) base.window = detail::window_from_json(j.at("window"));
    if (j.contains("ranges")) {
      const auto& r = j.at("ranges");
      if (r.is_object()) {
        const auto& names = parameter_names(base.model.kind);
        base.ranges.assign(names.size(), {});
        for (std::size_t i = 0; i < names.size(); ++i) {
          if (!r.contains(names[i])) throw std::invalid_argument("config: no range for " + names[i]);
          const auto v = r.at(names[i]).get<std::vector<double>>();
          if (v.size() != 2) throw std::invalid_argument("config: range needs [lo, hi]");
          base.ranges[i] = {v[0], v[1]};
        }
        if (r.size() != names.size()) throw std::invalid_argument("config: ranges name unknown parameters");
      } else {
        base.ranges = detail::ranges_from_json(r);
      }
    }
    if (j.contains("n_train")) base.n_train = j.at("n_train").get<std::size_t>();
    if (j.contains("n_test")) base.n_test = j.at("n_test").get<std::size_t>();
    if (j.contains("curve_length")) base.curve_length = j.at("curve_length").get<int>();
    if (j.contains("r_max")) base.r_max = j.at("r_max").get<double>();
    if (j.contains("epochs")) base.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<int>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) base.threads = j.at("threads").get<unsigned>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return base;
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["model"] = detail::to_json(c.model);
  j["window"] = detail::to_json(c.window);
  j["ranges"] = detail::to_json(c.ranges);
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["curve_length"] = c.curve_length;
  j["r_max"] = c.r_max;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j.dump(2);
}

std::uint64_t derive_seed(std::uint64_t seed, SeedPurpose purpose) {
  // splitmix64 finalizer over seed and purpose.
  std::uint64_t z = seed + (static_cast<std::uint64_t>(purpose) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Training data

TrainingSet generate_training_data(const RunConfig& cfg, std::size_t rows, std::uint64_t master_seed,
                                   const GenerationOptions& opts) {
  cfg.validate();
  TrainingSet set;
  set.spec = cfg.model;
  set.window = cfg.window;
  set.r = cfg.r_grid();
  set.ranges = cfg.ranges;
  set.seed = master_seed;
  const auto m = static_cast<Eigen::Index>(set.r.size());
  const auto k = static_cast<Eigen::Index>(cfg.ranges.size());
  const auto n = static_cast<Eigen::Index>(rows);
  set.data.curves = Eigen::MatrixXd::Zero(m, n);
  set.data.counts = Eigen::VectorXd::Zero(n);
  set.data.targets = Eigen::MatrixXd::Zero(k, n);
  set.flags.assign(rows, kRowOk);

  const std::uint64_t retry_seed = derive_seed(master_seed, SeedPurpose::TrainingData);
  std::mutex failure_mutex;
  std::atomic<std::size_t> done{0};
  parallel_for(rows, opts.threads ? opts.threads : cfg.threads, [&](std::size_t i) {
    const auto col = static_cast<Eigen::Index>(i);
    std::string message;
    for (int attempt = 0; attempt < 2; ++attempt) {
      Rng g = substream(attempt == 0 ? master_seed : retry_seed, i);
      std::vector<double> theta(cfg.ranges.size());
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = uniform(g, cfg.ranges[j].lo, cfg.ranges[j].hi);
      set.data.targets.col(col) = Eigen::Map<const Eigen::VectorXd>(theta.data(), k);
      try {
        const PointPattern x = simulate_model(cfg.model, cfg.window, theta, g);
        const SummaryCurve c = centered_L_or_zero(x, set.r);
        set.data.curves.col(col) = Eigen::Map<const Eigen::VectorXd>(c.values.data(), m);
        set.data.counts(col) = static_cast<double>(x.size());
        set.flags[i] = c.degenerate ? kRowDegenerate : kRowOk;
        message.clear();
        break;
      } catch (const std::exception& e) {
        message = e.what();
      }
    }
    if (!message.empty()) {
      set.flags[i] = kRowFailed;
      set.data.curves.col(col).setZero();
      std::lock_guard lock(failure_mutex);
      set.failures.push_back({i, message});
    }
    const std::size_t finished = ++done;
    if (opts.progress) opts.progress(finished);
  });
  std::sort(set.failures.begin(), set.failures.end(),
            [](const RowFailure& a, const RowFailure& b) { return a.row < b.row; });
  return set;
}

// ---------------------------------------------------------------------------
// Models

TrainingOptions training_options(const RunConfig& cfg) {
  TrainingOptions o;
  o.epochs = cfg.epochs;
  o.batch_size = cfg.batch_size;
  o.learning_rate = cfg.learning_rate;
  o.seed = derive_seed(cfg.seed, SeedPurpose::Network);
  return o;
}

namespace {

void require_compatible(const TrainingSet& a, const TrainingSet& b) {
  if (a.spec.kind != b.spec.kind) throw std::invalid_argument("training and test sets use different models");
  if (a.window != b.window) throw std::invalid_argument("training and test sets use different windows");
  if (a.r != b.r) throw std::invalid_argument("training and test sets use different r grids");
}

}  // namespace

TrainedModel train_model(const TrainingSet& train, const TrainingSet* test, const TrainingOptions& opts,
                         const Standardizer* fixed) {
  if (test) require_compatible(train, *test);
  const Examples raw = train.usable();
  if (raw.size() == 0) throw std::invalid_argument("train_model: no usable training rows");

  TrainedModel model;
  model.standardizer = fixed ? *fixed : fit_standardizer(raw);
  model.spec = train.spec;
  model.window = train.window;
  model.r = train.r;
  model.ranges = train.ranges;

  const Examples z = standardize(raw, model.standardizer);
  Examples z_test;
  if (test) z_test = standardize(test->usable(), model.standardizer);

  model.network = Network(NetworkArch::standard(static_cast<int>(train.ranges.size()), static_cast<int>(train.r.size())));
  Rng rng = substream(opts.seed, 0);
  model.network.initialize(rng);
  TrainOptions t;
  t.epochs = opts.epochs;
  t.batch_size = opts.batch_size;
  t.adam.learning_rate = opts.learning_rate;
  t.on_epoch = opts.on_epoch;
  model.history = ppnn::train(model.network, z, test && z_test.size() > 0 ? &z_test : nullptr, t, rng);
  return model;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  json meta;
  meta["model"] = detail::to_json(model.spec);
  meta["window"] = detail::to_json(model.window);
  meta["r"] = model.r;
  meta["ranges"] = detail::to_json(model.ranges);
  meta["parameters"] = parameter_names(model.spec.kind);
  save_network(path, model.network, model.standardizer, meta.dump());
}

TrainedModel load_model(const std::filesystem::path& path) {
  SavedNetwork saved = load_network(path);
  TrainedModel model;
  model.network = std::move(saved.network);
  model.standardizer = std::move(saved.standardizer);
  try {
    const json meta = json::parse(saved.metadata);
    model.spec = detail::model_from_json(meta.at("model"));
    model.window = detail::window_from_json(meta.at("window"));
    model.r = meta.at("r").get<std::vector<double>>();
    model.ranges = detail::ranges_from_json(meta.at("ranges"));
  } catch (const std::exception& e) {
    throw CorruptFile(path.string() + ": bad model metadata: " + e.what());
  }
  if (model.r.size() != static_cast<std::size_t>(model.network.arch().input_length) ||
      parameter_count(model.spec.kind) != static_cast<std::size_t>(model.network.arch().outputs))
    throw CorruptFile(path.string() + ": metadata does not match the network");
  return model;
}

Estimate estimate(const TrainedModel& model, const PointPattern& p) {
  if (p.window() != model.window)
    throw std::invalid_argument("estimate: pattern window differs from the training window");
  Estimate out;
  const SummaryCurve c = centered_L_or_zero(p, model.r);
  if (c.degenerate) out.warnings.push_back("pattern has fewer than two points; using a zero curve");
  const auto& st = model.standardizer;
  const double z_count = standardize_count(static_cast<double>(p.size()), st);
  if (std::abs(z_count) > 4.0)
    out.warnings.push_back("point count " + std::to_string(p.size()) +
                           " is far outside the training distribution; run coverage-check");
  const Eigen::VectorXd x = standardize_curve(c.values, st);
  const Eigen::VectorXd theta = destandardize_theta(model.network.forward(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), z_count), st);
  out.theta.assign(theta.data(), theta.data() + theta.size());
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

EvaluationReport evaluate_predictions(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& predicted,
                                      const Standardizer& st, const std::vector<std::string>& names) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols())
    throw std::invalid_argument("evaluate_predictions: shape mismatch");
  if (static_cast<std::size_t>(truth.rows()) != st.theta_sd.size() ||
      static_cast<std::size_t>(truth.rows()) != names.size())
    throw std::invalid_argument("evaluate_predictions: parameter dimension mismatch");
  if (truth.cols() == 0) throw std::invalid_argument("evaluate_predictions: no rows");

  EvaluationReport rep;
  rep.truth = truth;
  rep.predicted = predicted;
  const double n = static_cast<double>(truth.cols());
  double total = 0.0;
  for (Eigen::Index k = 0; k < truth.rows(); ++k) {
    const Eigen::ArrayXd t = truth.row(k).transpose().array();
    const Eigen::ArrayXd e = predicted.row(k).transpose().array();
    const Eigen::ArrayXd err = e - t;
    ParameterError pe;
    pe.name = names[static_cast<std::size_t>(k)];
    pe.rmse = std::sqrt(err.square().mean());
    pe.bias = err.mean();
    const double st_k = st.theta_sd[static_cast<std::size_t>(k)];
    pe.standardized_mse = (err / st_k).square().mean();
    const Eigen::ArrayXd tc = t - t.mean(), ec = e - e.mean();
    const double denom = std::sqrt(tc.square().sum() * ec.square().sum());
    const bool constant = t.maxCoeff() == t.minCoeff() || e.maxCoeff() == e.minCoeff();
    pe.correlation = !constant && denom > 0.0 ? (tc * ec).sum() / denom : std::numeric_limits<double>::quiet_NaN();
    total += pe.standardized_mse * n;
    rep.parameters.push_back(pe);
  }
  rep.standardized_mse = total / (n * static_cast<double>(truth.rows()));
  return rep;
}

EvaluationReport evaluate_on_test(const TrainedModel& model, const TrainingSet& test) {
  if (test.spec.kind != model.spec.kind || test.window != model.window || test.r != model.r)
    throw std::invalid_argument("evaluate_on_test: test set does not match the model's model, window or r grid");
  const Examples raw = test.usable();
  const Examples z = standardize(raw, model.standardizer);
  const Eigen::MatrixXd pred = destandardize_theta(model.network.predict(z), model.standardizer);
  EvaluationReport rep = evaluate_predictions(raw.targets, pred, model.standardizer, parameter_names(model.spec.kind));
  rep.counts.assign(raw.counts.data(), raw.counts.data() + raw.counts.size());
  return rep;
}

void write_evaluation_csv(const std::filesystem::path& path, const EvaluationReport& report) {
  std::vector<std::string> header{"row", "count"};
  for (const auto& p : report.parameters) {
    header.push_back("true_" + p.name);
    header.push_back("est_" + p.name);
  }
  CsvWriter csv(path, header);
  for (Eigen::Index j = 0; j < report.truth.cols(); ++j) {
    std::vector<double> row{static_cast<double>(j),
                            report.counts.empty() ? 0.0 : report.counts[static_cast<std::size_t>(j)]};
    for (Eigen::Index k = 0; k < report.truth.rows(); ++k) {
      row.push_back(report.truth(k, j));
      row.push_back(report.predicted(k, j));
    }
    csv.row(row);
  }
}

std::vector<SizeStudyRow> size_study(const TrainingSet& train, const std::vector<std::size_t>& sizes,
                                     const TrainingSet& test, const TrainingOptions& opts) {
  if (sizes.empty()) throw std::invalid_argument("size_study: no sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2 || sizes[i] > train.rows())
      throw std::invalid_argument("size_study: sizes must lie in [2, " + std::to_string(train.rows()) + "]");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("size_study: sizes must be increasing");
  }
  if (test.usable_rows() == 0) throw std::invalid_argument("size_study: empty test set");
  const Standardizer st = fit_standardizer(train.usable());
  std::vector<SizeStudyRow> out;
  for (std::size_t size : sizes) {
    const TrainedModel m = train_model(train.head(size), &test, opts, &st);
    out.push_back({size, m.history.back().test_mse, m.history});
  }
  return out;
}

CoverageReport coverage_check(const TrainingSet& train, const PointPattern& p, double alpha) {
  if (p.window() != train.window)
    throw std::invalid_argument("coverage_check: pattern window differs from the training window");
  const Examples raw = train.usable();
  if (raw.size() == 0) throw std::invalid_argument("coverage_check: no usable training rows");

  CoverageReport rep;
  rep.count = static_cast<double>(p.size());
  Eigen::Index below = 0;
  for (Eigen::Index j = 0; j < raw.size(); ++j) below += raw.counts(j) <= rep.count ? 1 : 0;
  rep.count_quantile = static_cast<double>(below) / static_cast<double>(raw.size());
  rep.min_count = raw.counts.minCoeff();
  rep.max_count = raw.counts.maxCoeff();

  const SummaryCurve c = centered_L_or_zero(p, train.r);
  std::vector<Curve> sims(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index j = 0; j < raw.size(); ++j)
    sims[static_cast<std::size_t>(j)].assign(raw.curves.col(j).data(), raw.curves.col(j).data() + raw.curves.rows());
  rep.envelope = global_envelope(train.r, c.values, sims, alpha);
  rep.curve_inside = rep.envelope.data_inside();
  return rep;
}

}  // namespace ppnn
