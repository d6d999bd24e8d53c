// ppp: simulate, summarize, train and validate spatial point process models.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ppnn/baselines.hpp"
#include "ppnn/dataset.hpp"
#include "ppnn/envelopes.hpp"
#include "ppnn/io.hpp"
#include "ppnn/model.hpp"
#include "ppnn/pipeline.hpp"
#include "ppnn/sumstats.hpp"

namespace {

using namespace ppnn;
using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_json(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot open " + out + " for writing");
  f << j.dump(2) << '\n';
}

std::vector<ParamRange> parse_ranges(const std::string& text) {
  // "lo:hi,lo:hi,..."
  std::vector<ParamRange> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("ranges need lo:hi pairs");
    out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

PointPattern read_pattern(const std::string& path, const std::string& window) {
  return read_pattern_csv(path, window.empty() ? std::nullopt : std::optional<Window>(parse_window(window)));
}

// RunConfig fields shared by make-data, train and size-study. Flags override
// the config file, which overrides the preset.
struct ConfigFlags {
  std::string file, preset, model, window, ranges;
  std::optional<std::size_t> n_train, n_test;
  std::optional<int> curve_length, epochs, batch, field_resolution;
  std::optional<double> r_max, lr;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<long> iters;

  void add(CLI::App* app) {
    app->add_option("--config", file, "JSON file with RunConfig fields");
    app->add_option("--preset", preset, "lgcp, strauss, lgcp-strauss or oak");
    app->add_option("--model", model, "lgcp, strauss or lgcp-strauss");
    app->add_option("--window", window, "x_min,x_max,y_min,y_max");
    app->add_option("--ranges", ranges, "lo:hi per parameter, comma separated");
    app->add_option("--n-train", n_train);
    app->add_option("--n-test", n_test);
    app->add_option("--curve-length", curve_length);
    app->add_option("--r-max", r_max, "0 uses a quarter of the shorter side");
    app->add_option("--epochs", epochs);
    app->add_option("--batch", batch);
    app->add_option("--lr", lr);
    app->add_option("--seed", seed);
    app->add_option("--threads", threads, "0 uses all hardware threads");
    app->add_option("--iters", iters, "MH iterations for Strauss-type models");
    app->add_option("--field-resolution", field_resolution);
  }

  RunConfig resolve() const {
    RunConfig c = preset.empty() ? preset_config("lgcp") : preset_config(preset);
    if (!file.empty()) c = config_from_json(read_text(file), c);
    if (!model.empty()) {
      const ModelKind kind = parse_model_kind(model);
      if (kind != c.model.kind && ranges.empty())
        throw std::invalid_argument("--model changes the parameter set; give --ranges too");
      c.model.kind = kind;
    }
    if (!window.empty()) c.window = parse_window(window);
    if (!ranges.empty()) c.ranges = parse_ranges(ranges);
    if (n_train) c.n_train = *n_train;
    if (n_test) c.n_test = *n_test;
    if (curve_length) c.curve_length = *curve_length;
    if (r_max) c.r_max = *r_max;
    if (epochs) c.epochs = *epochs;
    if (batch) c.batch_size = *batch;
    if (lr) c.learning_rate = *lr;
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    if (iters) {
      c.model.sim.strauss_iterations = *iters;
      c.model.sim.lgcp_strauss_iterations = *iters;
    }
    if (field_resolution) c.model.sim.field_resolution = *field_resolution;
    c.validate();
    return c;
  }
};

// "poisson" is accepted as LGCP with sigma2 = 0 and a single intensity parameter.
std::pair<ModelSpec, std::vector<double>> resolve_model(const std::string& name, const std::string& params) {
  ModelSpec spec;
  if (name == "poisson") {
    std::string v = params;
    if (const auto eq = v.find('='); eq != std::string::npos) v = v.substr(eq + 1);
    const double lambda = std::stod(v);
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson intensity must be > 0");
    spec.kind = ModelKind::Lgcp;
    return {spec, {std::log(lambda), 0.0, 1.0}};
  }
  spec.kind = parse_model_kind(name);
  return {spec, parse_parameters(spec.kind, params)};
}

void print_curve(std::ostream& out, const SummaryCurve& c) {
  out << "r,value,valid\n";
  for (std::size_t k = 0; k < c.size(); ++k)
    out << fmt(c.r[k]) << ',' << fmt(c.values[k]) << ',' << (c.valid_at(k) ? 1 : 0) << '\n';
}

json theta_json(ModelKind kind, std::span<const double> theta) {
  json j = json::object();
  const auto& names = parameter_names(kind);
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = theta[i];
  return j;
}

void progress_line(std::size_t done, std::size_t total) {
  if (done == total || done % std::max<std::size_t>(total / 20, 1) == 0)
    std::cerr << "\r  " << done << " / " << total << (done == total ? "\n" : "") << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial point process parameter estimation with neural networks"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw one pattern from a model");
  std::string sim_model, sim_params, sim_out, sim_window = "0,1,0,1", sim_trace;
  std::uint64_t sim_seed = 1;
  std::optional<long> sim_iters;
  long sim_thin = 100;
  int sim_res = kDefaultFieldResolution;
  sim->add_option("--model", sim_model, "lgcp, strauss, lgcp-strauss or poisson")->required();
  sim->add_option("--params", sim_params, "comma separated, positional or name=value")->required();
  sim->add_option("--seed", sim_seed);
  sim->add_option("--iters", sim_iters, "MH iterations");
  sim->add_option("--window", sim_window);
  sim->add_option("--field-resolution", sim_res);
  sim->add_option("--out", sim_out, "pattern CSV (window sidecar written alongside)")->required();
  sim->add_option("--trace", sim_trace, "MH trace CSV: iter,n,s_r");
  sim->add_option("--thin", sim_thin, "trace thinning");

  // summarize
  auto* sum = app.add_subcommand("summarize", "Estimate a summary function");
  std::string sum_stat = "K", sum_pattern, sum_window, sum_out;
  int sum_m = kDefaultCurveLength;
  double sum_rmax = 0.0;
  sum->add_option("--stat", sum_stat, "K, L, F, G or J");
  sum->add_option("pattern", sum_pattern)->required();
  sum->add_option("--window", sum_window);
  sum->add_option("--points", sum_m, "grid length");
  sum->add_option("--r-max", sum_rmax, "0 uses the recommended range");
  sum->add_option("--out", sum_out, "CSV path; stdout if omitted");

  // make-data
  auto* mk = app.add_subcommand("make-data", "Simulate training and test sets");
  ConfigFlags mk_cfg;
  mk_cfg.add(mk);
  std::string mk_out, mk_test_out;
  mk->add_option("--out", mk_out, "training set file")->required();
  mk->add_option("--test-out", mk_test_out, "test set file (n_test rows)");

  // train
  auto* tr = app.add_subcommand("train", "Train a network on a training set");
  ConfigFlags tr_cfg;
  tr_cfg.add(tr);
  std::string tr_data, tr_test, tr_out, tr_history;
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--test", tr_test);
  tr->add_option("--out", tr_out, "model file")->required();
  tr->add_option("--history", tr_history, "CSV epoch,train_mse,test_mse (default history.csv)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Error table of a model on a test set");
  std::string ev_net, ev_data, ev_out;
  ev->add_option("--net", ev_net, "model file")->required();
  ev->add_option("--data", ev_data, "test set file")->required();
  ev->add_option("--out", ev_out, "per-row CSV: row,count,true_<p>,est_<p>,...");

  // estimate
  auto* es = app.add_subcommand("estimate", "Estimate parameters of an observed pattern");
  std::string es_net, es_pattern, es_window, es_out;
  es->add_option("--net", es_net, "model file")->required();
  es->add_option("pattern", es_pattern)->required();
  es->add_option("--window", es_window);
  es->add_option("--out", es_out, "JSON path; stdout if omitted");

  // baseline
  auto* bl = app.add_subcommand("baseline", "Classical estimators");
  std::string bl_method, bl_pattern, bl_window, bl_out, bl_rgrid;
  bl->add_option("--method", bl_method, "mincontrast or mple")->required();
  bl->add_option("pattern", bl_pattern)->required();
  bl->add_option("--window", bl_window);
  bl->add_option("--r-grid", bl_rgrid, "mple: comma separated R values");
  bl->add_option("--out", bl_out, "JSON path; stdout if omitted");

  // envelope
  auto* en = app.add_subcommand("envelope", "Global envelope test of a fitted model");
  std::string en_stat = "J", en_model, en_params, en_pattern, en_window, en_out;
  int en_nsim = kDefaultEnvelopeSimulations, en_res = kDefaultFieldResolution;
  double en_alpha = 0.05;
  std::uint64_t en_seed = 1;
  unsigned en_threads = 0;
  std::optional<long> en_iters;
  en->add_option("--stat", en_stat, "K, L, F, G or J");
  en->add_option("--nsim", en_nsim);
  en->add_option("--alpha", en_alpha);
  en->add_option("--model", en_model, "lgcp, strauss, lgcp-strauss or poisson")->required();
  en->add_option("--params", en_params)->required();
  en->add_option("pattern", en_pattern)->required();
  en->add_option("--window", en_window);
  en->add_option("--seed", en_seed);
  en->add_option("--threads", en_threads);
  en->add_option("--iters", en_iters);
  en->add_option("--field-resolution", en_res);
  en->add_option("--out", en_out, "CSV r,lower,central,upper,data");

  // size-study
  auto* ss = app.add_subcommand("size-study", "Test MSE against training set size");
  ConfigFlags ss_cfg;
  ss_cfg.add(ss);
  std::string ss_data, ss_test, ss_sizes, ss_out;
  ss->add_option("--data", ss_data)->required();
  ss->add_option("--test", ss_test)->required();
  ss->add_option("--sizes", ss_sizes, "increasing, comma separated")->required();
  ss->add_option("--out", ss_out, "CSV size,test_mse; stdout if omitted");

  // coverage-check
  auto* cc = app.add_subcommand("coverage-check", "Is a pattern covered by the training data?");
  std::string cc_data, cc_pattern, cc_window, cc_out;
  double cc_alpha = 0.05;
  cc->add_option("--data", cc_data, "training set file")->required();
  cc->add_option("pattern", cc_pattern)->required();
  cc->add_option("--window", cc_window);
  cc->add_option("--alpha", cc_alpha);
  cc->add_option("--out", cc_out, "envelope CSV r,lower,central,upper,data");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      auto [spec, theta] = resolve_model(sim_model, sim_params);
      spec.sim.field_resolution = sim_res;
      const Window w = parse_window(sim_window);
      Rng rng = substream(sim_seed, 0);
      ChainTrace trace;
      trace.thin = sim_thin;
      PointPattern x = [&] {
        if (spec.kind == ModelKind::Lgcp) {
          if (!sim_trace.empty()) throw std::invalid_argument("--trace needs a Strauss-type model");
          return simulate_model(spec, w, theta, rng);
        }
        McmcOptions opts;
        opts.iterations = sim_iters.value_or(spec.kind == ModelKind::Strauss ? kStraussIterations
                                                                             : kLgcpStraussIterations);
        opts.thin = sim_thin;
        opts.trace = sim_trace.empty() ? nullptr : &trace;
        if (spec.kind == ModelKind::Strauss) return sample_strauss(w, strauss_params(theta), rng, opts);
        return sample_lgcp_strauss(w, lgcp_strauss_params(theta), sim_res, rng, opts);
      }();
      write_pattern_csv(sim_out, x);
      if (!sim_trace.empty()) {
        CsvWriter csv(sim_trace, {"iter", "n", "s_r"});
        for (const auto& t : trace.samples)
          csv.row({static_cast<double>(t.iteration), static_cast<double>(t.n), static_cast<double>(t.close_pairs)});
      }
      std::cerr << x.size() << " points written to " << sim_out << '\n';
    } else if (*sum) {
      const StatKind stat = parse_stat_kind(sum_stat);
      const PointPattern p = read_pattern(sum_pattern, sum_window);
      std::vector<double> r;
      if (sum_rmax > 0.0) {
        for (int i = 0; i < sum_m; ++i) r.push_back(sum_rmax * i / (sum_m - 1));
      } else {
        r = validation_r_grid(p, stat, sum_m);
      }
      const SummaryCurve c = estimate_statistic(stat, p, r);
      if (sum_out.empty()) {
        print_curve(std::cout, c);
      } else {
        write_curve_csv(sum_out, c);
      }
    } else if (*mk) {
      const RunConfig cfg = mk_cfg.resolve();
      std::cerr << "training set: " << cfg.n_train << " rows\n";
      GenerationOptions g;
      g.threads = cfg.threads;
      g.progress = [&](std::size_t d) { progress_line(d, cfg.n_train); };
      TrainingSet train = generate_training_data(cfg, cfg.n_train, derive_seed(cfg.seed, SeedPurpose::TrainingData), g);
      save_dataset(mk_out, train);
      std::cerr << train.failures.size() << " failed rows\n";
      if (!mk_test_out.empty()) {
        std::cerr << "test set: " << cfg.n_test << " rows\n";
        g.progress = [&](std::size_t d) { progress_line(d, cfg.n_test); };
        save_dataset(mk_test_out,
                     generate_training_data(cfg, cfg.n_test, derive_seed(cfg.seed, SeedPurpose::TestData), g));
      }
    } else if (*tr) {
      const RunConfig cfg = tr_cfg.resolve();
      const TrainingSet train = load_dataset(tr_data);
      std::optional<TrainingSet> test;
      if (!tr_test.empty()) test = load_dataset(tr_test, train.r.size());
      TrainingOptions opts = training_options(cfg);
      opts.on_epoch = [](const EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << "  train " << e.train_mse;
        if (std::isfinite(e.test_mse)) std::cerr << "  test " << e.test_mse;
        std::cerr << '\n';
      };
      const TrainedModel model = train_model(train, test ? &*test : nullptr, opts);
      save_model(tr_out, model);
      CsvWriter csv(tr_history.empty() ? "history.csv" : tr_history, {"epoch", "train_mse", "test_mse"});
      for (const auto& e : model.history) csv.row({static_cast<double>(e.epoch), e.train_mse, e.test_mse});
    } else if (*ev) {
      const TrainedModel model = load_model(ev_net);
      const TrainingSet test = load_dataset(ev_data, model.r.size());
      const EvaluationReport rep = evaluate_on_test(model, test);
      std::cout << "parameter,rmse,bias,correlation,standardized_mse\n";
      for (const auto& p : rep.parameters)
        std::cout << p.name << ',' << fmt(p.rmse) << ',' << fmt(p.bias) << ',' << fmt(p.correlation) << ','
                  << fmt(p.standardized_mse) << '\n';
      std::cout << "overall,,,," << fmt(rep.standardized_mse) << '\n';
      if (!ev_out.empty()) write_evaluation_csv(ev_out, rep);
    } else if (*es) {
      const TrainedModel model = load_model(es_net);
      const PointPattern p = read_pattern(es_pattern, es_window);
      const Estimate e = estimate(model, p);
      for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';
      emit_json({{"model", to_string(model.spec.kind)}, {"n", p.size()}, {"estimate", theta_json(model.spec.kind, e.theta)},
                 {"warnings", e.warnings}},
                es_out);
    } else if (*bl) {
      const PointPattern p = read_pattern(bl_pattern, bl_window);
      if (bl_method == "mincontrast") {
        const MinContrastResult r = minimum_contrast_lgcp(p);
        emit_json({{"method", "mincontrast"},
                   {"model", "lgcp"},
                   {"estimate", {{"mu", r.mu}, {"sigma2", r.sigma2}, {"s", r.s}}},
                   {"contrast", r.contrast},
                   {"evaluations", r.evaluations},
                   {"converged", r.converged}},
                  bl_out);
      } else if (bl_method == "mple") {
        std::vector<double> grid;
        if (bl_rgrid.empty()) {
          grid = default_strauss_r_grid();
        } else {
          std::stringstream ss2(bl_rgrid);
          std::string item;
          while (std::getline(ss2, item, ',')) grid.push_back(std::stod(item));
        }
        const ProfileMpleResult r = profile_mple_strauss(p, grid);
        emit_json({{"method", "mple"},
                   {"model", "strauss"},
                   {"estimate", {{"beta", r.beta}, {"gamma", r.gamma}, {"R", r.R}}},
                   {"converged", r.converged},
                   {"R_grid", r.R_grid},
                   {"log_pl", r.pl_values}},
                  bl_out);
      } else {
        throw std::invalid_argument("--method must be mincontrast or mple");
      }
    } else if (*en) {
      auto [spec, theta] = resolve_model(en_model, en_params);
      spec.sim.field_resolution = en_res;
      if (en_iters) spec.sim.strauss_iterations = spec.sim.lgcp_strauss_iterations = *en_iters;
      const PointPattern p = read_pattern(en_pattern, en_window);
      ValidationOptions opts;
      opts.n_sim = en_nsim;
      opts.stat = parse_stat_kind(en_stat);
      opts.alpha = en_alpha;
      opts.threads = en_threads;
      Rng rng = substream(en_seed, 0);
      const EnvelopeResult res = validate_fit(p, spec, theta, rng, opts);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
      if (!en_out.empty()) {
        CsvWriter csv(en_out, {"r", "lower", "central", "upper", "data"});
        for (std::size_t k = 0; k < res.r.size(); ++k)
          csv.row({res.r[k], res.lower[k], res.central[k], res.upper[k], res.data[k]});
      }
      std::cout << "p_value," << fmt(res.p_value) << "\ninside," << (res.data_inside() ? 1 : 0) << '\n';
    } else if (*ss) {
      const RunConfig cfg = ss_cfg.resolve();
      const TrainingSet train = load_dataset(ss_data);
      const TrainingSet test = load_dataset(ss_test, train.r.size());
      TrainingOptions opts = training_options(cfg);
      const auto rows = size_study(train, parse_sizes(ss_sizes), test, opts);
      std::ostringstream buf;
      buf << "size,test_mse\n";
      for (const auto& r : rows) buf << r.size << ',' << fmt(r.test_mse) << '\n';
      if (ss_out.empty()) {
        std::cout << buf.str();
      } else {
        std::ofstream(ss_out) << buf.str();
      }
    } else if (*cc) {
      const TrainingSet train = load_dataset(cc_data);
      const PointPattern p = read_pattern(cc_pattern, cc_window);
      const CoverageReport rep = coverage_check(train, p, cc_alpha);
      if (!cc_out.empty()) {
        CsvWriter csv(cc_out, {"r", "lower", "central", "upper", "data"});
        const auto& e = rep.envelope;
        for (std::size_t k = 0; k < e.r.size(); ++k) csv.row({e.r[k], e.lower[k], e.central[k], e.upper[k], e.data[k]});
      }
      emit_json({{"count", rep.count},
                 {"count_quantile", rep.count_quantile},
                 {"training_count_range", {rep.min_count, rep.max_count}},
                 {"curve_inside_envelope", rep.curve_inside},
                 {"envelope_p_value", rep.envelope.p_value}},
                "");
    }
  } catch (const std::exception& e) {
    std::cerr << "ppp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
