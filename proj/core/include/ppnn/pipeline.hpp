#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ppnn/dataset.hpp"
#include "ppnn/envelopes.hpp"
#include "ppnn/model.hpp"
#include "ppnn/nn.hpp"

namespace ppnn {

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
  ModelSpec model;
  Window window = Window::unit_square();
  std::vector<ParamRange> ranges;  // one per parameter, canonical order
  std::size_t n_train = 10'000;
  std::size_t n_test = 5'000;
  int curve_length = kDefaultCurveLength;
  double r_max = 0.0;  // 0 selects a quarter of the shorter window side
  int epochs = 20;
  int batch_size = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 uses every hardware thread

  std::vector<double> r_grid() const;
  // Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

// Study set-ups: "lgcp", "strauss", "lgcp-strauss" on the unit square and
// "oak" (LGCP-Strauss on the 125 x 188 m stand).
RunConfig preset_config(std::string_view name);

// JSON object with any subset of the RunConfig fields; missing fields keep
// the values of `base`. Unknown keys are rejected.
RunConfig config_from_json(std::string_view text, RunConfig base = {});
std::string config_to_json(const RunConfig& cfg);

enum class SeedPurpose : std::uint64_t { TrainingData = 0, TestData = 1, Network = 2 };
// Distinct master seeds for the independent random streams of one run.
std::uint64_t derive_seed(std::uint64_t seed, SeedPurpose purpose);

// ---------------------------------------------------------------------------
// Training data

struct GenerationOptions {
  unsigned threads = 0;
  // Called with the number of finished rows; may run on any worker thread.
  std::function<void(std::size_t)> progress;
};

// Row i draws theta uniformly on the configured ranges and simulates from
// substream(master_seed, i); a failed simulation is retried once on a second
// substream and then flagged as failed. Patterns with fewer than two points
// keep a zero curve and the degenerate flag.
TrainingSet generate_training_data(const RunConfig& cfg, std::size_t rows, std::uint64_t master_seed,
                                   const GenerationOptions& opts = {});

// ---------------------------------------------------------------------------
// Models

struct TrainedModel {
  Network network{NetworkArch::standard(1)};
  Standardizer standardizer;
  ModelSpec spec;
  Window window = Window::unit_square();
  std::vector<double> r;
  std::vector<ParamRange> ranges;
  std::vector<EpochRecord> history;
};

struct TrainingOptions {
  int epochs = 20;
  int batch_size = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;  // network initialization and batch order
  std::function<void(const EpochRecord&)> on_epoch;
};

TrainingOptions training_options(const RunConfig& cfg);

// Fits the standardizer on the usable training rows unless `fixed` is given,
// then trains a freshly initialized standard network.
TrainedModel train_model(const TrainingSet& train, const TrainingSet* test, const TrainingOptions& opts,
                         const Standardizer* fixed = nullptr);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

struct Estimate {
  std::vector<double> theta;
  std::vector<std::string> warnings;
};

// Throws std::invalid_argument when the pattern window differs from the
// training window. Warns on fewer than two points and on a point count more
// than four training standard deviations from the training mean.
Estimate estimate(const TrainedModel& model, const PointPattern& p);

// ---------------------------------------------------------------------------
// Evaluation

struct ParameterError {
  std::string name;
  double rmse = 0.0;
  double bias = 0.0;
  double correlation = 0.0;
  double standardized_mse = 0.0;
};

struct EvaluationReport {
  Eigen::MatrixXd truth;      // k x N
  Eigen::MatrixXd predicted;  // k x N
  std::vector<double> counts;
  std::vector<ParameterError> parameters;
  double standardized_mse = 0.0;  // over all parameters and rows
};

// Errors on the natural scale plus MSE on the training standardization.
EvaluationReport evaluate_predictions(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& predicted,
                                      const Standardizer& st, const std::vector<std::string>& names);
EvaluationReport evaluate_on_test(const TrainedModel& model, const TrainingSet& test);

// Columns: row, count, then true_<name> and est_<name> per parameter.
void write_evaluation_csv(const std::filesystem::path& path, const EvaluationReport& report);

struct SizeStudyRow {
  std::size_t size = 0;
  double test_mse = 0.0;
  std::vector<EpochRecord> history;
};

// One network per size, trained on the first `size` rows with the same
// initialization seed and the standardizer of the full training set.
// Sizes must be increasing and at most the number of training rows.
std::vector<SizeStudyRow> size_study(const TrainingSet& train, const std::vector<std::size_t>& sizes,
                                     const TrainingSet& test, const TrainingOptions& opts);

struct CoverageReport {
  double count = 0.0;
  double count_quantile = 0.0;  // fraction of training counts <= count
  double min_count = 0.0;
  double max_count = 0.0;
  EnvelopeResult envelope;  // centred L of the pattern against the training curves
  bool curve_inside = false;
};

CoverageReport coverage_check(const TrainingSet& train, const PointPattern& p, double alpha = 0.05);

}  // namespace ppnn
