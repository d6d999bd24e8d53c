#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ppnn/random.hpp"

namespace ppnn {

// ---------------------------------------------------------------------------
// Building blocks. Sequences are stored as (channels x length) matrices.
// Convolution weights are (filters x kernel*channels) with column
// l*channels + h holding a^i_{lh}, so that
//   out(i, j) = f(b_i + sum_l sum_h a^i_{lh} in(h, j + l)).

enum class Activation { Identity, Relu };

Eigen::MatrixXd conv1d_forward(const Eigen::MatrixXd& input, const Eigen::MatrixXd& weights,
                               const Eigen::VectorXd& bias, int kernel,
                               Activation act = Activation::Relu);

struct PoolResult {
  Eigen::MatrixXd output;
  Eigen::MatrixXi argmax;  // column index in the input of each maximum
};

// Non-overlapping windows; a trailing remainder shorter than `size` is dropped.
PoolResult maxpool1d(const Eigen::MatrixXd& input, int size);

Eigen::VectorXd dense_forward(const Eigen::VectorXd& input, const Eigen::MatrixXd& weights,
                              const Eigen::VectorXd& bias, Activation act);

// ---------------------------------------------------------------------------
// Architecture

struct ConvSpec {
  int filters = 64;
  int kernel = 7;
  int pool = 0;  // max-pool size applied after the layer; 0 for none

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct NetworkArch {
  int input_length = 513;
  std::vector<ConvSpec> conv;
  std::vector<int> dense;
  int outputs = 1;
  // Append the point count to the flattened convolution output.
  bool count_input = true;

  // Three convolutions (64 filters, kernel 7) with pooling 5 after the first
  // two, then dense 64 and 32 with relu and a linear output layer.
  static NetworkArch standard(int outputs, int input_length = 513);

  // Sequence length after each convolution and after each pooling step, in
  // order. Throws std::invalid_argument for stacks that shrink below a kernel.
  std::vector<int> shape_trace() const;
  int flatten_size() const;
  std::size_t parameter_count() const;
  void validate() const;

  friend bool operator==(const NetworkArch&, const NetworkArch&) = default;
};

// ---------------------------------------------------------------------------
// Network

// A batch of examples, one column per example.
struct Examples {
  Eigen::MatrixXd curves;   // m x N
  Eigen::VectorXd counts;   // N
  Eigen::MatrixXd targets;  // k x N

  Eigen::Index size() const { return curves.cols(); }
};

class Network {
 public:
  explicit Network(NetworkArch arch);

  const NetworkArch& arch() const { return arch_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  // Glorot-uniform weights, zero biases.
  void initialize(Rng& rng);

  Eigen::Map<Eigen::MatrixXd> conv_weights(std::size_t layer);
  Eigen::Map<Eigen::VectorXd> conv_bias(std::size_t layer);
  Eigen::Map<Eigen::MatrixXd> dense_weights(std::size_t layer);  // includes the output layer
  Eigen::Map<Eigen::VectorXd> dense_bias(std::size_t layer);
  Eigen::Map<const Eigen::MatrixXd> conv_weights(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> conv_bias(std::size_t layer) const;
  Eigen::Map<const Eigen::MatrixXd> dense_weights(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> dense_bias(std::size_t layer) const;
  std::size_t dense_layer_count() const { return arch_.dense.size() + 1; }

  Eigen::VectorXd forward(std::span<const double> curve, double count) const;

  // Mean squared error over the selected columns and all outputs. When grad
  // is non-empty it receives d(loss)/d(parameters) (overwritten).
  double loss_and_gradient(const Examples& data, std::span<const Eigen::Index> columns,
                           std::span<double> grad) const;

  double mean_squared_error(const Examples& data) const;
  Eigen::MatrixXd predict(const Examples& data) const;  // k x N

  friend bool operator==(const Network&, const Network&) = default;

 private:
  struct Offsets {
    std::size_t weights = 0;
    std::size_t bias = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;

    friend bool operator==(const Offsets&, const Offsets&) = default;
  };
  struct Trace;

  void run(const double* curve, double count, Trace* trace, Eigen::VectorXd& out) const;
  void backprop(const Trace& trace, const Eigen::VectorXd& d_out, double* grad) const;

  NetworkArch arch_;
  std::vector<Offsets> conv_offsets_;
  std::vector<Offsets> dense_offsets_;
  // Aligned so that vectorized reductions split the same way on every run.
  std::vector<double, Eigen::aligned_allocator<double>> params_;
};

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

class AdamState {
 public:
  AdamState(std::size_t size, AdamOptions opts = {});

  // Bias-corrected Adam step applied in place.
  void update(std::span<double> params, std::span<const double> grads);

  long step() const { return step_; }
  const AdamOptions& options() const { return opts_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamOptions opts_;
  long step_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Standardization

struct Standardizer {
  double curve_mean = 0.0;
  double curve_sd = 1.0;
  double count_mean = 0.0;
  double count_sd = 1.0;
  std::vector<double> theta_mean;
  std::vector<double> theta_sd;
  std::vector<std::string> warnings;

  friend bool operator==(const Standardizer& a, const Standardizer& b) {
    return a.curve_mean == b.curve_mean && a.curve_sd == b.curve_sd &&
           a.count_mean == b.count_mean && a.count_sd == b.count_sd &&
           a.theta_mean == b.theta_mean && a.theta_sd == b.theta_sd;
  }
};

inline constexpr double kMinStandardDeviation = 1e-12;

// Curve statistics are pooled over every example and every r value; count
// and each target component are standardized separately. Sample standard
// deviations (n - 1). A target with zero spread throws; a zero-spread count
// or curve falls back to sd = 1 with a warning.
Standardizer fit_standardizer(const Examples& raw);
Examples standardize(const Examples& raw, const Standardizer& st);
Eigen::VectorXd standardize_curve(std::span<const double> curve, const Standardizer& st);
double standardize_count(double count, const Standardizer& st);
Eigen::VectorXd destandardize_theta(const Eigen::VectorXd& z, const Standardizer& st);
Eigen::MatrixXd destandardize_theta(const Eigen::MatrixXd& z, const Standardizer& st);

// ---------------------------------------------------------------------------
// Training

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;  // NaN without a test set
};

struct TrainOptions {
  int epochs = 20;
  int batch_size = 100;
  AdamOptions adam;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Minibatch Adam on standardized data. Each epoch draws a fresh permutation
// from rng and keeps the last short batch. train_mse is the example-weighted
// mean of the batch losses seen during the epoch; test_mse is evaluated
// after the epoch.
std::vector<EpochRecord> train(Network& net, const Examples& train_set, const Examples* test_set,
                               const TrainOptions& opts, Rng& rng);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct SavedNetwork {
  Network network;
  Standardizer standardizer;
  std::string metadata;  // JSON object text
};

void save_network(const std::filesystem::path& path, const Network& net, const Standardizer& st,
                  const std::string& metadata_json = "{}");
SavedNetwork load_network(const std::filesystem::path& path);

}  // namespace ppnn
