#include "ppnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"

namespace ppnn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr std::string_view kModelMagic = "PPNNMODL";

void relu_inplace(MatrixXd& m) { m = m.cwiseMax(0.0); }

// Rows l*C .. l*C + C - 1 of the result hold the input shifted by l.
void im2col(const MatrixXd& x, int kernel, MatrixXd& patches) {
  const Index c = x.rows();
  const Index len = x.cols() - kernel + 1;
  patches.resize(c * kernel, len);
  for (int l = 0; l < kernel; ++l) patches.middleRows(l * c, c) = x.middleCols(l, len);
}

void pool_into(const MatrixXd& in, int size, MatrixXd& out, Eigen::MatrixXi& argmax) {
  const Index windows = in.cols() / size;
  out.resize(in.rows(), windows);
  argmax.resize(in.rows(), windows);
  for (Index k = 0; k < windows; ++k) {
    for (Index c = 0; c < in.rows(); ++c) {
      Index best = k * size;
      for (Index j = best + 1; j < (k + 1) * size; ++j)
        if (in(c, j) > in(c, best)) best = j;
      out(c, k) = in(c, best);
      argmax(c, k) = static_cast<int>(best);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Building blocks

MatrixXd conv1d_forward(const MatrixXd& input, const MatrixXd& weights, const VectorXd& bias,
                        int kernel, Activation act) {
  if (kernel < 1 || input.cols() < kernel) throw std::invalid_argument("conv1d: input shorter than kernel");
  if (weights.cols() != input.rows() * kernel || bias.size() != weights.rows())
    throw std::invalid_argument("conv1d: weight shape mismatch");
  MatrixXd patches;
  im2col(input, kernel, patches);
  MatrixXd out = weights * patches;
  out.colwise() += bias;
  if (act == Activation::Relu) relu_inplace(out);
  return out;
}

PoolResult maxpool1d(const MatrixXd& input, int size) {
  if (size < 1) throw std::invalid_argument("maxpool1d: size must be >= 1");
  PoolResult r;
  pool_into(input, size, r.output, r.argmax);
  return r;
}

VectorXd dense_forward(const VectorXd& input, const MatrixXd& weights, const VectorXd& bias,
                       Activation act) {
  if (weights.cols() != input.size() || bias.size() != weights.rows())
    throw std::invalid_argument("dense: weight shape mismatch");
  VectorXd out = weights * input + bias;
  if (act == Activation::Relu) out = out.cwiseMax(0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Architecture

NetworkArch NetworkArch::standard(int outputs, int input_length) {
  NetworkArch a;
  a.input_length = input_length;
  a.conv = {{64, 7, 5}, {64, 7, 5}, {64, 7, 0}};
  a.dense = {64, 32};
  a.outputs = outputs;
  a.count_input = true;
  return a;
}

std::vector<int> NetworkArch::shape_trace() const {
  if (input_length < 1) throw std::invalid_argument("input length must be positive");
  std::vector<int> trace;
  int len = input_length;
  for (const auto& c : conv) {
    if (c.filters < 1 || c.kernel < 1 || c.pool < 0)
      throw std::invalid_argument("invalid convolution layer");
    if (len < c.kernel) throw std::invalid_argument("sequence shorter than convolution kernel");
    len = len - c.kernel + 1;
    trace.push_back(len);
    if (c.pool > 0) {
      len /= c.pool;
      if (len < 1) throw std::invalid_argument("pooling leaves an empty sequence");
      trace.push_back(len);
    }
  }
  return trace;
}

int NetworkArch::flatten_size() const {
  const auto trace = shape_trace();
  const int len = trace.empty() ? input_length : trace.back();
  const int channels = conv.empty() ? 1 : conv.back().filters;
  return len * channels;
}

void NetworkArch::validate() const {
  shape_trace();
  if (outputs < 1) throw std::invalid_argument("network needs at least one output");
  for (int d : dense)
    if (d < 1) throw std::invalid_argument("dense layer width must be positive");
}

std::size_t NetworkArch::parameter_count() const {
  validate();
  std::size_t total = 0;
  int channels = 1;
  for (const auto& c : conv) {
    total += static_cast<std::size_t>(c.filters) * (static_cast<std::size_t>(c.kernel) * channels + 1);
    channels = c.filters;
  }
  int width = flatten_size() + (count_input ? 1 : 0);
  for (int d : dense) {
    total += static_cast<std::size_t>(d) * (static_cast<std::size_t>(width) + 1);
    width = d;
  }
  total += static_cast<std::size_t>(outputs) * (static_cast<std::size_t>(width) + 1);
  return total;
}

// ---------------------------------------------------------------------------
// Network

struct Network::Trace {
  std::vector<MatrixXd> patches;  // per conv layer
  std::vector<MatrixXd> pre;      // conv pre-activations
  std::vector<MatrixXd> post;     // conv outputs after activation and pooling
  std::vector<Eigen::MatrixXi> argmax;
  std::vector<VectorXd> dense_in;
  std::vector<VectorXd> dense_pre;
};

Network::Network(NetworkArch arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t pos = 0;
  Index channels = 1;
  for (const auto& c : arch_.conv) {
    Offsets o;
    o.rows = c.filters;
    o.cols = channels * c.kernel;
    o.weights = pos;
    pos += static_cast<std::size_t>(o.rows * o.cols);
    o.bias = pos;
    pos += static_cast<std::size_t>(o.rows);
    conv_offsets_.push_back(o);
    channels = c.filters;
  }
  Index width = arch_.flatten_size() + (arch_.count_input ? 1 : 0);
  std::vector<int> widths = arch_.dense;
  widths.push_back(arch_.outputs);
  for (int d : widths) {
    Offsets o;
    o.rows = d;
    o.cols = width;
    o.weights = pos;
    pos += static_cast<std::size_t>(o.rows * o.cols);
    o.bias = pos;
    pos += static_cast<std::size_t>(o.rows);
    dense_offsets_.push_back(o);
    width = d;
  }
  params_.assign(pos, 0.0);
}

void Network::initialize(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  auto fill = [&](const Offsets& o, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Index i = 0; i < o.rows * o.cols; ++i) params_[o.weights + static_cast<std::size_t>(i)] = u(rng);
  };
  for (std::size_t l = 0; l < conv_offsets_.size(); ++l) {
    const auto& o = conv_offsets_[l];
    const double q = arch_.conv[l].kernel;
    fill(o, static_cast<double>(o.cols), q * static_cast<double>(o.rows));
  }
  for (const auto& o : dense_offsets_) fill(o, static_cast<double>(o.cols), static_cast<double>(o.rows));
}

Eigen::Map<MatrixXd> Network::conv_weights(std::size_t l) {
  const auto& o = conv_offsets_.at(l);
  return {params_.data() + o.weights, o.rows, o.cols};
}
Eigen::Map<VectorXd> Network::conv_bias(std::size_t l) {
  const auto& o = conv_offsets_.at(l);
  return {params_.data() + o.bias, o.rows};
}
Eigen::Map<MatrixXd> Network::dense_weights(std::size_t l) {
  const auto& o = dense_offsets_.at(l);
  return {params_.data() + o.weights, o.rows, o.cols};
}
Eigen::Map<VectorXd> Network::dense_bias(std::size_t l) {
  const auto& o = dense_offsets_.at(l);
  return {params_.data() + o.bias, o.rows};
}
Eigen::Map<const MatrixXd> Network::conv_weights(std::size_t l) const {
  const auto& o = conv_offsets_.at(l);
  return {params_.data() + o.weights, o.rows, o.cols};
}
Eigen::Map<const VectorXd> Network::conv_bias(std::size_t l) const {
  const auto& o = conv_offsets_.at(l);
  return {params_.data() + o.bias, o.rows};
}
Eigen::Map<const MatrixXd> Network::dense_weights(std::size_t l) const {
  const auto& o = dense_offsets_.at(l);
  return {params_.data() + o.weights, o.rows, o.cols};
}
Eigen::Map<const VectorXd> Network::dense_bias(std::size_t l) const {
  const auto& o = dense_offsets_.at(l);
  return {params_.data() + o.bias, o.rows};
}

void Network::run(const double* curve, double count, Trace* t, VectorXd& out) const {
  const std::size_t nconv = arch_.conv.size();
  const std::size_t ndense = dense_offsets_.size();
  Trace local;
  Trace& tr = t ? *t : local;
  tr.patches.resize(nconv);
  tr.pre.resize(nconv);
  tr.post.resize(nconv);
  tr.argmax.resize(nconv);
  tr.dense_in.resize(ndense);
  tr.dense_pre.resize(ndense);

  MatrixXd x = Eigen::Map<const Eigen::RowVectorXd>(curve, arch_.input_length);
  for (std::size_t l = 0; l < nconv; ++l) {
    const auto& spec = arch_.conv[l];
    const MatrixXd& in = l == 0 ? x : tr.post[l - 1];
    im2col(in, spec.kernel, tr.patches[l]);
    tr.pre[l].noalias() = conv_weights(l) * tr.patches[l];
    tr.pre[l].colwise() += conv_bias(l);
    if (spec.pool > 0) {
      pool_into(tr.pre[l].cwiseMax(0.0), spec.pool, tr.post[l], tr.argmax[l]);
    } else {
      tr.post[l] = tr.pre[l].cwiseMax(0.0);
    }
  }

  const MatrixXd& last = nconv == 0 ? x : tr.post[nconv - 1];
  VectorXd& h0 = tr.dense_in[0];
  h0.resize(last.size() + (arch_.count_input ? 1 : 0));
  h0.head(last.size()) = Eigen::Map<const VectorXd>(last.data(), last.size());
  if (arch_.count_input) h0(last.size()) = count;

  for (std::size_t d = 0; d < ndense; ++d) {
    tr.dense_pre[d].noalias() = dense_weights(d) * tr.dense_in[d];
    tr.dense_pre[d] += dense_bias(d);
    if (d + 1 < ndense) {
      tr.dense_in[d + 1] = tr.dense_pre[d].cwiseMax(0.0);
    }
  }
  out = tr.dense_pre[ndense - 1];
}

void Network::backprop(const Trace& tr, const VectorXd& d_out, double* grad) const {
  const std::size_t nconv = arch_.conv.size();
  const std::size_t ndense = dense_offsets_.size();

  VectorXd delta = d_out;
  for (std::size_t d = ndense; d-- > 0;) {
    const auto& o = dense_offsets_[d];
    if (d + 1 < ndense) delta = delta.cwiseProduct((tr.dense_pre[d].array() > 0.0).cast<double>().matrix());
    Eigen::Map<MatrixXd>(grad + o.weights, o.rows, o.cols).noalias() += delta * tr.dense_in[d].transpose();
    Eigen::Map<VectorXd>(grad + o.bias, o.rows) += delta;
    if (d > 0 || nconv > 0) delta = dense_weights(d).transpose() * delta;
  }
  if (nconv == 0) return;

  const MatrixXd& last = tr.post[nconv - 1];
  MatrixXd d_post = Eigen::Map<const MatrixXd>(delta.data(), last.rows(), last.cols());
  for (std::size_t l = nconv; l-- > 0;) {
    const auto& spec = arch_.conv[l];
    const auto& o = conv_offsets_[l];
    MatrixXd d_pre;
    if (spec.pool > 0) {
      d_pre.setZero(tr.pre[l].rows(), tr.pre[l].cols());
      for (Index k = 0; k < d_post.cols(); ++k)
        for (Index c = 0; c < d_post.rows(); ++c) d_pre(c, tr.argmax[l](c, k)) += d_post(c, k);
    } else {
      d_pre = std::move(d_post);
    }
    d_pre.array() *= (tr.pre[l].array() > 0.0).cast<double>();
    Eigen::Map<MatrixXd>(grad + o.weights, o.rows, o.cols).noalias() += d_pre * tr.patches[l].transpose();
    Eigen::Map<VectorXd>(grad + o.bias, o.rows) += d_pre.rowwise().sum();
    if (l == 0) break;

    const MatrixXd d_patches = conv_weights(l).transpose() * d_pre;
    const Index channels = tr.post[l - 1].rows();
    const Index len = d_pre.cols();
    d_post.setZero(channels, tr.post[l - 1].cols());
    for (int s = 0; s < spec.kernel; ++s) d_post.middleCols(s, len) += d_patches.middleRows(s * channels, channels);
  }
}

VectorXd Network::forward(std::span<const double> curve, double count) const {
  if (curve.size() != static_cast<std::size_t>(arch_.input_length))
    throw std::invalid_argument("forward: curve length " + std::to_string(curve.size()) +
                                " does not match network input " + std::to_string(arch_.input_length));
  VectorXd out;
  run(curve.data(), count, nullptr, out);
  return out;
}

double Network::loss_and_gradient(const Examples& data, std::span<const Index> columns,
                                  std::span<double> grad) const {
  if (data.curves.rows() != arch_.input_length || data.targets.rows() != arch_.outputs)
    throw std::invalid_argument("loss_and_gradient: data shape does not match network");
  if (columns.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const double scale = 1.0 / (static_cast<double>(columns.size()) * arch_.outputs);
  Trace tr;
  VectorXd out;
  double loss = 0.0;
  for (Index j : columns) {
    run(data.curves.col(j).data(), data.counts(j), want_grad ? &tr : nullptr, out);
    const VectorXd err = out - data.targets.col(j);
    loss += err.squaredNorm();
    if (want_grad) backprop(tr, 2.0 * scale * err, grad.data());
  }
  return loss * scale;
}

MatrixXd Network::predict(const Examples& data) const {
  if (data.curves.rows() != arch_.input_length)
    throw std::invalid_argument("predict: curve length does not match network input");
  MatrixXd pred(arch_.outputs, data.size());
  VectorXd out;
  for (Index j = 0; j < data.size(); ++j) {
    run(data.curves.col(j).data(), data.counts(j), nullptr, out);
    pred.col(j) = out;
  }
  return pred;
}

double Network::mean_squared_error(const Examples& data) const {
  return mse_loss(predict(data), data.targets);
}

double mse_loss(const MatrixXd& pred, const MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty input");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Optimizer

AdamState::AdamState(std::size_t size, AdamOptions opts) : opts_(opts), m_(size, 0.0), v_(size, 0.0) {}

void AdamState::update(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("adam: size mismatch");
  ++step_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= opts_.learning_rate * m_hat / (std::sqrt(v_hat) + opts_.epsilon);
  }
}

// ---------------------------------------------------------------------------
// Standardization

Standardizer fit_standardizer(const Examples& raw) {
  const Index n = raw.size();
  if (n < 2) throw std::invalid_argument("fit_standardizer: need at least two examples");
  if (raw.counts.size() != n || raw.targets.cols() != n)
    throw std::invalid_argument("fit_standardizer: inconsistent example counts");
  Standardizer st;

  const double entries = static_cast<double>(raw.curves.size());
  st.curve_mean = raw.curves.sum() / entries;
  st.curve_sd = std::sqrt((raw.curves.array() - st.curve_mean).square().sum() / (entries - 1.0));
  if (!(st.curve_sd > kMinStandardDeviation)) {
    st.warnings.push_back("summary curves have zero spread; using sd = 1");
    st.curve_sd = 1.0;
  }

  const double dn = static_cast<double>(n);
  st.count_mean = raw.counts.mean();
  st.count_sd = std::sqrt((raw.counts.array() - st.count_mean).square().sum() / (dn - 1.0));
  if (!(st.count_sd > kMinStandardDeviation)) {
    st.warnings.push_back("point counts have zero spread; using sd = 1");
    st.count_sd = 1.0;
  }

  for (Index k = 0; k < raw.targets.rows(); ++k) {
    const auto row = raw.targets.row(k).array();
    const double mean = row.mean();
    const double sd = std::sqrt((row - mean).square().sum() / (dn - 1.0));
    if (!(sd > kMinStandardDeviation))
      throw std::invalid_argument("fit_standardizer: parameter " + std::to_string(k) +
                                  " is constant across the training set");
    st.theta_mean.push_back(mean);
    st.theta_sd.push_back(sd);
  }
  return st;
}

Examples standardize(const Examples& raw, const Standardizer& st) {
  if (static_cast<std::size_t>(raw.targets.rows()) != st.theta_mean.size())
    throw std::invalid_argument("standardize: parameter dimension mismatch");
  Examples z;
  z.curves = (raw.curves.array() - st.curve_mean) / st.curve_sd;
  z.counts = (raw.counts.array() - st.count_mean) / st.count_sd;
  z.targets.resize(raw.targets.rows(), raw.targets.cols());
  for (Index k = 0; k < raw.targets.rows(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    z.targets.row(k) = (raw.targets.row(k).array() - st.theta_mean[ku]) / st.theta_sd[ku];
  }
  return z;
}

VectorXd standardize_curve(std::span<const double> curve, const Standardizer& st) {
  VectorXd z(static_cast<Index>(curve.size()));
  for (std::size_t i = 0; i < curve.size(); ++i) z(static_cast<Index>(i)) = (curve[i] - st.curve_mean) / st.curve_sd;
  return z;
}

double standardize_count(double count, const Standardizer& st) {
  return (count - st.count_mean) / st.count_sd;
}

VectorXd destandardize_theta(const VectorXd& z, const Standardizer& st) {
  if (static_cast<std::size_t>(z.size()) != st.theta_mean.size())
    throw std::invalid_argument("destandardize_theta: dimension mismatch");
  VectorXd theta(z.size());
  for (Index k = 0; k < z.size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    theta(k) = z(k) * st.theta_sd[ku] + st.theta_mean[ku];
  }
  return theta;
}

MatrixXd destandardize_theta(const MatrixXd& z, const Standardizer& st) {
  if (static_cast<std::size_t>(z.rows()) != st.theta_mean.size())
    throw std::invalid_argument("destandardize_theta: dimension mismatch");
  MatrixXd theta(z.rows(), z.cols());
  for (Index k = 0; k < z.rows(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    theta.row(k) = z.row(k).array() * st.theta_sd[ku] + st.theta_mean[ku];
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Training

std::vector<EpochRecord> train(Network& net, const Examples& train_set, const Examples* test_set,
                               const TrainOptions& opts, Rng& rng) {
  if (opts.epochs < 1 || opts.batch_size < 1) throw std::invalid_argument("train: epochs and batch size must be positive");
  if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");

  AdamState adam(net.parameter_count(), opts.adam);
  std::vector<double, Eigen::aligned_allocator<double>> grad(net.parameter_count());
  std::vector<Index> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), Index{0});

  std::vector<EpochRecord> history;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t len = std::min(order.size() - start, static_cast<std::size_t>(opts.batch_size));
      const std::span<const Index> batch(order.data() + start, len);
      const double loss = net.loss_and_gradient(train_set, batch, grad);
      adam.update(net.parameters(), grad);
      weighted += loss * static_cast<double>(len);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = weighted / static_cast<double>(order.size());
    rec.test_mse = test_set && test_set->size() > 0 ? net.mean_squared_error(*test_set)
                                                    : std::numeric_limits<double>::quiet_NaN();
    history.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec);
  }
  return history;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

nlohmann::json arch_to_json(const NetworkArch& a) {
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& c : a.conv) conv.push_back({{"filters", c.filters}, {"kernel", c.kernel}, {"pool", c.pool}});
  return {{"input_length", a.input_length}, {"conv", conv},          {"dense", a.dense},
          {"outputs", a.outputs},           {"count_input", a.count_input}};
}

NetworkArch arch_from_json(const nlohmann::json& j) {
  NetworkArch a;
  a.input_length = j.at("input_length").get<int>();
  for (const auto& c : j.at("conv"))
    a.conv.push_back({c.at("filters").get<int>(), c.at("kernel").get<int>(), c.at("pool").get<int>()});
  a.dense = j.at("dense").get<std::vector<int>>();
  a.outputs = j.at("outputs").get<int>();
  a.count_input = j.at("count_input").get<bool>();
  return a;
}

}  // namespace

void save_network(const std::filesystem::path& path, const Network& net, const Standardizer& st,
                  const std::string& metadata_json) {
  nlohmann::json header;
  header["arch"] = arch_to_json(net.arch());
  header["standardizer"] = {{"curve_mean", st.curve_mean}, {"curve_sd", st.curve_sd},
                            {"count_mean", st.count_mean}, {"count_sd", st.count_sd},
                            {"theta_mean", st.theta_mean}, {"theta_sd", st.theta_sd}};
  header["metadata"] = nlohmann::json::parse(metadata_json);

  detail::BinaryWriter w;
  w.bytes(kModelMagic.data(), kModelMagic.size());
  w.value<std::uint32_t>(kModelFormatVersion);
  w.string(header.dump());
  w.doubles(net.parameters());
  // Standardizer doubles are also stored raw so the round trip is bit-exact.
  const double stats[4] = {st.curve_mean, st.curve_sd, st.count_mean, st.count_sd};
  w.bytes(stats, sizeof stats);
  w.doubles(st.theta_mean);
  w.doubles(st.theta_sd);
  w.write_file(path);
}

SavedNetwork load_network(const std::filesystem::path& path) {
  detail::BinaryReader r(path, kModelMagic, kModelFormatVersion);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.string());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(path.string() + ": bad header: " + e.what());
  }

  NetworkArch arch;
  try {
    arch = arch_from_json(header.at("arch"));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(path.string() + ": bad architecture: " + e.what());
  }
  Network net(arch);
  const auto count = r.value<std::uint64_t>();
  if (count != net.parameter_count()) throw CorruptFile(path.string() + ": parameter count mismatch");
  r.bytes(net.parameters().data(), net.parameters().size_bytes());

  Standardizer st;
  double stats[4];
  r.bytes(stats, sizeof stats);
  st.curve_mean = stats[0];
  st.curve_sd = stats[1];
  st.count_mean = stats[2];
  st.count_sd = stats[3];
  for (auto* v : {&st.theta_mean, &st.theta_sd}) {
    const auto k = r.value<std::uint64_t>();
    if (k != static_cast<std::uint64_t>(arch.outputs)) throw CorruptFile(path.string() + ": standardizer size mismatch");
    v->resize(k);
    r.bytes(v->data(), k * sizeof(double));
  }
  if (r.remaining() != 0) throw CorruptFile(path.string() + ": trailing bytes");
  return {std::move(net), std::move(st), header.value("metadata", nlohmann::json::object()).dump()};
}

}  // namespace ppnn
