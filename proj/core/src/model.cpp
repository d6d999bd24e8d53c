#include "ppnn/model.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace ppnn {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lgcp: return "lgcp";
    case ModelKind::Strauss: return "strauss";
    case ModelKind::LgcpStrauss: return "lgcp-strauss";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lgcp") return ModelKind::Lgcp;
  if (name == "strauss") return ModelKind::Strauss;
  if (name == "lgcp-strauss" || name == "lgcp_strauss") return ModelKind::LgcpStrauss;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

const std::vector<std::string>& parameter_names(ModelKind kind) {
  static const std::vector<std::string> lgcp{"mu", "sigma2", "s"};
  static const std::vector<std::string> strauss{"beta", "gamma", "R"};
  static const std::vector<std::string> hybrid{"mu", "sigma2", "s", "gamma", "R"};
  switch (kind) {
    case ModelKind::Lgcp: return lgcp;
    case ModelKind::Strauss: return strauss;
    case ModelKind::LgcpStrauss: return hybrid;
  }
  throw std::invalid_argument("parameter_names: bad model kind");
}

std::size_t parameter_count(ModelKind kind) { return parameter_names(kind).size(); }

GrfParams grf_params(std::span<const double> theta) {
  if (theta.size() < 3) throw std::invalid_argument("grf_params: need mu, sigma2, s");
  return {theta[0], theta[1], theta[2]};
}

StraussParams strauss_params(std::span<const double> theta) {
  if (theta.size() != 3) throw std::invalid_argument("strauss_params: need beta, gamma, R");
  return {theta[0], theta[1], theta[2]};
}

LgcpStraussParams lgcp_strauss_params(std::span<const double> theta) {
  if (theta.size() != 5)
    throw std::invalid_argument("lgcp_strauss_params: need mu, sigma2, s, gamma, R");
  return {{theta[0], theta[1], theta[2]}, theta[3], theta[4]};
}

void validate_parameters(ModelKind kind, std::span<const double> theta) {
  if (theta.size() != parameter_count(kind)) {
    throw std::invalid_argument("expected " + std::to_string(parameter_count(kind)) +
                                " parameters for " + std::string(to_string(kind)));
  }
  switch (kind) {
    case ModelKind::Lgcp: grf_params(theta).validate(); break;
    case ModelKind::Strauss: strauss_params(theta).validate(); break;
    case ModelKind::LgcpStrauss: lgcp_strauss_params(theta).validate(); break;
  }
}

PointPattern simulate_model(const ModelSpec& spec, const Window& w, std::span<const double> theta,
                            Rng& rng, FieldCache* cache) {
  validate_parameters(spec.kind, theta);
  switch (spec.kind) {
    case ModelKind::Lgcp:
      return sample_lgcp(w, grf_params(theta), spec.sim.field_resolution, rng, cache, spec.sim.field_method);
    case ModelKind::Strauss:
      return sample_strauss(w, strauss_params(theta), rng,
                            {.iterations = spec.sim.strauss_iterations});
    case ModelKind::LgcpStrauss:
      return sample_lgcp_strauss(w, lgcp_strauss_params(theta), spec.sim.field_resolution, rng,
                                 {.iterations = spec.sim.lgcp_strauss_iterations}, cache,
                                 spec.sim.field_method);
  }
  throw std::invalid_argument("simulate_model: bad model kind");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  // from_chars rejects a leading '+'.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_parameters(ModelKind kind, std::string_view text) {
  const auto& names = parameter_names(kind);
  std::vector<std::string_view> items;
  while (!text.empty()) {
    const auto comma = text.find(',');
    items.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (items.size() != names.size()) {
    throw std::invalid_argument("expected " + std::to_string(names.size()) + " parameters (" +
                                std::string(to_string(kind)) + ")");
  }
  std::vector<double> theta(names.size(), 0.0);
  const bool named = items.front().find('=') != std::string_view::npos;
  std::vector<bool> seen(names.size(), false);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!named) {
      theta[i] = to_double(items[i]);
      continue;
    }
    const auto eq = items[i].find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("mixed named/positional parameters");
    const auto key = trim(items[i].substr(0, eq));
    const auto it = std::find(names.begin(), names.end(), key);
    if (it == names.end()) throw std::invalid_argument("unknown parameter '" + std::string(key) + "'");
    const auto k = static_cast<std::size_t>(it - names.begin());
    if (seen[k]) throw std::invalid_argument("duplicate parameter '" + std::string(key) + "'");
    seen[k] = true;
    theta[k] = to_double(items[i].substr(eq + 1));
  }
  validate_parameters(kind, theta);
  return theta;
}

}  // namespace ppnn
