#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppnn/geometry.hpp"
#include "ppnn/random.hpp"
#include "ppnn/simulate.hpp"

namespace ppnn {

enum class ModelKind { Lgcp, Strauss, LgcpStrauss };

std::string_view to_string(ModelKind kind);
// Accepts "lgcp", "strauss", "lgcp-strauss".
ModelKind parse_model_kind(std::string_view name);

// Canonical parameter order:
//   lgcp          mu, sigma2, s
//   strauss       beta, gamma, R
//   lgcp-strauss  mu, sigma2, s, gamma, R
const std::vector<std::string>& parameter_names(ModelKind kind);
std::size_t parameter_count(ModelKind kind);

struct SimulationSettings {
  int field_resolution = kDefaultFieldResolution;
  FieldMethod field_method = FieldMethod::Circulant;
  long strauss_iterations = kStraussIterations;
  long lgcp_strauss_iterations = kLgcpStraussIterations;
};

struct ModelSpec {
  ModelKind kind = ModelKind::Lgcp;
  SimulationSettings sim;
};

// Throws std::invalid_argument on a wrong count or an invalid value.
void validate_parameters(ModelKind kind, std::span<const double> theta);

GrfParams grf_params(std::span<const double> theta);
StraussParams strauss_params(std::span<const double> theta);
LgcpStraussParams lgcp_strauss_params(std::span<const double> theta);

PointPattern simulate_model(const ModelSpec& spec, const Window& w, std::span<const double> theta,
                            Rng& rng, FieldCache* cache = nullptr);

// Parses "1,2,3" (canonical order) or "mu=1,sigma2=2,s=3" (any order).
std::vector<double> parse_parameters(ModelKind kind, std::string_view text);

}  // namespace ppnn
