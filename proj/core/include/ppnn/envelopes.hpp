#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ppnn/model.hpp"
#include "ppnn/random.hpp"
#include "ppnn/sumstats.hpp"

namespace ppnn {

using Curve = std::vector<double>;

// Pointwise two-sided midranks min(rank from below, rank from above) among
// all curves, sorted ascending per curve.
std::vector<std::vector<double>> erl_rank_vectors(const std::vector<Curve>& curves);

// Extreme rank length measure of each curve: the fraction of curves whose
// sorted rank vector is lexicographically <= its own, i.e. at least as
// extreme. Smaller is more extreme; tied curves share a value.
std::vector<double> erl_ordering(const std::vector<Curve>& curves);

struct EnvelopeResult {
  std::vector<double> r;
  std::vector<double> lower;
  std::vector<double> central;  // pointwise mean of the simulations inside the envelope set
  std::vector<double> upper;
  std::vector<double> data;
  double p_value = 1.0;
  double alpha = 0.05;
  int n_sim = 0;
  // Curves (data included) whose measure admits them to the envelope set.
  std::size_t curves_in_envelope = 0;
  std::vector<std::string> warnings;

  // Data curve within [lower, upper] at every r.
  bool data_inside() const;
};

// The data curve is ranked together with the simulations. The envelope is the
// pointwise range of the ceil((1 - alpha)(N + 1)) least extreme curves,
// enlarged to include every curve tied with the last one admitted.
// p = (1 + #{simulations at least as extreme as the data}) / (N + 1).
EnvelopeResult global_envelope(std::span<const double> r, std::span<const double> data,
                               const std::vector<Curve>& sims, double alpha = 0.05);

// As above on the intersection of the valid ranges of all curves. Throws
// std::invalid_argument when the r grids differ or the intersection is empty.
EnvelopeResult global_envelope(const SummaryCurve& data, const std::vector<SummaryCurve>& sims,
                               double alpha = 0.05);

inline constexpr int kDefaultEnvelopeSimulations = 2499;

struct ValidationOptions {
  int n_sim = kDefaultEnvelopeSimulations;
  StatKind stat = StatKind::J;
  double alpha = 0.05;
  // Empty selects the recommended grid for the statistic: the nearest
  // neighbour range for F, G and J, a quarter of the shorter side otherwise.
  std::vector<double> r;
  int curve_length = kDefaultCurveLength;
  unsigned threads = 0;
};

// r grid used by validate_fit for a given pattern.
std::vector<double> validation_r_grid(const PointPattern& p, StatKind stat, int m = kDefaultCurveLength);

// Simulates opts.n_sim patterns from the fitted model, each on its own
// substream of a master seed drawn from rng, and runs the global envelope
// test for the chosen statistic. A simulated pattern for which the statistic
// is undefined is redrawn from a fresh substream.
EnvelopeResult validate_fit(const PointPattern& pattern, const ModelSpec& spec, std::span<const double> theta,
                            Rng& rng, const ValidationOptions& opts = {});

}  // namespace ppnn
