#include "ppnn/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ppnn/parallel.hpp"

namespace ppnn {

std::vector<std::vector<double>> erl_rank_vectors(const std::vector<Curve>& curves) {
  const std::size_t s = curves.size();
  if (s == 0) return {};
  const std::size_t m = curves.front().size();
  for (const auto& c : curves)
    if (c.size() != m) throw std::invalid_argument("erl: curves must share one grid");

  std::vector<std::vector<double>> ranks(s, std::vector<double>(m));
  std::vector<std::size_t> order(s);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return curves[a][k] < curves[b][k]; });
    std::size_t i = 0;
    while (i < s) {
      std::size_t j = i;
      while (j + 1 < s && curves[order[j + 1]][k] == curves[order[i]][k]) ++j;
      // Positions i..j (0-based) share the midrank.
      const double low = 0.5 * static_cast<double>(i + j) + 1.0;
      const double high = static_cast<double>(s) + 1.0 - low;
      for (std::size_t t = i; t <= j; ++t) ranks[order[t]][k] = std::min(low, high);
      i = j + 1;
    }
  }
  for (auto& v : ranks) std::sort(v.begin(), v.end());
  return ranks;
}

std::vector<double> erl_ordering(const std::vector<Curve>& curves) {
  const auto ranks = erl_rank_vectors(curves);
  const std::size_t s = ranks.size();
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ranks[a] < ranks[b]; });
  std::vector<double> measure(s);
  std::size_t i = 0;
  while (i < s) {
    std::size_t j = i;
    while (j + 1 < s && ranks[order[j + 1]] == ranks[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) measure[order[t]] = static_cast<double>(j + 1) / static_cast<double>(s);
    i = j + 1;
  }
  return measure;
}

bool EnvelopeResult::data_inside() const {
  for (std::size_t k = 0; k < data.size(); ++k)
    if (data[k] < lower[k] || data[k] > upper[k]) return false;
  return true;
}

EnvelopeResult global_envelope(std::span<const double> r, std::span<const double> data,
                               const std::vector<Curve>& sims, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("global_envelope: alpha must be in (0, 1)");
  if (sims.empty()) throw std::invalid_argument("global_envelope: no simulated curves");
  if (data.size() != r.size() || r.empty()) throw std::invalid_argument("global_envelope: grid mismatch");
  for (const auto& c : sims)
    if (c.size() != r.size()) throw std::invalid_argument("global_envelope: grid mismatch");

  const std::size_t n_sim = sims.size();
  const std::size_t total = n_sim + 1;
  EnvelopeResult res;
  res.r.assign(r.begin(), r.end());
  res.data.assign(data.begin(), data.end());
  res.alpha = alpha;
  res.n_sim = static_cast<int>(n_sim);
  if (static_cast<double>(total) * alpha < 5.0) {
    res.warnings.push_back("only " + std::to_string(n_sim) + " simulations for alpha " + std::to_string(alpha) +
                           "; the envelope is coarse");
  }

  std::vector<Curve> curves;
  curves.reserve(total);
  curves.emplace_back(data.begin(), data.end());
  curves.insert(curves.end(), sims.begin(), sims.end());
  const auto measure = erl_ordering(curves);
  res.p_value = measure[0];

  const double target = (1.0 - alpha) * static_cast<double>(total);
  const auto keep = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(target - 1e-9)), 1, total);
  std::vector<double> sorted = measure;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double threshold = sorted[keep - 1];

  const std::size_t m = r.size();
  res.lower.assign(m, std::numeric_limits<double>::infinity());
  res.upper.assign(m, -std::numeric_limits<double>::infinity());
  res.central.assign(m, 0.0);
  std::size_t sims_in = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (measure[i] < threshold) continue;
    ++res.curves_in_envelope;
    for (std::size_t k = 0; k < m; ++k) {
      res.lower[k] = std::min(res.lower[k], curves[i][k]);
      res.upper[k] = std::max(res.upper[k], curves[i][k]);
    }
    if (i == 0) continue;
    ++sims_in;
    for (std::size_t k = 0; k < m; ++k) res.central[k] += curves[i][k];
  }
  for (auto& v : res.central) v /= static_cast<double>(std::max<std::size_t>(sims_in, 1));
  return res;
}

EnvelopeResult global_envelope(const SummaryCurve& data, const std::vector<SummaryCurve>& sims, double alpha) {
  for (const auto& c : sims)
    if (c.r != data.r) throw std::invalid_argument("global_envelope: curves use different r grids");

  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < data.size(); ++k) {
    bool ok = data.valid_at(k);
    for (std::size_t i = 0; ok && i < sims.size(); ++i) ok = sims[i].valid_at(k);
    if (ok) keep.push_back(k);
  }
  if (keep.empty()) throw std::invalid_argument("global_envelope: curves share no valid r range");

  auto select = [&](const std::vector<double>& v) {
    Curve out(keep.size());
    for (std::size_t t = 0; t < keep.size(); ++t) out[t] = v[keep[t]];
    return out;
  };
  std::vector<Curve> sim_values;
  sim_values.reserve(sims.size());
  for (const auto& c : sims) sim_values.push_back(select(c.values));
  return global_envelope(select(data.r), select(data.values), sim_values, alpha);
}

std::vector<double> validation_r_grid(const PointPattern& p, StatKind stat, int m) {
  switch (stat) {
    case StatKind::F:
    case StatKind::G:
    case StatKind::J: return nearest_neighbour_r_grid(p.window(), p.intensity(), m);
    case StatKind::K:
    case StatKind::LCentered: return default_r_grid(p.window(), m);
  }
  throw std::invalid_argument("validation_r_grid: bad statistic");
}

EnvelopeResult validate_fit(const PointPattern& pattern, const ModelSpec& spec, std::span<const double> theta,
                            Rng& rng, const ValidationOptions& opts) {
  validate_parameters(spec.kind, theta);
  if (opts.n_sim < 1) throw std::invalid_argument("validate_fit: n_sim must be >= 1");
  const std::vector<double> r = opts.r.empty() ? validation_r_grid(pattern, opts.stat, opts.curve_length) : opts.r;
  const SummaryCurve data = estimate_statistic(opts.stat, pattern, r);

  const std::uint64_t master = rng();
  const std::vector<double> params(theta.begin(), theta.end());
  FieldCache cache;
  std::vector<SummaryCurve> sims(static_cast<std::size_t>(opts.n_sim));
  parallel_for(sims.size(), opts.threads, [&](std::size_t i) {
    constexpr int kAttempts = 20;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      Rng g = substream(master + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL, i);
      const PointPattern x = simulate_model(spec, pattern.window(), params, g, &cache);
      try {
        SummaryCurve c = estimate_statistic(opts.stat, x, r);
        if (c.valid_max < c.valid_min) continue;
        sims[i] = std::move(c);
        return;
      } catch (const DegeneratePattern&) {
      }
    }
    throw std::runtime_error("validate_fit: statistic undefined for " + std::to_string(kAttempts) +
                             " consecutive simulations");
  });
  return global_envelope(data, sims, opts.alpha);
}

}  // namespace ppnn
