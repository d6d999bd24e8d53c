#include "ppnn/simulate.hpp"

#include <algorithm>
#include <complex>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "ppnn/spatial_index.hpp"

namespace ppnn {

void GrfParams::validate() const {
  if (!std::isfinite(mu)) throw std::invalid_argument("GrfParams: mu must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("GrfParams: sigma2 must be >= 0");
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("GrfParams: s must be > 0");
}

void StraussParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("StraussParams: beta must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("StraussParams: gamma must lie in [0,1]");
  if (!(R >= 0.0) || !std::isfinite(R)) throw std::invalid_argument("StraussParams: R must be >= 0");
}

void LgcpStraussParams::validate() const {
  grf.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("LgcpStraussParams: gamma must lie in [0,1]");
  if (!(R >= 0.0) || !std::isfinite(R))
    throw std::invalid_argument("LgcpStraussParams: R must be >= 0");
}

// ---------------------------------------------------------------------------
// Field grid

FieldGrid::FieldGrid(Window window, int resolution, std::vector<double> values)
    : window_(window), resolution_(resolution), values_(std::move(values)) {
  if (resolution < 1) throw std::invalid_argument("FieldGrid: resolution must be >= 1");
  if (values_.size() != static_cast<std::size_t>(resolution) * resolution) {
    throw std::invalid_argument("FieldGrid: value count does not match resolution");
  }
}

Point FieldGrid::cell_center(int ix, int iy) const {
  return {window_.x_min() + (ix + 0.5) * cell_width(), window_.y_min() + (iy + 0.5) * cell_height()};
}

std::size_t FieldGrid::cell_index(Point u) const {
  const auto axis = [&](double v, double lo, double cell) {
    const double c = std::floor((v - lo) / cell);
    return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(resolution_ - 1)));
  };
  return axis(u.y, window_.y_min(), cell_height()) * resolution_ +
         axis(u.x, window_.x_min(), cell_width());
}

double FieldGrid::value_at(Point u) const { return values_[cell_index(u)]; }

// ---------------------------------------------------------------------------
// Correlation factors

namespace {

Eigen::MatrixXd correlation_matrix(const Window& w, int res, double s) {
  const double cw = w.width() / res;
  const double ch = w.height() / res;
  // Correlation depends only on the cell offsets (|dix|, |diy|).
  Eigen::MatrixXd table(res, res);
  for (int dy = 0; dy < res; ++dy)
    for (int dx = 0; dx < res; ++dx)
      table(dx, dy) = std::exp(-std::hypot(dx * cw, dy * ch) / s);

  const Eigen::Index n = static_cast<Eigen::Index>(res) * res;
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const int bx = static_cast<int>(b % res), by = static_cast<int>(b / res);
    for (Eigen::Index a = 0; a < n; ++a) {
      const int ax = static_cast<int>(a % res), ay = static_cast<int>(a / res);
      c(a, b) = table(std::abs(ax - bx), std::abs(ay - by));
    }
  }
  return c;
}

}  // namespace

CorrelationFactor correlation_factor(const Window& w, int resolution, double s, double nugget) {
  if (resolution < 1) throw std::invalid_argument("correlation_factor: resolution must be >= 1");
  if (!(s > 0.0)) throw std::invalid_argument("correlation_factor: s must be > 0");

  CorrelationFactor out;
  for (double jitter = nugget; jitter <= 1e-6 * (1.0 + 1e-9); jitter *= 100.0) {
    out.matrix = correlation_matrix(w, resolution, s);
    out.matrix.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(out.matrix);
    if (llt.info() == Eigen::Success) {
      out.lower_triangular = true;
      out.nugget = jitter;
      out.fell_back = jitter != nugget;
      return out;
    }
    if (jitter == 0.0) jitter = 1e-12;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(correlation_matrix(w, resolution, s));
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  out.matrix = eig.eigenvectors() * roots.asDiagonal();
  out.lower_triangular = false;
  out.fell_back = true;
  out.nugget = 0.0;
  return out;
}

namespace {

// In-place 2-D DFT of a row-major rows x cols complex array.
void fft2(std::vector<std::complex<double>>& a, int rows, int cols) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(static_cast<std::size_t>(std::max(rows, cols)));
  std::vector<std::complex<double>> out;
  for (int r = 0; r < rows; ++r) {
    auto* row = a.data() + static_cast<std::size_t>(r) * cols;
    in.assign(row, row + cols);
    fft.fwd(out, in);
    std::copy(out.begin(), out.end(), row);
  }
  for (int c = 0; c < cols; ++c) {
    in.resize(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) in[static_cast<std::size_t>(r)] = a[static_cast<std::size_t>(r) * cols + c];
    fft.fwd(out, in);
    for (int r = 0; r < rows; ++r) a[static_cast<std::size_t>(r) * cols + c] = out[static_cast<std::size_t>(r)];
  }
}

}  // namespace

CirculantFactor circulant_factor(const Window& w, int resolution, double s) {
  if (resolution < 1) throw std::invalid_argument("circulant_factor: resolution must be >= 1");
  if (!(s > 0.0)) throw std::invalid_argument("circulant_factor: s must be > 0");
  const double cw = w.width() / resolution;
  const double ch = w.height() / resolution;

  CirculantFactor out;
  out.resolution = resolution;
  for (int factor = 2; factor <= 8; factor *= 2) {
    const int mx = factor * resolution, my = factor * resolution;
    std::vector<std::complex<double>> base(static_cast<std::size_t>(mx) * my);
    for (int iy = 0; iy < my; ++iy) {
      const double dy = std::min(iy, my - iy) * ch;
      for (int ix = 0; ix < mx; ++ix) {
        const double dx = std::min(ix, mx - ix) * cw;
        base[static_cast<std::size_t>(iy) * mx + ix] = std::exp(-std::hypot(dx, dy) / s);
      }
    }
    fft2(base, my, mx);
    double lo = 0.0, hi = 0.0;
    for (const auto& v : base) {
      lo = std::min(lo, v.real());
      hi = std::max(hi, v.real());
    }
    out.embed_x = mx;
    out.embed_y = my;
    out.negative_ratio = hi > 0.0 ? -lo / hi : 0.0;
    // Round-off leaves eigenvalues of order -1e-13 relative on exact embeddings.
    out.clipped = out.negative_ratio > 1e-10;
    const double n = static_cast<double>(mx) * my;
    out.scale.resize(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) out.scale[k] = std::sqrt(std::max(base[k].real(), 0.0) / n);
    if (!out.clipped) break;
  }
  return out;
}

FieldCache::FieldCache(std::size_t capacity, double s_quantum)
    : capacity_(std::max<std::size_t>(capacity, 1)), s_quantum_(s_quantum) {}

double FieldCache::effective_scale(double s) const {
  if (!(s_quantum_ > 0.0)) return s;
  return std::max(s_quantum_, std::round(s / s_quantum_) * s_quantum_);
}

template <class T, class Make>
std::shared_ptr<const T> FieldCache::lookup(const Key& key, Make&& make) {
  {
    std::lock_guard lock(mutex_);
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->key == key) {
        entries_.splice(entries_.begin(), entries_, it);
        ++hits_;
        return std::static_pointer_cast<const T>(entries_.front().factor);
      }
    }
    ++misses_;
  }
  // Built outside the lock; concurrent misses on one key may duplicate work.
  auto factor = std::make_shared<const T>(make());
  std::lock_guard lock(mutex_);
  entries_.push_front({key, factor});
  while (entries_.size() > capacity_) entries_.pop_back();
  return factor;
}

std::shared_ptr<const CorrelationFactor> FieldCache::cholesky(const Window& w, int resolution, double s) {
  const double scale = effective_scale(s);
  return lookup<CorrelationFactor>({0, w.width(), w.height(), resolution, scale},
                                   [&] { return correlation_factor(w, resolution, scale); });
}

std::shared_ptr<const CirculantFactor> FieldCache::circulant(const Window& w, int resolution, double s) {
  const double scale = effective_scale(s);
  return lookup<CirculantFactor>({1, w.width(), w.height(), resolution, scale},
                                 [&] { return circulant_factor(w, resolution, scale); });
}

std::size_t FieldCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t FieldCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

// ---------------------------------------------------------------------------
// Samplers

FieldGrid sample_grf(const Window& w, int resolution, const GrfParams& p, Rng& rng, FieldCache* cache,
                     FieldMethod method) {
  p.validate();
  if (resolution < 2) throw std::invalid_argument("sample_grf: resolution must be >= 2");
  const auto n = static_cast<Eigen::Index>(resolution) * resolution;
  std::vector<double> values(static_cast<std::size_t>(n), p.mu);
  if (p.sigma2 == 0.0) return {w, resolution, std::move(values)};
  const double sd = std::sqrt(p.sigma2);

  if (method == FieldMethod::Circulant) {
    const auto factor = cache ? cache->circulant(w, resolution, p.s)
                              : std::make_shared<const CirculantFactor>(circulant_factor(w, resolution, p.s));
    const int mx = factor->embed_x, my = factor->embed_y;
    std::vector<std::complex<double>> a(factor->scale.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      a[k] = factor->scale[k] * std::complex<double>(re, im);
    }
    fft2(a, my, mx);
    for (int iy = 0; iy < resolution; ++iy)
      for (int ix = 0; ix < resolution; ++ix)
        values[static_cast<std::size_t>(iy) * resolution + ix] += sd * a[static_cast<std::size_t>(iy) * mx + ix].real();
    return {w, resolution, std::move(values)};
  }

  const auto factor = cache ? cache->cholesky(w, resolution, p.s)
                            : std::make_shared<const CorrelationFactor>(correlation_factor(w, resolution, p.s));
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = standard_normal(rng);
  Eigen::VectorXd y(n);
  if (factor->lower_triangular) {
    y.noalias() = factor->matrix.triangularView<Eigen::Lower>() * z;
  } else {
    y.noalias() = factor->matrix * z;
  }
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] += sd * y[i];
  return {w, resolution, std::move(values)};
}

PointPattern sample_poisson(const Window& w, double intensity, Rng& rng) {
  if (!(intensity >= 0.0)) throw std::invalid_argument("sample_poisson: negative intensity");
  const auto n = poisson(rng, intensity * w.area());
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = uniform(rng, w.x_min(), w.x_max());
    const double y = uniform(rng, w.y_min(), w.y_max());
    pts.push_back({x, y});
  }
  return {std::move(pts), w};
}

PointPattern sample_cell_poisson(const FieldGrid& log_intensity, Rng& rng) {
  const Window& w = log_intensity.window();
  const int res = log_intensity.resolution();
  const double cw = log_intensity.cell_width();
  const double ch = log_intensity.cell_height();
  const double area = log_intensity.cell_area();
  std::vector<Point> pts;
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      const auto n = poisson(rng, std::exp(log_intensity(ix, iy)) * area);
      const double x0 = w.x_min() + ix * cw;
      const double y0 = w.y_min() + iy * ch;
      for (std::uint64_t k = 0; k < n; ++k) {
        const double x = std::min(x0 + cw * uniform01(rng), w.x_max());
        const double y = std::min(y0 + ch * uniform01(rng), w.y_max());
        pts.push_back({x, y});
      }
    }
  }
  return {std::move(pts), w};
}

PointPattern sample_lgcp(const Window& w, const GrfParams& p, int resolution, Rng& rng, FieldCache* cache,
                         FieldMethod method) {
  return sample_cell_poisson(sample_grf(w, resolution, p, rng, cache, method), rng);
}

double strauss_interaction(double gamma, std::size_t t) {
  if (t == 0) return 1.0;
  if (gamma == 0.0) return 0.0;
  if (gamma == 1.0) return 1.0;
  return std::pow(gamma, static_cast<double>(t));
}

double papangelou_strauss(Point u, const PointPattern& x, const StraussParams& p) {
  std::size_t t = 0;
  const double r2 = p.R * p.R;
  for (const auto& q : x.points()) {
    if (squared_distance(u, q) <= r2) ++t;
  }
  return p.beta * strauss_interaction(p.gamma, t);
}

namespace {

// Generic birth-death Metropolis-Hastings for densities
//   h(x) = prod_i base(x_i) * gamma^S_R(x)
// on the rectangle `ext`. `base` returns the first-order term at a location.
template <class Base>
std::vector<Point> run_birth_death(const Window& ext, double gamma, double R, Base&& base,
                                   Rng& rng, const McmcOptions& opts) {
  const double area = ext.area();
  const bool interacting = R > 0.0 && gamma < 1.0;
  const bool tracing = opts.trace != nullptr;
  const bool need_counts = R > 0.0 && (interacting || tracing);
  PointGrid grid(ext, R > 0.0 ? R : ext.shorter_side());

  if (tracing) {
    opts.trace->thin = std::max<long>(opts.thin, 1);
    opts.trace->samples.clear();
    opts.trace->samples.reserve(static_cast<std::size_t>(opts.iterations / opts.trace->thin));
  }

  std::size_t close_pairs = 0;
  for (long it = 1; it <= opts.iterations; ++it) {
    const bool birth = uniform01(rng) < 0.5;
    if (birth) {
      const Point u{uniform(rng, ext.x_min(), ext.x_max()), uniform(rng, ext.y_min(), ext.y_max())};
      const std::size_t t = need_counts ? grid.count_within(u, R) : 0;
      const double lambda = base(u) * (interacting ? strauss_interaction(gamma, t) : 1.0);
      const double ratio = birth_ratio(lambda, area, grid.size());
      if (uniform01(rng) < ratio) {
        grid.insert(u);
        close_pairs += t;
      }
    } else if (grid.size() > 0) {
      const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(grid.size()));
      const std::size_t victim = std::min(i, grid.size() - 1);
      const Point u = grid[victim];
      const std::size_t t = need_counts ? grid.count_within(u, R, victim) : 0;
      const double lambda = base(u) * (interacting ? strauss_interaction(gamma, t) : 1.0);
      const double ratio = death_ratio(lambda, area, grid.size());
      if (uniform01(rng) < ratio) {
        grid.remove(victim);
        close_pairs -= t;
      }
    } else {
      // Death proposed on the empty pattern: rejected. Consume the victim
      // and acceptance draws so stream alignment does not depend on n.
      uniform01(rng);
      uniform01(rng);
    }
    if (tracing && it % opts.trace->thin == 0) {
      opts.trace->samples.push_back({it, grid.size(), close_pairs});
    }
  }
  return {grid.points().begin(), grid.points().end()};
}

PointPattern clip(const std::vector<Point>& pts, const Window& w) {
  std::vector<Point> inside;
  inside.reserve(pts.size());
  for (const auto& p : pts)
    if (w.contains(p)) inside.push_back(p);
  return {std::move(inside), w};
}

}  // namespace

PointPattern sample_strauss(const Window& w, const StraussParams& p, Rng& rng,
                            const McmcOptions& opts) {
  p.validate();
  if (opts.iterations < 1) throw std::invalid_argument("sample_strauss: iterations must be >= 1");
  const Window ext = w.dilate(2.0 * p.R);
  const double beta = p.beta;
  auto pts = run_birth_death(ext, p.gamma, p.R, [beta](Point) { return beta; }, rng, opts);
  return clip(pts, w);
}

PointPattern sample_lgcp_strauss(const Window& w, const LgcpStraussParams& p, int resolution,
                                 Rng& rng, const McmcOptions& opts, FieldCache* cache,
                                 FieldMethod method) {
  p.validate();
  if (opts.iterations < 1)
    throw std::invalid_argument("sample_lgcp_strauss: iterations must be >= 1");
  const FieldGrid field = sample_grf(w, resolution, p.grf, rng, cache, method);
  std::vector<double> intensity(field.values().size());
  std::transform(field.values().begin(), field.values().end(), intensity.begin(),
                 [](double y) { return std::exp(y); });
  const Window ext = w.dilate(2.0 * p.R);
  auto pts = run_birth_death(
      ext, p.gamma, p.R, [&](Point u) { return intensity[field.cell_index(u)]; }, rng, opts);
  return clip(pts, w);
}

TraceSummary trace_diagnostics(const ChainTrace& trace) {
  TraceSummary out;
  const auto& s = trace.samples;
  out.length = s.size();
  if (s.empty()) {
    out.flat = true;
    return out;
  }
  double sum = 0.0, sum2 = 0.0, pairs = 0.0;
  for (const auto& t : s) {
    sum += static_cast<double>(t.n);
    sum2 += static_cast<double>(t.n) * static_cast<double>(t.n);
    pairs += static_cast<double>(t.close_pairs);
  }
  const double len = static_cast<double>(s.size());
  out.mean_n = sum / len;
  out.sd_n = std::sqrt(std::max(0.0, sum2 / len - out.mean_n * out.mean_n));
  out.mean_close_pairs = pairs / len;

  const std::size_t half = s.size() / 2;
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (i < half ? first : second) += static_cast<double>(s[i].n);
  }
  out.first_half_mean_n = half > 0 ? first / static_cast<double>(half) : out.mean_n;
  out.second_half_mean_n = second / static_cast<double>(s.size() - half);
  out.flat = std::all_of(s.begin(), s.end(), [&](const TraceSample& t) {
    return t.n == s.front().n && t.close_pairs == s.front().close_pairs;
  });
  return out;
}

}  // namespace ppnn
