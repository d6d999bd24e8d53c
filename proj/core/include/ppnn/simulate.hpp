#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "ppnn/geometry.hpp"
#include "ppnn/random.hpp"

namespace ppnn {

// Gaussian random field with constant mean and exponential covariance
// sigma2 * exp(-d / s).
struct GrfParams {
  double mu = 0.0;
  double sigma2 = 0.0;
  double s = 1.0;

  void validate() const;
};

// Density proportional to beta^n(x) * gamma^S_R(x).
struct StraussParams {
  double beta = 1.0;
  double gamma = 1.0;
  double R = 0.0;

  void validate() const;
};

struct LgcpStraussParams {
  GrfParams grf;
  double gamma = 1.0;
  double R = 0.0;

  void validate() const;
};

// Field values at the centres of a resolution x resolution cell grid over a
// window, stored row-major (iy * resolution + ix).
class FieldGrid {
 public:
  FieldGrid(Window window, int resolution, std::vector<double> values);

  const Window& window() const { return window_; }
  int resolution() const { return resolution_; }
  double cell_width() const { return window_.width() / resolution_; }
  double cell_height() const { return window_.height() / resolution_; }
  double cell_area() const { return cell_width() * cell_height(); }
  std::span<const double> values() const { return values_; }

  double operator()(int ix, int iy) const {
    return values_[static_cast<std::size_t>(iy) * resolution_ + ix];
  }
  Point cell_center(int ix, int iy) const;
  // Value of the cell containing u; points outside the window take the
  // value of the nearest cell.
  double value_at(Point u) const;
  std::size_t cell_index(Point u) const;

 private:
  Window window_;
  int resolution_;
  std::vector<double> values_;
};

// Factor A with A A^T equal to the cell-centre correlation matrix.
struct CorrelationFactor {
  Eigen::MatrixXd matrix;
  bool lower_triangular = true;  // false after the eigen-decomposition fallback
  bool fell_back = false;
  double nugget = 0.0;
};

// Dense Cholesky factor of exp(-d/s) between cell centres plus a diagonal
// nugget. If the factorization fails the nugget is raised stepwise to 1e-6,
// then an eigen-decomposition with clipped eigenvalues is used instead.
// Cost grows as resolution^6; intended for small grids and as a reference.
CorrelationFactor correlation_factor(const Window& w, int resolution, double s,
                                     double nugget = 1e-10);

// Spectrum of the exponential correlation wrapped onto a torus of
// embed_x x embed_y cells (same cell size as the field grid). The field
// grid is the top-left resolution x resolution block of the torus.
struct CirculantFactor {
  int resolution = 0;
  int embed_x = 0;
  int embed_y = 0;
  // sqrt(max(eigenvalue, 0) / (embed_x * embed_y)), row-major.
  std::vector<double> scale;
  // Most negative eigenvalue over the largest; 0 when the embedding is
  // nonnegative definite and the sampled covariance is exact.
  double negative_ratio = 0.0;
  bool clipped = false;
};

// Doubles the torus (up to 8x the grid) until the spectrum is nonnegative;
// otherwise clips negative eigenvalues and sets `clipped`.
CirculantFactor circulant_factor(const Window& w, int resolution, double s);

enum class FieldMethod { Circulant, Cholesky };

// Thread-safe LRU cache of field factors keyed by method, window extent,
// resolution and scale. With s_quantum > 0 the scale is rounded to the
// nearest multiple before lookup, trading exactness for reuse.
class FieldCache {
 public:
  explicit FieldCache(std::size_t capacity = 4, double s_quantum = 0.0);

  std::shared_ptr<const CorrelationFactor> cholesky(const Window& w, int resolution, double s);
  std::shared_ptr<const CirculantFactor> circulant(const Window& w, int resolution, double s);

  double effective_scale(double s) const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Key = std::tuple<int, double, double, int, double>;
  struct Entry {
    Key key;
    std::shared_ptr<const void> factor;
  };
  template <class T, class Make>
  std::shared_ptr<const T> lookup(const Key& key, Make&& make);

  std::size_t capacity_;
  double s_quantum_;
  mutable std::mutex mutex_;
  std::list<Entry> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

inline constexpr int kDefaultFieldResolution = 128;
inline constexpr long kStraussIterations = 100'000;
inline constexpr long kLgcpStraussIterations = 200'000;

FieldGrid sample_grf(const Window& w, int resolution, const GrfParams& p, Rng& rng,
                     FieldCache* cache = nullptr, FieldMethod method = FieldMethod::Circulant);

PointPattern sample_poisson(const Window& w, double intensity, Rng& rng);

// Poisson process with intensity exp(field) constant on each cell.
PointPattern sample_cell_poisson(const FieldGrid& log_intensity, Rng& rng);

PointPattern sample_lgcp(const Window& w, const GrfParams& p, int resolution, Rng& rng,
                         FieldCache* cache = nullptr, FieldMethod method = FieldMethod::Circulant);

// gamma^t with the convention 0^0 = 1.
double strauss_interaction(double gamma, std::size_t t);

// beta * gamma^(number of points of x within R of u).
double papangelou_strauss(Point u, const PointPattern& x, const StraussParams& p);

// Metropolis-Hastings ratios of the birth-death kernel that proposes birth
// or death with probability 1/2 each, births uniform on a region of the
// given area and deaths uniform over the current points.
inline double birth_ratio(double papangelou, double area, std::size_t n) {
  return papangelou * area / static_cast<double>(n + 1);
}
inline double death_ratio(double papangelou_of_removed, double area, std::size_t n) {
  return static_cast<double>(n) / (papangelou_of_removed * area);
}

struct TraceSample {
  long iteration = 0;
  std::size_t n = 0;
  std::size_t close_pairs = 0;
};

struct ChainTrace {
  long thin = 1;
  std::vector<TraceSample> samples;
};

struct McmcOptions {
  long iterations = kStraussIterations;
  // Record (n, S_R) every `thin` iterations when trace != nullptr.
  long thin = 1;
  ChainTrace* trace = nullptr;
};

// Birth-death MH on w dilated by 2R, started from the empty pattern and
// clipped back to w.
PointPattern sample_strauss(const Window& w, const StraussParams& p, Rng& rng,
                            const McmcOptions& opts = {});

// One field on w, then birth-death MH on w dilated by 2R targeting the
// conditional density exp(sum Y(x_i)) gamma^S_R(x). Proposals outside w use
// the nearest cell of the field.
PointPattern sample_lgcp_strauss(const Window& w, const LgcpStraussParams& p, int resolution,
                                 Rng& rng, const McmcOptions& opts = {.iterations = kLgcpStraussIterations},
                                 FieldCache* cache = nullptr,
                                 FieldMethod method = FieldMethod::Circulant);

struct TraceSummary {
  std::size_t length = 0;
  double mean_n = 0.0;
  double sd_n = 0.0;
  double mean_close_pairs = 0.0;
  // Means over the first and last halves of the series; a large gap
  // relative to sd_n indicates insufficient burn-in.
  double first_half_mean_n = 0.0;
  double second_half_mean_n = 0.0;
  bool flat = false;
};

TraceSummary trace_diagnostics(const ChainTrace& trace);

}  // namespace ppnn
