#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ppnn/geometry.hpp"

namespace ppnn {

// ---------------------------------------------------------------------------
// Nelder-Mead

struct NelderMeadOptions {
  int max_evals = 4000;
  // Converged once both the spread of vertex values and the largest
  // coordinate distance to the best vertex fall below these.
  double f_tol = 1e-12;
  double x_tol = 1e-8;
  // Initial simplex: start plus initial_step along each axis.
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Non-finite objective values are treated as +infinity. Throws
// std::invalid_argument when the objective is not finite at the start.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& opts = {});

// ---------------------------------------------------------------------------
// LGCP minimum contrast

inline constexpr double kQuadratureTolerance = 1e-10;

// K(r) = 2 pi int_0^r t exp(sigma2 exp(-t / s)) dt by adaptive Simpson.
double lgcp_theoretical_K(double r, double sigma2, double s, double tol = kQuadratureTolerance);
// Same on an increasing grid, integrating interval by interval.
std::vector<double> lgcp_theoretical_K(std::span<const double> r, double sigma2, double s,
                                       double tol = kQuadratureTolerance);

struct MinContrastOptions {
  double a1 = 0.0;
  // NaN selects a quarter of the shorter window side.
  double a2 = std::numeric_limits<double>::quiet_NaN();
  double exponent_p = 2.0;
  double exponent_q = 0.25;
  int grid_size = 513;
  NelderMeadOptions optimizer{.max_evals = 2000, .f_tol = 1e-14, .x_tol = 1e-7, .initial_step = 0.5};
};

struct MinContrastResult {
  double mu = 0.0;
  double sigma2 = 0.0;
  double s = 0.0;
  double contrast = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Trapezoid rule for int_{a1}^{a2} |K(r)^q - Khat(r)^q|^p dr on the grid.
double lgcp_contrast(std::span<const double> r, std::span<const double> k_hat, double sigma2, double s,
                     double exponent_p = 2.0, double exponent_q = 0.25);

// (sigma2, s) minimize the contrast in log-parameter space; mu is then
// log(n / |W|) - sigma2 / 2. Estimates are never clamped, but sigma2 is
// reported as 0 when the contrast at sigma2 = 0 is no larger. Requires n >= 2.
MinContrastResult minimum_contrast_lgcp(const PointPattern& p, const MinContrastOptions& opts = {});

// ---------------------------------------------------------------------------
// Strauss pseudo-likelihood

inline constexpr int kPseudoLikelihoodGrid = 512;

// Sufficient statistics of the Strauss log pseudo-likelihood on a region A:
// n_A points of x in A, T_A = sum over those of t(u, x \ u), and the area of
// {u in A : t(u, x) = k} for each k, measured on a grid x grid lattice.
struct StraussPlTerms {
  double R = 0.0;
  Window region = Window::unit_square();
  std::size_t n_region = 0;
  double close_pairs = 0.0;          // T_A
  std::vector<double> area_by_count;  // index k

  double area() const { return region.area(); }
};

StraussPlTerms strauss_pl_terms(const PointPattern& p, double R, const Window& region,
                                int grid = kPseudoLikelihoodGrid);

// n_A log beta + T_A log gamma - beta sum_k gamma^k area_k. log_gamma may be
// -infinity (gamma = 0), in which case the value is -infinity if T_A > 0.
double pseudo_loglik_strauss(const StraussPlTerms& terms, double log_beta, double log_gamma);
// A = erode(W, R).
double pseudo_loglik_strauss(const PointPattern& p, double R, double log_beta, double log_gamma,
                             int grid = kPseudoLikelihoodGrid);

struct StraussMple {
  double beta = 0.0;
  double gamma = 1.0;
  double R = 0.0;
  double log_pl = 0.0;
  // Gradient of the log pseudo-likelihood in (log beta, log gamma) at the
  // optimum; zero in the interior, nonzero when gamma is clamped.
  double grad_log_beta = 0.0;
  double grad_log_gamma = 0.0;
  bool gamma_clamped = false;  // unconstrained optimum had gamma > 1
  bool converged = true;
};

// Maximizes the concave log-PL: log beta is profiled out in closed form and
// Newton steps with a bisection safeguard solve for log gamma. An
// unconstrained gamma > 1 is replaced by the Poisson fit with gamma = 1;
// T_A = 0 gives gamma = 0.
StraussMple mple_strauss(const StraussPlTerms& terms);
StraussMple mple_strauss_given_R(const PointPattern& p, double R, int grid = kPseudoLikelihoodGrid);

struct ProfileMpleResult {
  double beta = 0.0;
  double gamma = 1.0;
  double R = 0.0;
  std::vector<double> R_grid;
  std::vector<double> pl_values;
  bool converged = true;
};

// 50 equally spaced values on [0.001, 0.05].
std::vector<double> default_strauss_r_grid();

// Every candidate R is fitted on the common region erode(W, max R) so that
// pseudo-likelihood values are comparable. Ties go to the smallest R.
ProfileMpleResult profile_mple_strauss(const PointPattern& p, std::span<const double> R_grid,
                                       int grid = kPseudoLikelihoodGrid);

}  // namespace ppnn
