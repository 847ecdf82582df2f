#pragma once

// Estimators and diagnostics for regular variation and extremal dependence.
// Every "limit as z -> infinity" is reported as a curve over a fixed grid of
// quantile levels; nothing here claims a limit.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace htif {

inline const std::vector<double> kDefaultQuantileGrid = {0.9, 0.99, 0.999, 0.9999};

// Minimum number of radial exceedances for spectral / radial diagnostics.
inline constexpr std::size_t kMinRadialExceedances = 500;

struct TailEstimate {
  double alpha_hat = 0.0;
  std::size_t k = 0;
  double ci_low = 0.0;   // alpha_hat * (1 - 1.96 / sqrt(k))
  double ci_high = 0.0;  // alpha_hat * (1 + 1.96 / sqrt(k))
  std::size_t n_samples = 0;
};

/// Hill estimator over the k largest order statistics:
/// alpha_hat = [ (1/k) sum_{i<=k} ln(X_(i) / X_(k+1)) ]^-1, descending order.
/// Throws std::domain_error if k == 0, k >= n, or any sample is not strictly positive.
TailEstimate hill_estimate(std::span<const double> samples, std::size_t k);

// ceil(n^0.6), clamped to [1, n-1].
std::size_t default_hill_k(std::size_t n);

// alpha_hat(k) for each k (Hill-plot stability check). Same preconditions.
std::vector<TailEstimate> hill_sweep(std::span<const double> samples, std::span<const std::size_t> ks);

// Roughly geometric k-grid in [10, n/2] that always contains default_hill_k(n).
std::vector<std::size_t> default_sweep_ks(std::size_t n);

// Inverse empirical CDF: the ceil(q*N)-th smallest sample, for each level q.
std::vector<double> empirical_quantiles(std::span<const double> samples, std::span<const double> levels);

double exceedance_fraction(std::span<const double> samples, double z);

struct RatioCurve {
  std::vector<double> levels;
  std::vector<double> thresholds;
  std::vector<double> ratios;

  // ratio at the deepest level over ratio at the shallowest one.
  double drift() const;
  // True when the curve drifts by more than a factor of two across the grid:
  // the tails do not look asymptotically equivalent.
  bool flagged_nonequivalent() const;
  bool within(double lo, double hi) const;
  double at(double level) const;
};

/// P(X > z_q) / P(Y > z_q), z_q the q-quantile of the pooled sample.
/// Throws InsufficientDataError when either sample has fewer than 10^4 points
/// or an empty upper tail at some requested level.
RatioCurve equivalence_ratio(std::span<const double> x, std::span<const double> y,
                             std::span<const double> levels);

struct DependenceRatio {
  std::vector<double> levels;
  std::vector<double> thresholds;
  std::vector<double> ratios;
  std::string reference;  // which empirical marginal plays the controlling variate

  double at(double level) const;
};

/// P(X > z_q, Y > z_q) / P(R > z_q) with z_q the q-quantile of the reference R.
/// x and y are paired observations; throws std::domain_error if their lengths differ,
/// InsufficientDataError if the reference has no exceedance at some level.
DependenceRatio upper_tail_independence(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> reference,
                                        std::span<const double> levels,
                                        std::string reference_label = "reference");

struct LagDependence {
  std::vector<std::size_t> lags;
  std::vector<double> levels;
  std::vector<double> thresholds;
  std::vector<std::vector<double>> ratios;  // [lag index][level index]
  std::string reference;

  double at(std::size_t lag, double level) const;
};

/// For each lag j: P(X_h > z_q, X_{h+j} > z_q) / P(X > z_q), pooled over h.
/// Throws InsufficientDataError below `min_samples`.
LagDependence lagged_tail_dependence(std::span<const double> sequence, std::span<const std::size_t> lags,
                                     std::span<const double> levels, std::size_t min_samples,
                                     std::string reference_label = "sequence marginal");

// Row-major sample of d-dimensional positive vectors.
class VectorSample {
 public:
  explicit VectorSample(std::size_t dimension);
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return values_.size() / dimension_; }
  void push_back(std::span<const double> row);
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dimension_, dimension_}; }
  std::vector<double> l1_norms() const;

 private:
  std::size_t dimension_;
  std::vector<double> values_;
};

/// Conditional angular distribution of X/||X||_1 given ||X||_1 above a radial quantile.
/// The partition splits each of the first d-1 angular coordinates into
/// `bins_per_axis` equal bins on [0, 1].
struct SpectralEstimate {
  std::size_t dimension = 0;
  std::string norm = "L1";
  double radial_quantile = 0.0;
  double radial_threshold = 0.0;
  std::size_t exceedances = 0;
  std::size_t bins_per_axis = 0;
  std::vector<double> angular_samples;  // row-major, `exceedances` rows of `dimension`
  std::vector<double> histogram;        // bins_per_axis^(d-1) cells, sums to 1

  std::span<const double> angle(std::size_t i) const {
    return {angular_samples.data() + i * dimension, dimension};
  }
  // Lower corner of a cell along the first d-1 coordinates.
  std::vector<double> cell_lower_corner(std::size_t cell) const;
  double cell_width() const { return 1.0 / static_cast<double>(bins_per_axis); }
};

SpectralEstimate spectral_estimate(const VectorSample& vectors, double radial_quantile,
                                   std::size_t bins_per_axis = 10);

struct RadialRow {
  double level = 0.0;
  double base = 0.0;  // radial threshold x at this level
  double t = 0.0;
  double empirical = 0.0;  // P(R > t x) / P(R > x)
  double fitted = 0.0;     // t^(-alpha_hat)
  double abs_deviation = 0.0;
};

struct RadialCheck {
  TailEstimate alpha_hat;  // Hill on the radii with the default k
  std::vector<RadialRow> rows;
  double max_abs_deviation = 0.0;

  double max_deviation_for(std::span<const double> ts) const;
};

RadialCheck radial_rv_check(const VectorSample& vectors, std::span<const double> t_grid,
                            std::span<const double> levels);

}  // namespace htif
