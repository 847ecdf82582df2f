#include "htif/tail_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>

#include "htif/errors.hpp"

namespace htif {
namespace {

constexpr std::size_t kMinEquivalenceSamples = 10000;

void require_positive(std::span<const double> samples, const char* what) {
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::domain_error(std::string(what) + ": samples must be finite and strictly positive");
    }
  }
}

TailEstimate make_estimate(double mean_log_excess, std::size_t k, std::size_t n) {
  if (!(mean_log_excess > 0.0)) {
    throw std::domain_error("hill_estimate: top order statistics are all equal");
  }
  TailEstimate est;
  est.alpha_hat = 1.0 / mean_log_excess;
  est.k = k;
  est.n_samples = n;
  const double half_width = 1.96 / std::sqrt(static_cast<double>(k));
  est.ci_low = est.alpha_hat * (1.0 - half_width);
  est.ci_high = est.alpha_hat * (1.0 + half_width);
  return est;
}

std::size_t quantile_index(double level, std::size_t n) {
  if (!(level >= 0.0 && level <= 1.0)) throw std::domain_error("quantile level must lie in [0, 1]");
  const double rank = std::ceil(level * static_cast<double>(n));
  const auto idx = rank < 1.0 ? std::size_t{0} : static_cast<std::size_t>(rank) - 1;
  return std::min(idx, n - 1);
}

std::string level_text(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", level);
  return buf;
}

std::size_t level_index(std::span<const double> levels, double level) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::abs(levels[i] - level) < 1e-12) return i;
  }
  throw std::out_of_range("quantile level " + level_text(level) + " was not evaluated");
}

}  // namespace

TailEstimate hill_estimate(std::span<const double> samples, std::size_t k) {
  const std::size_t n = samples.size();
  if (k == 0 || k >= n) throw std::domain_error("hill_estimate: need 1 <= k < n");
  require_positive(samples, "hill_estimate");
  std::vector<double> work(samples.begin(), samples.end());
  // After the partition, work[k] is X_(k+1) and work[0..k) are the k largest.
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k), work.end(),
                   std::greater<>());
  const double pivot = work[k];
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(work[i] / pivot);
  return make_estimate(sum / static_cast<double>(k), k, n);
}

std::size_t default_hill_k(std::size_t n) {
  if (n < 2) throw std::domain_error("default_hill_k: need at least two samples");
  const auto k = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.6)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

std::vector<TailEstimate> hill_sweep(std::span<const double> samples, std::span<const std::size_t> ks) {
  const std::size_t n = samples.size();
  require_positive(samples, "hill_sweep");
  std::size_t k_max = 0;
  for (std::size_t k : ks) {
    if (k == 0 || k >= n) throw std::domain_error("hill_sweep: need 1 <= k < n");
    k_max = std::max(k_max, k);
  }
  std::vector<double> top(samples.begin(), samples.end());
  std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(std::min(k_max + 1, n)), top.end(),
                    std::greater<>());
  std::vector<double> log_prefix(k_max + 1, 0.0);
  for (std::size_t i = 0; i < k_max; ++i) log_prefix[i + 1] = log_prefix[i] + std::log(top[i]);

  std::vector<TailEstimate> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) {
    const double mean = log_prefix[k] / static_cast<double>(k) - std::log(top[k]);
    out.push_back(make_estimate(mean, k, n));
  }
  return out;
}

std::vector<std::size_t> default_sweep_ks(std::size_t n) {
  std::vector<std::size_t> ks;
  if (n < 3) return ks;
  for (std::size_t decade = 10; decade <= n / 2; decade *= 10) {
    for (std::size_t m : {1, 2, 5}) {
      const std::size_t k = decade * m;
      if (k <= n / 2) ks.push_back(k);
    }
  }
  ks.push_back(default_hill_k(n));
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

std::vector<double> empirical_quantiles(std::span<const double> samples, std::span<const double> levels) {
  if (samples.empty()) throw InsufficientDataError("empirical_quantiles: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(levels.size());
  for (double q : levels) out.push_back(sorted[quantile_index(q, sorted.size())]);
  return out;
}

double exceedance_fraction(std::span<const double> samples, double z) {
  if (samples.empty()) return 0.0;
  const auto count = std::count_if(samples.begin(), samples.end(), [z](double x) { return x > z; });
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

double RatioCurve::drift() const {
  if (ratios.empty()) return 1.0;
  return ratios.back() / ratios.front();
}

bool RatioCurve::flagged_nonequivalent() const {
  const double d = drift();
  return !(d <= 2.0 && d >= 0.5);
}

bool RatioCurve::within(double lo, double hi) const {
  return std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r >= lo && r <= hi; });
}

double RatioCurve::at(double level) const { return ratios[level_index(levels, level)]; }

RatioCurve equivalence_ratio(std::span<const double> x, std::span<const double> y,
                             std::span<const double> levels) {
  if (x.size() < kMinEquivalenceSamples || y.size() < kMinEquivalenceSamples) {
    throw InsufficientDataError("equivalence_ratio: need at least 10^4 samples on each side");
  }
  require_positive(x, "equivalence_ratio");
  require_positive(y, "equivalence_ratio");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());

  RatioCurve curve;
  curve.levels.assign(levels.begin(), levels.end());
  curve.thresholds = empirical_quantiles(pooled, levels);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double z = curve.thresholds[i];
    const double px = exceedance_fraction(x, z);
    const double py = exceedance_fraction(y, z);
    if (px == 0.0 || py == 0.0) {
      throw InsufficientDataError("equivalence_ratio: empty upper tail at level " + level_text(levels[i]));
    }
    curve.ratios.push_back(px / py);
  }
  return curve;
}

double DependenceRatio::at(double level) const { return ratios[level_index(levels, level)]; }

DependenceRatio upper_tail_independence(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> reference,
                                        std::span<const double> levels, std::string reference_label) {
  if (x.size() != y.size()) throw std::domain_error("upper_tail_independence: unpaired samples");
  if (x.empty()) throw InsufficientDataError("upper_tail_independence: empty sample");
  DependenceRatio out;
  out.reference = std::move(reference_label);
  out.levels.assign(levels.begin(), levels.end());
  out.thresholds = empirical_quantiles(reference, levels);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double z = out.thresholds[i];
    const double denom = exceedance_fraction(reference, z);
    if (denom == 0.0) {
      throw InsufficientDataError("upper_tail_independence: reference has no exceedance at level " +
                                  level_text(levels[i]));
    }
    std::size_t joint = 0;
    for (std::size_t h = 0; h < x.size(); ++h) joint += (x[h] > z && y[h] > z) ? 1 : 0;
    out.ratios.push_back(static_cast<double>(joint) / static_cast<double>(x.size()) / denom);
  }
  return out;
}

double LagDependence::at(std::size_t lag, double level) const {
  const auto it = std::find(lags.begin(), lags.end(), lag);
  if (it == lags.end()) throw std::out_of_range("lag " + std::to_string(lag) + " was not evaluated");
  return ratios[static_cast<std::size_t>(it - lags.begin())][level_index(levels, level)];
}

LagDependence lagged_tail_dependence(std::span<const double> sequence, std::span<const std::size_t> lags,
                                     std::span<const double> levels, std::size_t min_samples,
                                     std::string reference_label) {
  if (sequence.size() < min_samples || sequence.size() < 2) {
    throw InsufficientDataError("lagged tail dependence needs at least " + std::to_string(min_samples) +
                                " samples, got " + std::to_string(sequence.size()));
  }
  LagDependence out;
  out.reference = std::move(reference_label);
  out.lags.assign(lags.begin(), lags.end());
  out.levels.assign(levels.begin(), levels.end());
  out.thresholds = empirical_quantiles(sequence, levels);

  std::vector<double> denominators;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double d = exceedance_fraction(sequence, out.thresholds[i]);
    if (d == 0.0) {
      throw InsufficientDataError("lagged tail dependence: no exceedance at level " + level_text(levels[i]));
    }
    denominators.push_back(d);
  }
  for (std::size_t lag : lags) {
    if (lag == 0 || lag >= sequence.size()) throw std::domain_error("lag must lie in [1, n)");
    const std::size_t pairs = sequence.size() - lag;
    std::vector<double> row;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double z = out.thresholds[i];
      std::size_t joint = 0;
      for (std::size_t h = 0; h < pairs; ++h) joint += (sequence[h] > z && sequence[h + lag] > z) ? 1 : 0;
      row.push_back(static_cast<double>(joint) / static_cast<double>(pairs) / denominators[i]);
    }
    out.ratios.push_back(std::move(row));
  }
  return out;
}

VectorSample::VectorSample(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw std::domain_error("VectorSample: dimension must be positive");
}

void VectorSample::push_back(std::span<const double> row) {
  if (row.size() != dimension_) throw std::domain_error("VectorSample: row has the wrong dimension");
  values_.insert(values_.end(), row.begin(), row.end());
}

std::vector<double> VectorSample::l1_norms() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (double v : row(i)) s += std::abs(v);
    out[i] = s;
  }
  return out;
}

std::vector<double> SpectralEstimate::cell_lower_corner(std::size_t cell) const {
  std::vector<double> corner;
  for (std::size_t c = 0; c + 1 < dimension; ++c) {
    corner.push_back(static_cast<double>(cell % bins_per_axis) * cell_width());
    cell /= bins_per_axis;
  }
  return corner;
}

SpectralEstimate spectral_estimate(const VectorSample& vectors, double radial_quantile,
                                   std::size_t bins_per_axis) {
  const std::size_t d = vectors.dimension();
  if (d < 2) throw std::domain_error("spectral_estimate: need dimension >= 2");
  if (bins_per_axis == 0) throw std::domain_error("spectral_estimate: need at least one bin");
  if (std::pow(static_cast<double>(bins_per_axis), static_cast<double>(d - 1)) > 1e6) {
    throw std::domain_error("spectral_estimate: partition too fine for this dimension");
  }
  const auto radii = vectors.l1_norms();
  const double threshold = empirical_quantiles(radii, std::span(&radial_quantile, 1)).front();

  SpectralEstimate est;
  est.dimension = d;
  est.radial_quantile = radial_quantile;
  est.radial_threshold = threshold;
  est.bins_per_axis = bins_per_axis;
  std::size_t cells = 1;
  for (std::size_t c = 0; c + 1 < d; ++c) cells *= bins_per_axis;
  est.histogram.assign(cells, 0.0);

  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!(radii[i] > threshold)) continue;
    const auto row = vectors.row(i);
    std::size_t cell = 0;
    std::size_t stride = 1;
    for (std::size_t c = 0; c < d; ++c) {
      const double w = std::abs(row[c]) / radii[i];
      est.angular_samples.push_back(w);
      if (c + 1 < d) {
        const auto bin = std::min(static_cast<std::size_t>(w * static_cast<double>(bins_per_axis)),
                                  bins_per_axis - 1);
        cell += bin * stride;
        stride *= bins_per_axis;
      }
    }
    est.histogram[cell] += 1.0;
    ++est.exceedances;
  }
  if (est.exceedances < kMinRadialExceedances) {
    throw InsufficientDataError("spectral_estimate: only " + std::to_string(est.exceedances) +
                                " radial exceedances (need " + std::to_string(kMinRadialExceedances) + ")");
  }
  for (double& m : est.histogram) m /= static_cast<double>(est.exceedances);
  return est;
}

double RadialCheck::max_deviation_for(std::span<const double> ts) const {
  double worst = 0.0;
  for (const auto& row : rows) {
    if (std::find(ts.begin(), ts.end(), row.t) != ts.end()) worst = std::max(worst, row.abs_deviation);
  }
  return worst;
}

RadialCheck radial_rv_check(const VectorSample& vectors, std::span<const double> t_grid,
                            std::span<const double> levels) {
  const auto radii = vectors.l1_norms();
  if (radii.size() < 2) throw InsufficientDataError("radial_rv_check: need at least two vectors");
  RadialCheck check;
  check.alpha_hat = hill_estimate(radii, default_hill_k(radii.size()));
  const auto bases = empirical_quantiles(radii, levels);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = bases[i];
    const auto base_count = std::count_if(radii.begin(), radii.end(), [x](double r) { return r > x; });
    if (static_cast<std::size_t>(base_count) < kMinRadialExceedances) {
      throw InsufficientDataError("radial_rv_check: only " + std::to_string(base_count) +
                                  " exceedances at level " + level_text(levels[i]));
    }
    for (double t : t_grid) {
      if (!(t > 0.0)) throw std::domain_error("radial_rv_check: t must be positive");
      const auto count = std::count_if(radii.begin(), radii.end(), [&](double r) { return r > t * x; });
      RadialRow row;
      row.level = levels[i];
      row.base = x;
      row.t = t;
      row.empirical = static_cast<double>(count) / static_cast<double>(base_count);
      row.fitted = std::pow(t, -check.alpha_hat.alpha_hat);
      row.abs_deviation = std::abs(row.empirical - row.fitted);
      check.max_abs_deviation = std::max(check.max_abs_deviation, row.abs_deviation);
      check.rows.push_back(row);
    }
  }
  return check;
}

}  // namespace htif
