#pragma once

// Scalar heavy-tailed primitives. Only pure Pareto tails are generated: the
// slowly varying factor of the tail is identically constant.

#include "htif/rng.hpp"

namespace htif {

enum class SlowVariation { none };

/// Pareto tail P(X > x) = (scale / x)^alpha for x >= scale, with alpha in (0, 1).
struct TailModel {
  double alpha = 0.6;
  double scale = 1.0;
  SlowVariation slow_variation = SlowVariation::none;

  // Throws std::domain_error unless 0 < alpha < 1 and scale > 0 (both finite).
  void validate() const;
};

// scale * (1 - u)^(-1/alpha). Throws std::domain_error for u outside [0, 1).
double pareto_quantile(const TailModel& model, double u);

double sample_pareto(const TailModel& model, RngHandle& rng);

// Uniform on [lo, hi]. Throws std::domain_error unless 0 < lo <= hi < inf.
double sample_bounded_multiplier(double lo, double hi, RngHandle& rng);

// Affine map of a unit-interval draw onto [lo, hi]; shared by the sequential
// sampler above and the addressed generator in mrv_input.
inline double bounded_multiplier_from_unit(double lo, double hi, double u) {
  return lo == hi ? lo : lo + (hi - lo) * u;
}

void validate_multiplier_bounds(double lo, double hi);

}  // namespace htif
