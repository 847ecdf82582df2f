#include "htif/rv_core.hpp"

#include <cmath>
#include <stdexcept>

namespace htif {

void TailModel::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("tail index alpha must lie in the open interval (0, 1)");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::domain_error("tail scale must be finite and strictly positive");
  }
}

double pareto_quantile(const TailModel& model, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::domain_error("pareto_quantile: probability must lie in [0, 1)");
  }
  model.validate();
  return model.scale * std::pow(1.0 - u, -1.0 / model.alpha);
}

double sample_pareto(const TailModel& model, RngHandle& rng) {
  return pareto_quantile(model, rng.next_uniform());
}

void validate_multiplier_bounds(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw std::domain_error("multiplier bounds must satisfy 0 < lo <= hi < inf");
  }
}

double sample_bounded_multiplier(double lo, double hi, RngHandle& rng) {
  validate_multiplier_bounds(lo, hi);
  return bounded_multiplier_from_unit(lo, hi, rng.next_uniform());
}

}  // namespace htif
