#include "htif/if_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "htif/errors.hpp"
#include "htif/io.hpp"
#include "htif/parallel.hpp"

namespace htif {
namespace {

constexpr std::size_t kMinOutputIsis = 10000;

// Bernoulli(p) steps, eight per 64-bit word: a step is up when its byte is
// below floor(256 p); a byte equal to floor(256 p) defers to a fresh uniform
// against the fractional part, so P(up) = p exactly up to double resolution.
struct StepRule {
  explicit StepRule(double p) {
    const double scaled = p * 256.0;
    whole = static_cast<unsigned>(std::floor(scaled));
    fraction = scaled - whole;
  }
  unsigned whole = 0;
  double fraction = 0.0;
};

struct WalkOutcome {
  bool crossed = false;
  std::uint64_t m = 0;
  std::uint64_t steps = 0;
  std::uint64_t ups = 0;
};

WalkOutcome walk_once(const StepRule& rule, int b, std::uint64_t max_steps, RngHandle rng) {
  WalkOutcome out;
  std::int64_t y = 0;
  const std::int64_t target = b;
  while (out.steps < max_steps) {
    const std::uint64_t remaining = max_steps - out.steps;
    // Even all-up remaining steps cannot reach b: the outcome is already decided.
    if (y + static_cast<std::int64_t>(remaining) < target) break;
    std::uint64_t word = rng.next_u64();
    const unsigned chunk = remaining < 8 ? static_cast<unsigned>(remaining) : 8u;

    if (y + chunk < target) {
      // b is out of reach within this word; take all its steps at once unless a byte ties.
      unsigned ups = 0, ties = 0;
      for (unsigned i = 0; i < chunk; ++i) {
        const unsigned byte = static_cast<unsigned>((word >> (8 * i)) & 0xff);
        ups += byte < rule.whole;
        ties += byte == rule.whole;
      }
      if (ties == 0) {
        y += 2 * static_cast<std::int64_t>(ups) - chunk;
        out.steps += chunk;
        out.ups += ups;
        continue;
      }
    }
    for (unsigned i = 0; i < chunk; ++i) {
      const unsigned byte = static_cast<unsigned>(word & 0xff);
      word >>= 8;
      const bool up = byte < rule.whole || (byte == rule.whole && rng.next_uniform() < rule.fraction);
      ++out.steps;
      if (!up) {
        --y;
        continue;
      }
      ++out.ups;
      if (++y == target) {
        out.crossed = true;
        out.m = out.steps;
        return out;
      }
    }
  }
  return out;
}

}  // namespace

void ReceiverConfig::validate() const {
  if (threshold_b < 1) throw std::domain_error("threshold b must be a positive integer");
  if (pool.empty()) throw std::domain_error("receiver pool must be nonempty");
}

std::vector<double> SpikeTrain::isis_as_double() const {
  std::vector<double> out;
  out.reserve(isis.size());
  for (Duration z : isis) out.push_back(z.to_double());
  return out;
}

Receiver::Receiver(ReceiverConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t top = *std::max_element(config_.pool.begin(), config_.pool.end());
  member_.assign(top + 1, 0);
  for (std::size_t i : config_.pool) member_[i] = 1;
}

bool Receiver::observe(const EventRecord& event) {
  if (!in_pool(event.source)) return false;
  ++train_.events_seen;
  potential_ += event.mark;
  train_.silent_tail = true;
  if (potential_ != config_.threshold_b) return false;

  if (event.time < last_spike_) throw InvariantViolation("receiver saw events out of time order");
  train_.isis.push_back(event.time - last_spike_);
  train_.boundaries.push_back(train_.events_seen);
  train_.firing_times.push_back(event.time);
  train_.silent_tail = false;
  last_spike_ = event.time;
  potential_ = 0;
  return true;
}

SpikeTrain Receiver::take_train() { return std::move(train_); }

SpikeTrain run_receiver(const EventStream& stream, const ReceiverConfig& config) {
  Receiver receiver(config);
  for (const auto& e : stream) receiver.observe(e);
  return receiver.take_train();
}

std::vector<std::pair<std::size_t, std::size_t>> superimposed_pairs(const SpikeTrain& a, const SpikeTrain& b) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto start = [](const SpikeTrain& t, std::size_t i) { return i == 0 ? Duration::zero() : t.firing_times[i - 1]; };
  std::size_t j = 0, k = 0;
  while (j < a.size() && k < b.size()) {
    const Duration sa = start(a, j), ea = a.firing_times[j];
    const Duration sb = start(b, k), eb = b.firing_times[k];
    if (std::max(sa, sb) < std::min(ea, eb) || (sa == sb && ea == eb)) pairs.emplace_back(j, k);
    // Advance whichever window closes first; both when they close together.
    if (ea < eb) {
      ++j;
    } else if (eb < ea) {
      ++k;
    } else {
      ++j;
      ++k;
    }
  }
  return pairs;
}

TwoReceiverRun run_two_receivers(const EventStream& stream, const ReceiverConfig& config_a,
                                 const ReceiverConfig& config_b) {
  Receiver ra(config_a), rb(config_b);
  for (const auto& e : stream) {
    ra.observe(e);
    rb.observe(e);
  }
  TwoReceiverRun run{ra.take_train(), rb.take_train(), {}};
  run.superposition_index = superimposed_pairs(run.a, run.b);
  return run;
}

WalkStats abstract_walk_first_passage(double p, int b, std::uint64_t max_steps, std::uint64_t replications,
                                      const RngHandle& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("p must lie in [0, 1]");
  if (p == 0.5) throw ModelExclusionError("p = 1/2 (symmetric walk) is excluded from the model");
  if (b < 1) throw std::domain_error("threshold b must be a positive integer");
  if (max_steps == 0) throw std::domain_error("max_steps must be positive");

  const StepRule rule(p);
  std::vector<WalkOutcome> outcomes(replications);
  parallel_blocks(replications, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) outcomes[r] = walk_once(rule, b, max_steps, rng.substream(r));
  });

  WalkStats stats;
  stats.p = p;
  stats.b = b;
  stats.max_steps = max_steps;
  stats.replications = replications;
  double sum_m = 0.0;
  for (const auto& o : outcomes) {
    stats.steps_drawn += o.steps;
    stats.positive_steps += o.ups;
    if (o.crossed) {
      stats.m_samples.push_back(o.m);
      sum_m += static_cast<double>(o.m);
    }
  }
  stats.p_hat = stats.steps_drawn ? static_cast<double>(stats.positive_steps) / static_cast<double>(stats.steps_drawn)
                                  : 0.0;
  stats.finite_fraction =
      replications ? static_cast<double>(stats.m_samples.size()) / static_cast<double>(replications) : 0.0;
  stats.mean_m = stats.m_samples.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : sum_m / static_cast<double>(stats.m_samples.size());
  return stats;
}

LagDependence output_independence_diagnostic(const SpikeTrain& train, std::span<const std::size_t> lags,
                                             std::span<const double> quantiles) {
  const auto z = train.isis_as_double();
  return lagged_tail_dependence(z, lags, quantiles, kMinOutputIsis, "output ISI marginal");
}

void write_spike_train_csv(std::ostream& out, const SpikeTrain& train) {
  out << "i,Z,M\n";
  for (std::size_t i = 0; i < train.size(); ++i) {
    out << i + 1 << ',' << format_duration(train.isis[i]) << ',' << train.boundaries[i] << '\n';
  }
}

void write_walk_json(std::ostream& out, const WalkStats& stats) {
  nlohmann::ordered_json j;
  j["p"] = stats.p;
  j["b"] = stats.b;
  j["max_steps"] = stats.max_steps;
  j["replications"] = stats.replications;
  j["p_hat"] = stats.p_hat;
  j["finite_fraction"] = stats.finite_fraction;
  j["crossings"] = stats.m_samples.size();
  if (std::isfinite(stats.mean_m)) {
    j["mean_m"] = stats.mean_m;
  } else {
    j["mean_m"] = nullptr;
  }
  j["steps_drawn"] = stats.steps_drawn;
  out << j.dump(2) << '\n';
}

}  // namespace htif
