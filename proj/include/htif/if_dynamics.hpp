#pragma once

// Perfect-integrator receivers. The membrane Y starts at 0 and moves by the
// mark (+1 / -1) of every event from the receiver's own pool; reaching the
// threshold b emits a spike and resets Y to 0. There is no lower barrier.

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "htif/duration.hpp"
#include "htif/pp_engine.hpp"
#include "htif/rng.hpp"
#include "htif/tail_stats.hpp"

namespace htif {

struct ReceiverConfig {
  int threshold_b = 5;
  std::vector<std::size_t> pool;  // 0-based neuron ids
  std::string label = "A";

  // Throws std::domain_error for b < 1 or an empty pool.
  void validate() const;
};

struct SpikeTrain {
  std::vector<Duration> isis;                // Z_1, Z_2, ...
  std::vector<std::uint64_t> boundaries;     // M_1 < M_2 < ...: pool events up to and including spike i
  std::vector<Duration> firing_times;
  bool silent_tail = false;                  // pool events arrived after the last spike
  std::uint64_t events_seen = 0;             // pool events observed in total

  std::size_t size() const { return isis.size(); }
  std::vector<double> isis_as_double() const;
};

/// Incremental receiver; feed it events in time order.
class Receiver {
 public:
  explicit Receiver(ReceiverConfig config);

  // Events from outside the pool are ignored. Returns true if this event fired a spike.
  bool observe(const EventRecord& event);

  bool in_pool(std::uint32_t neuron) const { return neuron < member_.size() && member_[neuron]; }
  int potential() const { return potential_; }
  const ReceiverConfig& config() const { return config_; }
  const SpikeTrain& train() const { return train_; }
  SpikeTrain take_train();

 private:
  ReceiverConfig config_;
  std::vector<char> member_;
  SpikeTrain train_;
  int potential_ = 0;
  Duration last_spike_;
};

SpikeTrain run_receiver(const EventStream& stream, const ReceiverConfig& config);

struct TwoReceiverRun {
  SpikeTrain a;
  SpikeTrain b;
  // (j, k), 0-based, for every pair of ISIs whose windows (start, end] overlap in time.
  std::vector<std::pair<std::size_t, std::size_t>> superposition_index;
};

TwoReceiverRun run_two_receivers(const EventStream& stream, const ReceiverConfig& config_a,
                                 const ReceiverConfig& config_b);

std::vector<std::pair<std::size_t, std::size_t>> superimposed_pairs(const SpikeTrain& a, const SpikeTrain& b);

struct WalkStats {
  double p = 0.0;
  int b = 0;
  std::uint64_t max_steps = 0;
  std::uint64_t replications = 0;
  double p_hat = 0.0;                      // positive steps / steps drawn
  std::vector<std::uint64_t> m_samples;    // M for the replications that crossed, in replication order
  double finite_fraction = 0.0;
  double mean_m = 0.0;                     // conditional on crossing; NaN if none crossed
  std::uint64_t steps_drawn = 0;
  std::uint64_t positive_steps = 0;
};

/// First passage of the +-1 walk (up with probability p) through level b,
/// one independent substream per replication. A replication that cannot reach b
/// within max_steps is stopped and counted as non-crossing; statistics on M are
/// conditional on crossing. Throws ModelExclusionError for p = 1/2 and
/// std::domain_error for p outside [0, 1], b < 1 or max_steps == 0.
WalkStats abstract_walk_first_passage(double p, int b, std::uint64_t max_steps, std::uint64_t replications,
                                      const RngHandle& rng);

/// Lagged upper-tail ratios of the output ISIs; needs >= 10^4 of them.
LagDependence output_independence_diagnostic(const SpikeTrain& train, std::span<const std::size_t> lags,
                                             std::span<const double> quantiles);

// CSV columns i,Z,M (i 1-based).
void write_spike_train_csv(std::ostream& out, const SpikeTrain& train);
void write_walk_json(std::ostream& out, const WalkStats& stats);

}  // namespace htif
