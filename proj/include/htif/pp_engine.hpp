#pragma once

// The rolling superposition mechanism: per-neuron clocks, forward recurrence
// residuals Theta^i, the pooled marked point process and its waiting times tau_k.

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "htif/duration.hpp"
#include "htif/mrv_input.hpp"
#include "htif/tail_stats.hpp"

namespace htif {

/// n input neurons partitioned into excitatory (V-up) and inhibitory (V-down),
/// feeding two receivers through pools A and B (0-based, sorted, possibly overlapping).
struct NetworkTopology {
  std::size_t n = 0;
  std::vector<bool> excitatory;
  std::vector<std::size_t> pool_a;
  std::vector<std::size_t> pool_b;
  int jump_amplitude = 1;

  // Sorts and deduplicates the pools. `inhibitory` lists 0-based neuron ids.
  static NetworkTopology make(std::size_t n, std::span<const std::size_t> inhibitory,
                              std::vector<std::size_t> pool_a, std::vector<std::size_t> pool_b);
  // Throws std::domain_error on empty pools, out-of-range ids or a mask of the wrong size.
  void validate() const;
  std::size_t overlap() const;
  // Probability of a positive jump for a receiver fed by `pool`.
  double excitatory_fraction(std::span<const std::size_t> pool) const;
};

struct EventRecord {
  Duration time;
  std::uint32_t source = 0;  // 0-based neuron id
  std::int8_t mark = 1;      // +1 excitatory, -1 inhibitory
};

// Time-ordered pooled input. Times are nondecreasing; equal times only arise
// from exactly tied residuals and are then ordered by neuron id.
using EventStream = std::vector<EventRecord>;

enum class Schedule {
  // Every neuron runs ISI j of the round together; a neuron that fired waits
  // until all n have fired, then all clocks restart on round j + 1.
  round_synchronized,
  // Each neuron renews immediately after firing.
  free_running,
};

Schedule schedule_for(GeneratorMode mode);

struct EngineState {
  Duration current_time;
  std::vector<Duration> residuals;          // Theta^i; meaningless while waiting[i]
  std::vector<std::uint64_t> isi_index;     // 1-based index j of the ISI neuron i is running
  std::vector<char> waiting;                // round-synchronized: fired, idle until the barrier
  std::uint64_t round = 1;
  std::size_t fired_in_round = 0;
  std::uint64_t events = 0;
  std::vector<std::uint64_t> events_per_neuron;
  std::uint64_t conditioning_attempts = 0;  // rejection draws spent on T_1 > t
};

struct EngineStep {
  Duration tau;
  EventRecord event;
};

class Engine {
 public:
  // `offsets` are the elapsed parts t_i of the intervals straddling time 0;
  // empty means all zero. T_1 is redrawn until T_1^i > t_i (jointly when the
  // source has dependent components), then Theta_1^i = T_1^i - t_i.
  Engine(NetworkTopology topology, std::shared_ptr<const IsiSource> source, Schedule schedule,
         std::span<const Duration> offsets = {});

  // tau = min_i Theta^i (lowest id on ties); the argmin fires and renews, every
  // other running residual decreases by tau.
  EngineStep next_event();

  const EngineState& state() const { return state_; }
  const NetworkTopology& topology() const { return topology_; }
  Schedule schedule() const { return schedule_; }
  std::span<const Duration> residuals() const { return state_.residuals; }

 private:
  Duration load(std::size_t neuron, std::uint64_t round) const;
  void start_round(std::uint64_t round);

  NetworkTopology topology_;
  std::shared_ptr<const IsiSource> source_;
  Schedule schedule_;
  EngineState state_;
};

// Offsets: nullopt means "zero". Throws std::domain_error for negative offsets
// or a length different from n.
Engine init_engine(const NetworkTopology& topology, const InputGeneratorSpec& spec,
                   const std::optional<std::vector<double>>& offsets, const RngHandle& rng);

// Runs `count` events; appends to `stream` and to `taus` when non-null.
void run_events(Engine& engine, std::size_t count, EventStream* stream, std::vector<double>* taus);

EventStream filter_pool(const EventStream& stream, std::span<const std::size_t> pool);

/// Lagged upper-tail ratios of the waiting times; needs >= 10^5 samples.
LagDependence tau_independence_diagnostic(std::span<const double> taus, std::span<const std::size_t> lags,
                                          std::span<const double> quantiles);

// CSV columns time,source,mark (sources 1-based). Rows can be streamed one at a time.
class EventCsvWriter {
 public:
  explicit EventCsvWriter(std::ostream& out);
  void write(const EventRecord& event);

 private:
  std::ostream& out_;
};

}  // namespace htif
