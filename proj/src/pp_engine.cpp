#include "htif/pp_engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "htif/errors.hpp"
#include "htif/io.hpp"

namespace htif {
namespace {

constexpr std::uint64_t kMaxConditioningAttempts = 1'000'000;
constexpr std::size_t kMinTauSamples = 100000;

void normalize(std::vector<std::size_t>& pool) {
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
}

}  // namespace

NetworkTopology NetworkTopology::make(std::size_t n, std::span<const std::size_t> inhibitory,
                                      std::vector<std::size_t> pool_a, std::vector<std::size_t> pool_b) {
  NetworkTopology t;
  t.n = n;
  t.excitatory.assign(n, true);
  for (std::size_t i : inhibitory) {
    if (i >= n) throw std::domain_error("inhibitory neuron id out of range");
    t.excitatory[i] = false;
  }
  normalize(pool_a);
  normalize(pool_b);
  t.pool_a = std::move(pool_a);
  t.pool_b = std::move(pool_b);
  t.validate();
  return t;
}

void NetworkTopology::validate() const {
  if (n == 0) throw std::domain_error("topology needs at least one neuron");
  if (excitatory.size() != n) throw std::domain_error("excitatory mask must have one entry per neuron");
  if (jump_amplitude != 1) throw std::domain_error("jump amplitude is fixed to 1");
  for (const auto* pool : {&pool_a, &pool_b}) {
    if (pool->empty()) throw std::domain_error("receiver pools must be nonempty");
    if (pool->back() >= n) throw std::domain_error("pool contains a neuron id out of range");
  }
}

std::size_t NetworkTopology::overlap() const {
  std::vector<std::size_t> common;
  std::set_intersection(pool_a.begin(), pool_a.end(), pool_b.begin(), pool_b.end(), std::back_inserter(common));
  return common.size();
}

double NetworkTopology::excitatory_fraction(std::span<const std::size_t> pool) const {
  if (pool.empty()) throw std::domain_error("empty pool");
  const auto up = std::count_if(pool.begin(), pool.end(), [&](std::size_t i) { return excitatory.at(i); });
  return static_cast<double>(up) / static_cast<double>(pool.size());
}

Schedule schedule_for(GeneratorMode mode) {
  return mode == GeneratorMode::round_synchronized_common_shock ? Schedule::round_synchronized
                                                                 : Schedule::free_running;
}

Engine::Engine(NetworkTopology topology, std::shared_ptr<const IsiSource> source, Schedule schedule,
               std::span<const Duration> offsets)
    : topology_(std::move(topology)), source_(std::move(source)), schedule_(schedule) {
  topology_.validate();
  if (!source_) throw std::invalid_argument("engine needs an ISI source");
  const std::size_t n = topology_.n;
  if (source_->neurons() != n) throw std::invalid_argument("ISI source and topology disagree on n");
  if (!offsets.empty() && offsets.size() != n) throw std::domain_error("offsets must have one entry per neuron");
  for (Duration t : offsets) {
    if (t < Duration::zero()) throw std::domain_error("offsets must be nonnegative");
  }
  auto offset = [&](std::size_t i) { return offsets.empty() ? Duration::zero() : offsets[i]; };

  state_.residuals.resize(n);
  state_.isi_index.assign(n, 1);
  state_.waiting.assign(n, 0);
  state_.events_per_neuron.assign(n, 0);

  std::vector<Duration> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = load(i, 1);
  auto accepted = [&](std::size_t i) { return first[i] > offset(i); };

  std::uint64_t attempt = 0;
  if (source_->redraws_jointly()) {
    while (!std::all_of(state_.isi_index.begin(), state_.isi_index.end(),
                        [&, i = std::size_t{0}](auto) mutable { return accepted(i++); })) {
      if (++attempt > kMaxConditioningAttempts) throw std::runtime_error("conditioning T_1 > t did not succeed");
      for (std::size_t i = 0; i < n; ++i) first[i] = source_->redrawn_first_isi(i, attempt);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t a = 0;
      while (!accepted(i)) {
        if (++a > kMaxConditioningAttempts) throw std::runtime_error("conditioning T_1 > t did not succeed");
        first[i] = source_->redrawn_first_isi(i, a);
      }
      attempt = std::max(attempt, a);
    }
  }
  state_.conditioning_attempts = attempt;
  for (std::size_t i = 0; i < n; ++i) state_.residuals[i] = first[i] - offset(i);
}

Duration Engine::load(std::size_t neuron, std::uint64_t round) const {
  const Duration isi = source_->isi(neuron, round);
  if (!isi.is_positive()) {
    throw InvariantViolation("nonpositive ISI for neuron " + std::to_string(neuron + 1) + ", index " +
                             std::to_string(round));
  }
  return isi;
}

void Engine::start_round(std::uint64_t round) {
  state_.round = round;
  state_.fired_in_round = 0;
  for (std::size_t i = 0; i < topology_.n; ++i) {
    state_.residuals[i] = load(i, round);
    state_.isi_index[i] = round;
    state_.waiting[i] = 0;
  }
}

EngineStep Engine::next_event() {
  const std::size_t n = topology_.n;
  std::size_t fire = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (state_.waiting[i]) continue;
    if (fire == n || state_.residuals[i] < state_.residuals[fire]) fire = i;
  }
  if (fire == n) throw InvariantViolation("no running clock");
  const Duration tau = state_.residuals[fire];
  if (tau < Duration::zero()) throw InvariantViolation("negative residual");

  for (std::size_t i = 0; i < n; ++i) {
    if (!state_.waiting[i]) state_.residuals[i] -= tau;
  }
  state_.current_time += tau;
  ++state_.events;
  ++state_.events_per_neuron[fire];

  EngineStep step;
  step.tau = tau;
  step.event.time = state_.current_time;
  step.event.source = static_cast<std::uint32_t>(fire);
  step.event.mark = topology_.excitatory[fire] ? std::int8_t{1} : std::int8_t{-1};

  if (schedule_ == Schedule::free_running) {
    state_.residuals[fire] = load(fire, ++state_.isi_index[fire]);
  } else {
    state_.waiting[fire] = 1;
    if (++state_.fired_in_round == n) start_round(state_.round + 1);
  }
  return step;
}

Engine init_engine(const NetworkTopology& topology, const InputGeneratorSpec& spec,
                   const std::optional<std::vector<double>>& offsets, const RngHandle& rng) {
  std::vector<Duration> ticks;
  if (offsets) {
    if (offsets->size() != topology.n) throw std::domain_error("offsets must have one entry per neuron");
    for (double t : *offsets) {
      if (!(t >= 0.0)) throw std::domain_error("offsets must be nonnegative");
      ticks.push_back(Duration::from_units(t));
    }
  }
  auto source = std::make_shared<const GeneratedIsiSource>(spec, rng);
  return Engine(topology, std::move(source), schedule_for(spec.mode), ticks);
}

void run_events(Engine& engine, std::size_t count, EventStream* stream, std::vector<double>* taus) {
  if (stream) stream->reserve(stream->size() + count);
  if (taus) taus->reserve(taus->size() + count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto step = engine.next_event();
    if (stream) stream->push_back(step.event);
    if (taus) taus->push_back(step.tau.to_double());
  }
}

EventStream filter_pool(const EventStream& stream, std::span<const std::size_t> pool) {
  EventStream out;
  for (const auto& e : stream) {
    if (std::binary_search(pool.begin(), pool.end(), static_cast<std::size_t>(e.source))) out.push_back(e);
  }
  return out;
}

LagDependence tau_independence_diagnostic(std::span<const double> taus, std::span<const std::size_t> lags,
                                          std::span<const double> quantiles) {
  return lagged_tail_dependence(taus, lags, quantiles, kMinTauSamples, "pooled waiting-time marginal");
}

EventCsvWriter::EventCsvWriter(std::ostream& out) : out_(out) { out_ << "time,source,mark\n"; }

void EventCsvWriter::write(const EventRecord& event) {
  out_ << format_duration(event.time) << ',' << event.source + 1 << ',' << static_cast<int>(event.mark) << '\n';
}

}  // namespace htif
