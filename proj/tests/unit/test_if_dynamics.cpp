#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "htif/errors.hpp"
#include "htif/if_dynamics.hpp"
#include "support/reference_simulator.hpp"

using namespace htif;

namespace {

Duration u(double x) { return Duration::from_units(x); }

EventStream stream_of(const std::vector<int>& marks, double spacing = 1.0) {
  EventStream s;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    s.push_back({u(spacing * static_cast<double>(i + 1)), 0, static_cast<std::int8_t>(marks[i])});
  }
  return s;
}

ReceiverConfig receiver(int b, std::vector<std::size_t> pool = {0}) {
  ReceiverConfig c;
  c.threshold_b = b;
  c.pool = std::move(pool);
  return c;
}

std::vector<std::size_t> iota_pool(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

InputGeneratorSpec receiver_spec(std::size_t n) {
  InputGeneratorSpec s;
  s.n = n;
  s.tail = {0.6, 1.0};
  s.multiplier_lo = 1.0;
  s.multiplier_hi = 1.0;
  s.jitter = 1.0;
  s.mode = GeneratorMode::asynchronous_common_shock;
  return s;
}

}  // namespace

TEST_CASE("threshold crossing from unit increments") {
  const auto train = run_receiver(stream_of({1, 1, 1, 1, 1}), receiver(3));
  REQUIRE(train.size() == 1);
  CHECK(train.isis[0] == u(3.0));
  CHECK(train.boundaries[0] == 3);
  CHECK(train.silent_tail);
  CHECK(train.events_seen == 5);
}

TEST_CASE("an inhibitory event delays the crossing") {
  const auto train = run_receiver(stream_of({1, -1, 1, 1, 1}), receiver(2));
  REQUIRE(train.size() == 1);
  CHECK(train.isis[0] == u(4.0));
  CHECK(train.boundaries[0] == 4);
}

TEST_CASE("empty input and out-of-pool events") {
  CHECK(run_receiver({}, receiver(1)).size() == 0);
  EventStream s{{u(1.0), 1, 1}, {u(2.0), 2, 1}};
  const auto train = run_receiver(s, receiver(1, {0}));
  CHECK(train.size() == 0);
  CHECK(train.events_seen == 0);
  CHECK_FALSE(train.silent_tail);
  CHECK_THROWS_AS(Receiver(receiver(0)), std::domain_error);
  CHECK_THROWS_AS(Receiver(receiver(2, {})), std::domain_error);
}

TEST_CASE("all-excitatory pool fires every b events") {
  auto e = init_engine(NetworkTopology::make(4, {}, iota_pool(4), iota_pool(4)), receiver_spec(4), std::nullopt,
                       RngHandle(41, 0));
  EventStream s;
  std::vector<double> taus;
  run_events(e, 5000, &s, &taus);
  const auto train = run_receiver(s, receiver(7, iota_pool(4)));
  CHECK(train.size() == 5000 / 7);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train.boundaries[i] == 7 * (i + 1));
}

TEST_CASE("receiver walk properties on a mixed network") {
  const std::vector<std::size_t> inh{8, 9};
  const auto topo = NetworkTopology::make(10, inh, iota_pool(10), iota_pool(10));
  auto e = init_engine(topo, receiver_spec(10), std::nullopt, RngHandle(42, 0));
  EventStream s;
  std::vector<double> taus;
  run_events(e, 200000, &s, &taus);

  Receiver r(receiver(5, iota_pool(10)));
  std::vector<Duration> tau_exact;
  Duration previous;
  for (const auto& ev : s) {
    tau_exact.push_back(ev.time - previous);
    previous = ev.time;
  }
  std::vector<std::size_t> fire_index;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int before = r.potential();
    const bool fired = r.observe(s[i]);
    CHECK(r.potential() < 5);
    if (fired) {
      // First passage: it fires the moment Y reaches b, never above it.
      CHECK(before == 4);
      CHECK(s[i].mark == 1);
      CHECK(r.potential() == 0);
      fire_index.push_back(i);
    }
  }
  const auto& train = r.train();
  REQUIRE(train.size() > 100);

  // Z_i is exactly the sum of the waiting times between consecutive spikes.
  std::size_t from = 0;
  for (std::size_t k = 0; k < train.size(); ++k) {
    Duration sum;
    for (std::size_t i = from; i <= fire_index[k]; ++i) sum += tau_exact[i];
    CHECK(sum == train.isis[k]);
    CHECK(train.boundaries[k] == fire_index[k] + 1);
    from = fire_index[k] + 1;
  }
  const Duration total = std::accumulate(train.isis.begin(), train.isis.end(), Duration{});
  CHECK(total == train.firing_times.back());
}

TEST_CASE("scaling every input ISI by an integer scales Z and leaves M alone") {
  const std::vector<std::size_t> inh{8, 9};
  const auto topo = NetworkTopology::make(10, inh, iota_pool(10), iota_pool(10));
  const auto spec = receiver_spec(10);
  const RngHandle rng(43, 0);
  auto base = std::make_shared<const GeneratedIsiSource>(spec, rng);
  Engine plain(topo, base, Schedule::free_running);
  Engine scaled(topo, std::make_shared<const ScaledIsiSource>(base, 3), Schedule::free_running);
  EventStream s1, s3;
  run_events(plain, 50000, &s1, nullptr);
  run_events(scaled, 50000, &s3, nullptr);
  const auto t1 = run_receiver(s1, receiver(5, iota_pool(10)));
  const auto t3 = run_receiver(s3, receiver(5, iota_pool(10)));
  REQUIRE(t1.size() == t3.size());
  REQUIRE(t1.size() > 100);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t3.isis[i] == t1.isis[i].scaled(3));
    CHECK(t3.boundaries[i] == t1.boundaries[i]);
  }
}

TEST_CASE("identical receivers superimpose on the diagonal") {
  const std::vector<std::size_t> inh{1};
  const auto topo = NetworkTopology::make(3, inh, iota_pool(3), iota_pool(3));
  auto e = init_engine(topo, receiver_spec(3), std::nullopt, RngHandle(44, 0));
  EventStream s;
  run_events(e, 20000, &s, nullptr);
  auto a = receiver(3, iota_pool(3));
  auto b = a;
  b.label = "B";
  const auto run = run_two_receivers(s, a, b);
  REQUIRE(run.a.size() > 10);
  REQUIRE(run.superposition_index.size() == run.a.size());
  for (std::size_t i = 0; i < run.a.size(); ++i) {
    CHECK(run.superposition_index[i] == std::pair<std::size_t, std::size_t>{i, i});
  }
}

TEST_CASE("superposition of hand-built trains") {
  SpikeTrain a, b;
  a.firing_times = {u(2), u(5), u(9)};
  a.isis = {u(2), u(3), u(4)};
  b.firing_times = {u(5), u(6)};
  b.isis = {u(5), u(1)};
  const auto pairs = superimposed_pairs(a, b);
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 0}, {1, 0}, {2, 1}};
  CHECK(pairs == expected);
}

TEST_CASE("abstract walk") {
  const auto up = abstract_walk_first_passage(1.0, 4, 100, 1000, RngHandle(1, 0));
  CHECK(up.finite_fraction == 1.0);
  CHECK(up.mean_m == 4.0);
  for (auto m : up.m_samples) CHECK(m == 4);

  // E[M] = b / (2p - 1) = 25, Var[M] = 4 b p (1 - p) / (2p - 1)^3 ~ 131.
  const auto drift = abstract_walk_first_passage(0.7, 10, 1'000'000, 100000, RngHandle(2, 0));
  CHECK(drift.finite_fraction == 1.0);
  CHECK(std::abs(drift.mean_m - 25.0) <= 0.5);
  CHECK(std::abs(drift.p_hat - 0.7) <= 0.002);
  for (auto m : drift.m_samples) CHECK(m % 2 == 0);

  // P(M < inf) = (p / (1 - p))^b.
  const auto down = abstract_walk_first_passage(0.4, 3, 1000, 100000, RngHandle(3, 0));
  const double target = std::pow(0.4 / 0.6, 3);
  const double se = std::sqrt(target * (1 - target) / 1e5);
  CHECK(std::abs(down.finite_fraction - target) <= 4 * se);
  for (auto m : down.m_samples) CHECK(m % 2 == 1);

  const auto never = abstract_walk_first_passage(0.0, 2, 100, 50, RngHandle(4, 0));
  CHECK(never.finite_fraction == 0.0);
  CHECK(std::isnan(never.mean_m));

  CHECK_THROWS_AS(abstract_walk_first_passage(0.5, 3, 100, 10, RngHandle(1, 0)), ModelExclusionError);
  CHECK_THROWS_AS(abstract_walk_first_passage(1.2, 3, 100, 10, RngHandle(1, 0)), std::domain_error);
  CHECK_THROWS_AS(abstract_walk_first_passage(0.7, 0, 100, 10, RngHandle(1, 0)), std::domain_error);
  CHECK_THROWS_AS(abstract_walk_first_passage(0.7, 3, 0, 10, RngHandle(1, 0)), std::domain_error);
}

TEST_CASE("walk replications are deterministic and thread-count independent") {
  const auto a = abstract_walk_first_passage(0.6, 5, 10000, 5000, RngHandle(9, 0));
  const auto b = abstract_walk_first_passage(0.6, 5, 10000, 5000, RngHandle(9, 0));
  CHECK(a.m_samples == b.m_samples);
  CHECK(a.steps_drawn == b.steps_drawn);
}

TEST_CASE("output independence diagnostic") {
  RngHandle rng(45, 0);
  SpikeTrain iid;
  for (int i = 0; i < 200000; ++i) iid.isis.push_back(u(sample_pareto({0.6, 1.0}, rng)));
  const std::vector<std::size_t> lags{1, 2, 3};
  const auto d = output_independence_diagnostic(iid, lags, kDefaultQuantileGrid);
  for (auto lag : lags) CHECK(d.at(lag, 0.999) <= 0.006);

  SpikeTrain twice;
  for (std::size_t i = 0; i < 100000; ++i) {
    twice.isis.push_back(iid.isis[i]);
    twice.isis.push_back(iid.isis[i]);
  }
  CHECK(std::abs(output_independence_diagnostic(twice, lags, kDefaultQuantileGrid).at(1, 0.999) - 0.5) <= 0.05);

  SpikeTrain small;
  small.isis.assign(iid.isis.begin(), iid.isis.begin() + 9999);
  CHECK_THROWS_AS(output_independence_diagnostic(small, lags, kDefaultQuantileGrid), InsufficientDataError);
}

TEST_CASE("engine and receiver agree with a brute-force simulator") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> isi_units(1, 3), count(1, 20), pick(0, 1);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const bool synchronized = trial % 2 == 1;
    const std::size_t rounds = 60;
    std::vector<std::vector<Duration>> isis(n, std::vector<Duration>(rounds));
    IsiMatrixChunk chunk(n, 1, rounds);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < rounds; ++r) {
        isis[i][r] = Duration::from_units(isi_units(gen));
        chunk.set_isi(i, r, isis[i][r]);
      }
    }
    std::vector<std::size_t> inhibitory, pool;
    std::vector<int> marks(n);
    std::vector<bool> in_pool(n);
    for (std::size_t i = 0; i < n; ++i) {
      marks[i] = pick(gen) == 1 && i > 0 ? -1 : 1;
      if (marks[i] < 0) inhibitory.push_back(i);
      in_pool[i] = i == 0 || pick(gen) == 1;
      if (in_pool[i]) pool.push_back(i);
    }
    const auto topo = NetworkTopology::make(n, inhibitory, pool, pool);
    const std::size_t k = static_cast<std::size_t>(count(gen));
    const int b = 1 + trial % 3;

    Engine e(topo, std::make_shared<const ChunkIsiSource>(chunk),
             synchronized ? Schedule::round_synchronized : Schedule::free_running);
    EventStream s;
    run_events(e, k, &s, nullptr);
    const auto expected = reference::pooled_events(isis, marks, synchronized, k);
    REQUIRE(s.size() == expected.size());
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(s[j].time == expected[j].time);
      CHECK(s[j].source == expected[j].neuron);
      CHECK(s[j].mark == expected[j].mark);
    }
    const auto train = run_receiver(s, receiver(b, pool));
    const auto ref = reference::walk(expected, in_pool, b);
    CHECK(train.isis == ref.z);
    CHECK(train.boundaries == ref.m);
    CHECK(train.firing_times == ref.fire);
  }
}

TEST_CASE("spike train CSV and walk JSON") {
  const auto train = run_receiver(stream_of({1, 1, 1, 1}), receiver(2));
  std::ostringstream csv;
  write_spike_train_csv(csv, train);
  CHECK(csv.str() == "i,Z,M\n1,2,2\n2,2,4\n");
  std::ostringstream js;
  write_walk_json(js, abstract_walk_first_passage(1.0, 2, 10, 3, RngHandle(1, 0)));
  const auto parsed = nlohmann::json::parse(js.str());
  CHECK(parsed.at("b") == 2);
}
