#include "htif/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "htif/errors.hpp"
#include "htif/if_dynamics.hpp"
#include "htif/io.hpp"
#include "htif/parallel.hpp"
#include "htif/pp_engine.hpp"

namespace htif {
namespace {

using ojson = nlohmann::ordered_json;

// Table builders. Every number goes through format_double so reruns are byte-identical.
class HillTable {
 public:
  HillTable() { out_ << "series,k,alpha_hat,ci_low,ci_high,n\n"; }
  void add(const std::string& series, std::span<const double> samples) {
    const auto ks = default_sweep_ks(samples.size());
    if (ks.empty()) return;
    for (const auto& e : hill_sweep(samples, ks)) {
      out_ << series << ',' << e.k << ',' << format_double(e.alpha_hat) << ',' << format_double(e.ci_low) << ','
           << format_double(e.ci_high) << ',' << e.n_samples << '\n';
    }
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

class DependenceTable {
 public:
  DependenceTable() { out_ << "statistic,lag,level,threshold,ratio,reference\n"; }
  void add(const std::string& statistic, const DependenceRatio& d) {
    for (std::size_t i = 0; i < d.levels.size(); ++i) row(statistic, "", d.levels[i], d.thresholds[i], d.ratios[i], d.reference);
  }
  void add(const std::string& statistic, const LagDependence& d) {
    for (std::size_t l = 0; l < d.lags.size(); ++l) {
      for (std::size_t i = 0; i < d.levels.size(); ++i) {
        row(statistic, std::to_string(d.lags[l]), d.levels[i], d.thresholds[i], d.ratios[l][i], d.reference);
      }
    }
  }
  void add(const std::string& statistic, const RatioCurve& c, const std::string& reference) {
    for (std::size_t i = 0; i < c.levels.size(); ++i) row(statistic, "", c.levels[i], c.thresholds[i], c.ratios[i], reference);
  }
  std::string str() const { return out_.str(); }

 private:
  void row(const std::string& statistic, const std::string& lag, double level, double threshold, double ratio,
           const std::string& reference) {
    out_ << statistic << ',' << lag << ',' << format_double(level) << ',' << format_double(threshold) << ','
         << format_double(ratio) << ',' << reference << '\n';
  }
  std::ostringstream out_;
};

std::string spectral_csv(const std::string& series, const SpectralEstimate& s) {
  std::ostringstream out;
  out << "series,cell,lower_corner,width,mass\n";
  for (std::size_t c = 0; c < s.histogram.size(); ++c) {
    std::string corner;
    for (double x : s.cell_lower_corner(c)) corner += (corner.empty() ? "" : ";") + format_double(x);
    out << series << ',' << c << ',' << corner << ',' << format_double(s.cell_width()) << ','
        << format_double(s.histogram[c]) << '\n';
  }
  return out.str();
}

ojson tail_json(const TailEstimate& e) {
  return {{"alpha_hat", e.alpha_hat}, {"k", e.k}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high},
          {"n_samples", e.n_samples}};
}

ojson curve_json(std::span<const double> levels, std::span<const double> thresholds, std::span<const double> ratios) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    rows.push_back({{"level", levels[i]}, {"threshold", thresholds[i]}, {"ratio", ratios[i]}});
  }
  return rows;
}

ojson dependence_json(const DependenceRatio& d) {
  return {{"reference", d.reference}, {"curve", curve_json(d.levels, d.thresholds, d.ratios)}};
}

ojson lag_json(const LagDependence& d) {
  ojson lags = ojson::array();
  for (std::size_t l = 0; l < d.lags.size(); ++l) {
    lags.push_back({{"lag", d.lags[l]}, {"curve", curve_json(d.levels, d.thresholds, d.ratios[l])}});
  }
  return {{"reference", d.reference}, {"lags", lags}};
}

ojson spectral_json(const SpectralEstimate& s) {
  return {{"dimension", s.dimension},         {"norm", s.norm},
          {"radial_quantile", s.radial_quantile}, {"radial_threshold", s.radial_threshold},
          {"exceedances", s.exceedances},     {"bins_per_axis", s.bins_per_axis}};
}

ojson radial_json(const RadialCheck& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"level", row.level},
                    {"base", row.base},
                    {"t", row.t},
                    {"empirical", row.empirical},
                    {"fitted", row.fitted},
                    {"abs_deviation", row.abs_deviation}});
  }
  return {{"alpha_hat", tail_json(r.alpha_hat)}, {"rows", rows}, {"max_abs_deviation", r.max_abs_deviation}};
}

class Evaluation {
 public:
  Evaluation(const ExperimentConfig& config, std::ostream* events) : c_(config), events_(events) {
    report_.config = config;
    report_.config_hash = config_hash(config);
  }

  RunReport run() {
    try {
      switch (c_.scenario) {
        case Scenario::hypothesis_audit: hypothesis_audit(); break;
        case Scenario::forward_recurrence_rv: forward_recurrence(); break;
        case Scenario::tau_independence: tau_independence(); break;
        case Scenario::output_rv:
        case Scenario::output_independence: single_receiver(); break;
        case Scenario::joint_mrv:
        case Scenario::full_dependence: two_receivers(); break;
        case Scenario::walk_unit: walk(); break;
      }
      const bool all = std::all_of(report_.checks.begin(), report_.checks.end(), [](const Check& k) { return k.pass; });
      report_.status = all && !report_.checks.empty() ? RunStatus::pass : RunStatus::fail;
    } catch (const InsufficientDataError& e) {
      report_.status = RunStatus::insufficient_data;
      report_.message = e.what();
    }
    report_.hill_sweep_csv = hill_used_ ? hill_.str() : std::string();
    report_.dependence_ratios_csv = dependence_used_ ? dependence_.str() : std::string();
    return std::move(report_);
  }

 private:
  void check(std::string name, double value, std::optional<double> min, std::optional<double> max) {
    const bool pass = std::isfinite(value) && (!min || value >= *min) && (!max || value <= *max);
    report_.checks.push_back({std::move(name), value, min, max, pass});
  }

  TailEstimate hill(std::span<const double> samples) {
    const std::size_t k = c_.analysis.hill_k.value_or(default_hill_k(samples.size()));
    if (samples.size() < 2 || k >= samples.size()) {
      throw InsufficientDataError("insufficient data: Hill estimate needs more than k = " + std::to_string(k) +
                                  " samples, got " + std::to_string(samples.size()));
    }
    return hill_estimate(samples, k);
  }

  void sweep(const std::string& series, std::span<const double> samples) {
    hill_used_ = true;
    hill_.add(series, samples);
  }

  void hill_check(const std::string& name, const TailEstimate& e) {
    const double alpha = c_.generator.tail.alpha;
    check(name, e.alpha_hat, alpha - c_.thresholds.hill_tolerance, alpha + c_.thresholds.hill_tolerance);
  }

  std::uint64_t event_cap(std::uint64_t per_unit) const {
    return c_.analysis.max_events ? c_.analysis.max_events : c_.budget * per_unit + 1'000'000;
  }

  NetworkTopology topology() const {
    return NetworkTopology::make(c_.topology.n, c_.topology.inhibitory, c_.topology.pool_a, c_.topology.pool_b);
  }

  void hypothesis_audit() {
    const auto chunk = generate_isi_chunk(c_.generator, c_.budget, RngHandle(c_.seed, 0));
    report_.samples = c_.budget;
    HypothesisThresholds t;
    t.hill_tolerance = c_.thresholds.hill_tolerance;
    t.equivalence_lo = c_.thresholds.equivalence_lo;
    t.equivalence_hi = c_.thresholds.equivalence_hi;
    t.h3_max = c_.thresholds.independence_max;
    t.h4_min = c_.thresholds.dependence_min;
    t.decision_level = c_.analysis.decision_level;
    t.h3_max_lag = c_.analysis.lags.empty() ? 5 : *std::max_element(c_.analysis.lags.begin(), c_.analysis.lags.end());
    const auto r = validate_hypotheses(chunk, c_.generator, t);
    const double q = t.decision_level;

    auto& s = report_.statistics;
    s["levels"] = r.levels;
    s["h1"] = {{"radial_tail", tail_json(r.radial_tail)}, {"pass", r.h1_pass}};
    if (c_.generator.n >= 2) {
      s["h1"]["spectral"] = spectral_json(r.spectral);
      report_.spectral_histogram_csv = spectral_csv("round_vector", r.spectral);
    }
    hill_check("H1 radial tail index", r.radial_tail);

    ojson marginals = ojson::array();
    for (std::size_t i = 0; i < r.marginal_tails.size(); ++i) {
      marginals.push_back(tail_json(r.marginal_tails[i]));
      hill_check("H2 tail index, neuron " + std::to_string(i + 1), r.marginal_tails[i]);
    }
    ojson equivalence = ojson::array();
    for (std::size_t i = 0; i < r.equivalence.size(); ++i) {
      const auto& e = r.equivalence[i];
      const std::string name = "neuron " + std::to_string(i + 2) + " vs neuron 1";
      equivalence.push_back({{"pair", name}, {"curve", curve_json(e.levels, e.thresholds, e.ratios)},
                             {"drift", e.drift()}});
      check("H2 equivalence ratio at q=" + format_double(q) + ", " + name, e.at(q), c_.thresholds.equivalence_lo,
            c_.thresholds.equivalence_hi);
      dependence_used_ = true;
      dependence_.add("H2 equivalence " + name, e, "pooled");
    }
    s["h2"] = {{"marginal_tails", marginals}, {"equivalence", equivalence}, {"pass", r.h2_pass}};

    ojson rows = ojson::array();
    for (std::size_t i = 0; i < r.within_row.size(); ++i) {
      const auto& d = r.within_row[i];
      rows.push_back(lag_json(d));
      dependence_.add("H3 neuron " + std::to_string(i + 1), d);
      double worst = 0.0;
      for (std::size_t lag : d.lags) worst = std::max(worst, d.at(lag, q));
      check("H3 max lagged ratio at q=" + format_double(q) + ", neuron " + std::to_string(i + 1), worst, std::nullopt,
            c_.thresholds.independence_max);
    }
    s["h3"] = {{"within_row", rows}, {"pass", r.h3_pass}};
    s["h4"] = {{"full_dependence", dependence_json(r.full_dependence)}, {"pass", r.h4_pass}};
    dependence_.add("H4 joint exceedance", r.full_dependence);
    check("H4 joint ratio at q=" + format_double(q), r.full_dependence.at(q), c_.thresholds.dependence_min,
          std::nullopt);

    std::vector<double> radii(chunk.rounds());
    for (std::size_t j = 0; j < chunk.rounds(); ++j) {
      for (std::size_t i = 0; i < chunk.neurons(); ++i) radii[j] += chunk.isi(i, j).to_double();
    }
    sweep("radius", radii);
    for (std::size_t i = 0; i < chunk.neurons(); ++i) sweep("neuron_" + std::to_string(i + 1), chunk.row(i));
  }

  void forward_recurrence() {
    const auto topo = topology();
    const std::size_t n = topo.n;
    const std::size_t reps = c_.budget;
    const RngHandle root(c_.seed, 0);
    std::vector<double> theta(reps * n);
    std::vector<std::uint64_t> attempts(reps);
    std::vector<EventRecord> first_events(events_ ? reps : 0);
    parallel_blocks(reps, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        Engine engine = init_engine(topo, c_.generator, c_.offsets, root.substream(r));
        for (std::size_t i = 0; i < n; ++i) theta[r * n + i] = engine.residuals()[i].to_double();
        attempts[r] = engine.state().conditioning_attempts;
        if (events_) first_events[r] = engine.next_event().event;
      }
    });
    report_.samples = reps;
    if (events_) {
      // One row per replication: the first event after the offset.
      EventCsvWriter writer(*events_);
      for (const auto& e : first_events) writer.write(e);
    }

    std::vector<std::vector<double>> marginal(n, std::vector<double>(reps));
    VectorSample vectors(n);
    for (std::size_t r = 0; r < reps; ++r) {
      for (std::size_t i = 0; i < n; ++i) marginal[i][r] = theta[r * n + i];
      vectors.push_back(std::span<const double>(theta.data() + r * n, n));
    }
    // Ties at the offset (T_1 == t to the tick) leave a zero residual; the Hill estimator needs positive samples.
    std::vector<double> pooled;
    pooled.reserve(theta.size());
    for (double x : theta) {
      if (x > 0.0) pooled.push_back(x);
    }
    const auto pooled_tail = hill(pooled);
    hill_check("pooled forward-recurrence tail index", pooled_tail);
    sweep("pooled_theta", pooled);

    auto& s = report_.statistics;
    s["pooled_tail"] = tail_json(pooled_tail);
    s["zero_residuals_dropped"] = theta.size() - pooled.size();
    std::uint64_t total_attempts = 0;
    for (auto a : attempts) total_attempts += a;
    s["conditioning_redraws"] = total_attempts;

    const double q = c_.analysis.decision_level;
    ojson marginals = ojson::array();
    ojson equivalence = ojson::array();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> positive;
      for (double x : marginal[i]) {
        if (x > 0.0) positive.push_back(x);
      }
      marginals.push_back(tail_json(hill(positive)));
      sweep("theta_" + std::to_string(i + 1), positive);
      if (i == 0) continue;
      const auto e = equivalence_ratio(marginal[i], marginal[0], c_.analysis.quantiles);
      const std::string name = "neuron " + std::to_string(i + 1) + " vs neuron 1";
      equivalence.push_back({{"pair", name}, {"curve", curve_json(e.levels, e.thresholds, e.ratios)}});
      dependence_used_ = true;
      dependence_.add("equivalence " + name, e, "pooled");
      check("equivalence ratio at q=" + format_double(q) + ", " + name, e.at(q), c_.thresholds.equivalence_lo,
            c_.thresholds.equivalence_hi);
    }
    s["marginal_tails"] = marginals;
    s["equivalence"] = equivalence;

    if (n >= 2) {
      const double radial_q = std::clamp(1.0 - 1000.0 / static_cast<double>(reps), 0.5, 0.99);
      const auto spectral = spectral_estimate(vectors, radial_q, c_.analysis.spectral_bins);
      s["spectral"] = spectral_json(spectral);
      report_.spectral_histogram_csv = spectral_csv("theta_1", spectral);
    }
  }

  void tau_independence() {
    const auto topo = topology();
    auto source = std::make_shared<const GeneratedIsiSource>(c_.generator, RngHandle(c_.seed, 0));
    std::vector<Duration> offsets = offset_ticks();
    Engine engine(topo, source, schedule_for(c_.generator.mode), offsets);
    std::vector<double> taus;
    taus.reserve(c_.budget);
    std::optional<EventCsvWriter> writer;
    if (events_) writer.emplace(*events_);
    for (std::uint64_t k = 0; k < c_.budget; ++k) {
      const auto step = engine.next_event();
      taus.push_back(step.tau.to_double());
      if (writer) writer->write(step.event);
    }
    report_.samples = taus.size();

    std::vector<double> positive;
    for (double t : taus) {
      if (t > 0.0) positive.push_back(t);
    }
    const auto tail = hill(positive);
    hill_check("waiting-time tail index", tail);
    sweep("tau", positive);

    const auto lagged = tau_independence_diagnostic(taus, c_.analysis.lags, c_.analysis.quantiles);
    dependence_used_ = true;
    dependence_.add("tau lagged", lagged);
    const double q = c_.analysis.decision_level;
    for (std::size_t lag : lagged.lags) {
      if (lag < topo.n) continue;  // lags inside one round share a shock: reported, not asserted
      check("tau lag " + std::to_string(lag) + " ratio at q=" + format_double(q), lagged.at(lag, q), std::nullopt,
            c_.thresholds.independence_max);
    }
    const auto control = upper_tail_independence(taus, taus, taus, c_.analysis.quantiles, "tau marginal");
    dependence_.add("comonotone control", control);
    const double lowest = *std::min_element(control.ratios.begin(), control.ratios.end());
    const double highest = *std::max_element(control.ratios.begin(), control.ratios.end());
    check("comonotone control ratio (min over levels)", lowest, 1.0, 1.0);
    check("comonotone control ratio (max over levels)", highest, 1.0, 1.0);

    auto& s = report_.statistics;
    s["tail"] = tail_json(tail);
    s["zero_taus_dropped"] = taus.size() - positive.size();
    s["lagged"] = lag_json(lagged);
    s["asserted_lags_from"] = topo.n;
    s["comonotone_control"] = dependence_json(control);
    s["rounds_completed"] = engine.state().round - 1;
  }

  std::vector<Duration> offset_ticks() const {
    std::vector<Duration> out;
    if (c_.offsets) {
      for (double t : *c_.offsets) out.push_back(Duration::from_units(t));
    }
    return out;
  }

  SpikeTrain collect_train(const NetworkTopology& topo, std::shared_ptr<const IsiSource> source, bool dump) {
    Engine engine(topo, std::move(source), schedule_for(c_.generator.mode), offset_ticks());
    Receiver receiver(ReceiverConfig{c_.threshold_a, topo.pool_a, "A"});
    std::optional<EventCsvWriter> writer;
    if (dump && events_) writer.emplace(*events_);
    const std::uint64_t cap = event_cap(1000);
    std::uint64_t events = 0;
    while (receiver.train().size() < c_.budget) {
      if (events++ >= cap) {
        throw InsufficientDataError("insufficient data: event cap " + std::to_string(cap) + " reached with " +
                                    std::to_string(receiver.train().size()) + " of " + std::to_string(c_.budget) +
                                    " output ISIs");
      }
      const auto step = engine.next_event();
      if (writer) writer->write(step.event);
      receiver.observe(step.event);
    }
    return receiver.take_train();
  }

  void single_receiver() {
    const auto topo = topology();
    auto source = std::make_shared<const GeneratedIsiSource>(c_.generator, RngHandle(c_.seed, 0));
    const auto train = collect_train(topo, source, true);
    report_.samples = train.size();
    const auto z = train.isis_as_double();
    std::vector<double> positive;
    for (double x : z) {
      if (x > 0.0) positive.push_back(x);
    }
    const auto tail = hill(positive);
    sweep("Z", positive);
    auto& s = report_.statistics;
    s["tail"] = tail_json(tail);
    s["zero_isis_dropped"] = z.size() - positive.size();
    s["pool_events"] = train.events_seen;
    s["excitatory_fraction"] = topo.excitatory_fraction(topo.pool_a);

    std::vector<std::size_t> lags = c_.analysis.lags;
    if (lags.empty()) lags = {1};
    const auto lagged = output_independence_diagnostic(train, lags, c_.analysis.quantiles);
    dependence_used_ = true;
    dependence_.add("output ISI lagged", lagged);
    s["lagged"] = lag_json(lagged);
    const double q = c_.analysis.decision_level;

    if (c_.scenario == Scenario::output_rv) {
      hill_check("output ISI tail index", tail);
      const auto factor = c_.analysis.homogeneity_factor;
      auto scaled = std::make_shared<const ScaledIsiSource>(source, factor);
      const auto train_scaled = collect_train(topo, scaled, false);
      std::uint64_t mismatched = 0;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (train_scaled.isis[i] != train.isis[i].scaled(factor) || train_scaled.boundaries[i] != train.boundaries[i]) {
          ++mismatched;
        }
      }
      s["homogeneity"] = {{"factor", factor}, {"compared", train.size()}, {"mismatched", mismatched}};
      check("homogeneity: ISIs scaled by " + std::to_string(factor) + " with unchanged M (mismatches)",
            static_cast<double>(mismatched), std::nullopt, 0.0);
    } else {
      for (std::size_t lag : lagged.lags) {
        check("output ISI lag " + std::to_string(lag) + " ratio at q=" + format_double(q), lagged.at(lag, q),
              std::nullopt, c_.thresholds.independence_max);
      }
    }
  }

  void two_receivers() {
    const auto topo = topology();
    const std::size_t reps = c_.budget;
    const RngHandle root(c_.seed, 0);
    const std::size_t ja = c_.analysis.pair_a, kb = c_.analysis.pair_b;
    const std::uint64_t cap = c_.analysis.max_events ? c_.analysis.max_events : 1'000'000;
    std::vector<double> za(reps), zb(reps);
    std::vector<char> censored(reps, 0);
    std::vector<std::uint64_t> overlapping(reps, 0);

    auto replicate = [&](std::size_t r, std::ostream* dump) {
      auto source = std::make_shared<const GeneratedIsiSource>(c_.generator, root.substream(r));
      Engine engine(topo, source, schedule_for(c_.generator.mode), offset_ticks());
      Receiver a(ReceiverConfig{c_.threshold_a, topo.pool_a, "A"});
      Receiver b(ReceiverConfig{c_.threshold_b, topo.pool_b, "B"});
      std::optional<EventCsvWriter> writer;
      if (dump) writer.emplace(*dump);
      std::uint64_t events = 0;
      while (a.train().size() < ja || b.train().size() < kb) {
        if (events++ >= cap) {
          censored[r] = 1;
          return;
        }
        const auto step = engine.next_event();
        if (writer) writer->write(step.event);
        a.observe(step.event);
        b.observe(step.event);
      }
      za[r] = a.train().isis[ja - 1].to_double();
      zb[r] = b.train().isis[kb - 1].to_double();
      overlapping[r] = superimposed_pairs(a.train(), b.train()).size();
    };
    if (events_ && reps > 0) replicate(0, events_);
    parallel_blocks(reps, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = std::max<std::size_t>(begin, events_ ? 1 : 0); r < end; ++r) replicate(r, nullptr);
    });

    std::vector<double> xa, xb;
    VectorSample vectors(2);
    std::uint64_t n_censored = 0;
    std::uint64_t superimposed = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (censored[r]) {
        ++n_censored;
        continue;
      }
      xa.push_back(za[r]);
      xb.push_back(zb[r]);
      const double row[2] = {za[r], zb[r]};
      vectors.push_back(row);
      superimposed += overlapping[r] > 0;
    }
    report_.samples = xa.size();
    auto& s = report_.statistics;
    s["pair"] = {ja, kb};
    s["replications"] = reps;
    s["censored_replications"] = n_censored;
    s["pool_overlap"] = topo.overlap();
    s["excitatory_fraction"] = {{"A", topo.excitatory_fraction(topo.pool_a)},
                                {"B", topo.excitatory_fraction(topo.pool_b)}};
    if (xa.size() < 2) throw InsufficientDataError("insufficient data: no completed replications");

    std::vector<double> pa, pb;
    for (double x : xa) {
      if (x > 0.0) pa.push_back(x);
    }
    for (double x : xb) {
      if (x > 0.0) pb.push_back(x);
    }
    s["tail_A"] = tail_json(hill(pa));
    s["tail_B"] = tail_json(hill(pb));
    sweep("Z_A", pa);
    sweep("Z_B", pb);
    const auto radii = vectors.l1_norms();
    sweep("radius", radii);

    const double q = c_.analysis.decision_level;
    // z_q comes from the pooled marginals, so the statistic does not hinge on which
    // receiver is designated as reference when the two tails differ.
    std::vector<double> pooled(xa);
    pooled.insert(pooled.end(), xb.begin(), xb.end());
    const auto dependence = upper_tail_independence(xa, xb, pooled, c_.analysis.quantiles, "pooled Z_A, Z_B");
    const auto against_a = upper_tail_independence(xa, xb, xa, c_.analysis.quantiles, "Z_A");
    dependence_used_ = true;
    dependence_.add("joint exceedance", dependence);
    dependence_.add("joint exceedance, Z_A reference", against_a);
    s["full_dependence"] = dependence_json(dependence);
    s["full_dependence_Z_A_reference"] = dependence_json(against_a);
    try {
      const auto e = equivalence_ratio(xb, xa, c_.analysis.quantiles);
      s["marginal_equivalence_B_vs_A"] = curve_json(e.levels, e.thresholds, e.ratios);
    } catch (const InsufficientDataError&) {
      s["marginal_equivalence_B_vs_A"] = nullptr;
    }

    const std::vector<double> level{c_.analysis.radial_level};
    if (c_.scenario == Scenario::joint_mrv) {
      const auto radial = radial_rv_check(vectors, c_.analysis.radial_t, level);
      s["radial_check"] = radial_json(radial);
      for (double t : c_.analysis.radial_t) {
        const double dev = radial.max_deviation_for(std::span<const double>(&t, 1));
        check("radial deviation |P(R>tx)/P(R>x) - t^-alpha_hat| at t=" + format_double(t), dev, std::nullopt,
              c_.thresholds.radial_max_deviation);
      }
      const auto spectral = spectral_estimate(vectors, c_.analysis.radial_level, c_.analysis.spectral_bins);
      s["spectral"] = spectral_json(spectral);
      report_.spectral_histogram_csv = spectral_csv("Z_A,Z_B", spectral);
    } else {
      check("joint exceedance ratio at q=" + format_double(q), dependence.at(q), c_.thresholds.dependence_min,
            std::nullopt);
    }
  }

  void walk() {
    const auto& w = c_.walk;
    const auto stats = abstract_walk_first_passage(w.p, w.b, w.max_steps, c_.budget, RngHandle(c_.seed, 0));
    report_.samples = stats.replications;
    std::ostringstream out;
    write_walk_json(out, stats);
    report_.walk_json = out.str();
    auto& s = report_.statistics;
    s["p_hat"] = stats.p_hat;
    s["finite_fraction"] = stats.finite_fraction;
    s["crossings"] = stats.m_samples.size();
    if (stats.m_samples.empty()) {
      s["mean_m"] = nullptr;
    } else {
      s["mean_m"] = stats.mean_m;
    }
    if (w.p > 0.5) {
      const double expected = w.b / (2.0 * w.p - 1.0);
      s["expected_mean_m"] = expected;
      const double tol = c_.thresholds.walk_mean_rel_tolerance * expected;
      check("mean first-passage count M", stats.mean_m, expected - tol, expected + tol);
    } else {
      const double expected = std::pow(w.p / (1.0 - w.p), w.b);
      s["expected_finite_fraction"] = expected;
      const double tol = c_.thresholds.walk_finite_fraction_tolerance;
      check("fraction of replications crossing b", stats.finite_fraction, expected - tol, expected + tol);
    }
  }

  const ExperimentConfig& c_;
  std::ostream* events_;
  RunReport report_;
  HillTable hill_;
  DependenceTable dependence_;
  bool hill_used_ = false;
  bool dependence_used_ = false;
};

ojson check_json(const Check& k) {
  ojson j;
  j["name"] = k.name;
  j["value"] = k.value;
  if (k.min) j["min"] = *k.min;
  if (k.max) j["max"] = *k.max;
  j["pass"] = k.pass;
  return j;
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::pass: return "pass";
    case RunStatus::fail: return "fail";
    case RunStatus::insufficient_data: return "insufficient_data";
  }
  return "unknown";
}

int RunReport::exit_code() const {
  switch (status) {
    case RunStatus::pass: return 0;
    case RunStatus::fail: return 1;
    case RunStatus::insufficient_data: return 2;
  }
  return 1;
}

nlohmann::ordered_json RunReport::to_json() const {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = std::string(to_string(config.scenario));
  j["config_hash"] = config_hash;
  j["seed"] = config.seed;
  j["status"] = std::string(to_string(status));
  if (!message.empty()) j["message"] = message;
  j["samples"] = samples;
  ojson checks_json = ojson::array();
  for (const auto& k : checks) checks_json.push_back(check_json(k));
  j["checks"] = checks_json;
  j["statistics"] = statistics;
  j["config"] = resolved_json(config);
  return j;
}

RunReport evaluate_experiment(const ExperimentConfig& config) { return Evaluation(config, nullptr).run(); }

void write_report_files(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.json", report.to_json().dump(2) + "\n");
  if (!report.hill_sweep_csv.empty()) write_text_file(dir / "hill_sweep.csv", report.hill_sweep_csv);
  if (!report.dependence_ratios_csv.empty()) {
    write_text_file(dir / "dependence_ratios.csv", report.dependence_ratios_csv);
  }
  if (!report.spectral_histogram_csv.empty()) {
    write_text_file(dir / "spectral_histogram.csv", report.spectral_histogram_csv);
  }
  if (!report.walk_json.empty()) write_text_file(dir / "walk.json", report.walk_json);
  ojson timing = {{"wall_seconds", report.wall_seconds}, {"threads", replication_threads()}};
  write_text_file(dir / "timing.json", timing.dump(2) + "\n");
}

RunReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.output_dir);
  RunReport report;
  if (config.dump_events) {
    std::ofstream events(config.output_dir / "events.csv", std::ios::binary);
    if (!events) throw std::runtime_error("cannot open events.csv for writing");
    report = Evaluation(config, &events).run();
  } else {
    report = Evaluation(config, nullptr).run();
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_report_files(report, config.output_dir);
  return report;
}

}  // namespace htif
