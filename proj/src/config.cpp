#include "htif/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "htif/errors.hpp"
#include "htif/io.hpp"

namespace htif {
namespace {

using nlohmann::json;

std::string join_key(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// One JSON object being consumed; keys that are never read are rejected by finish().
class Section {
 public:
  Section(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = object_.find(std::string(key));
    return it == object_.end() ? nullptr : &*it;
  }

  template <class T>
  std::optional<T> get(std::string_view key) {
    const json* value = find(key);
    if (!value) return std::nullopt;
    try {
      if constexpr (std::is_integral_v<T>) {
        if (!value->is_number_integer()) throw ConfigError(key_of(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (value->is_number_integer() && !value->is_number_unsigned() && value->get<std::int64_t>() < 0) {
            throw ConfigError(key_of(key), "expected a nonnegative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value->is_number()) throw ConfigError(key_of(key), "expected a number");
      }
      return value->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key_of(key), e.what());
    }
  }

  std::string key_of(std::string_view key) const { return join_key(path_, key); }
  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key_of(it.key()), "unknown key");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::size_t> all_neurons(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

std::vector<std::size_t> range_0based(std::size_t first1, std::size_t last1) {
  std::vector<std::size_t> v;
  for (std::size_t i = first1; i <= last1; ++i) v.push_back(i - 1);
  return v;
}

std::vector<std::size_t> lag_range(std::size_t last) {
  std::vector<std::size_t> v(last);
  std::iota(v.begin(), v.end(), std::size_t{1});
  return v;
}

bool uses_receivers(Scenario s) {
  return s == Scenario::output_rv || s == Scenario::output_independence || s == Scenario::joint_mrv ||
         s == Scenario::full_dependence;
}

bool uses_pool_b(Scenario s) { return s == Scenario::joint_mrv || s == Scenario::full_dependence; }

ExperimentConfig scenario_defaults(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.analysis.quantiles = kDefaultQuantileGrid;
  c.analysis.radial_t = {2.0, 4.0};
  c.generator.tail = TailModel{0.6, 1.0, SlowVariation::none};
  c.generator.mode = GeneratorMode::round_synchronized_common_shock;
  c.generator.multiplier_lo = 0.5;
  c.generator.multiplier_hi = 2.0;
  c.generator.jitter = 0.0;

  auto single_pool = [&](std::size_t n) {
    c.topology.n = n;
    c.topology.pool_a = all_neurons(n);
    c.topology.pool_b = all_neurons(n);
  };
  // Receiver scenarios: no multiplier spread, unit additive jitter.
  auto jittered = [&] {
    c.generator.multiplier_lo = 1.0;
    c.generator.multiplier_hi = 1.0;
    c.generator.jitter = 1.0;
  };

  switch (scenario) {
    case Scenario::hypothesis_audit:
      single_pool(3);
      c.budget = 1'000'000;
      c.analysis.lags = lag_range(5);
      break;
    case Scenario::forward_recurrence_rv:
      single_pool(3);
      c.budget = 100'000;
      c.offsets = std::vector<double>{1.0, 1.0, 1.0};
      c.thresholds.hill_tolerance = 0.07;
      break;
    case Scenario::tau_independence:
      single_pool(5);
      c.budget = 1'000'000;
      c.analysis.lags = lag_range(10);
      break;
    case Scenario::output_rv:
    case Scenario::output_independence:
      single_pool(10);
      c.topology.inhibitory = {8, 9};
      jittered();
      c.budget = 100'000;
      c.analysis.lags = lag_range(10);
      break;
    case Scenario::joint_mrv:
    case Scenario::full_dependence:
      c.topology.n = 26;
      c.topology.inhibitory = {4, 9, 14, 19, 24};
      c.topology.pool_a = range_0based(1, 14);
      c.topology.pool_b = range_0based(9, 26);
      jittered();
      c.budget = 200'000;
      break;
    case Scenario::walk_unit:
      single_pool(1);
      c.budget = 100'000;
      break;
  }
  return c;
}

std::vector<std::size_t> parse_id_list(const json& value, const std::string& key, std::size_t n) {
  std::vector<std::size_t> out;
  auto check = [&](std::int64_t id) {
    if (id < 1 || static_cast<std::size_t>(id) > n) {
      throw ConfigError(key, "neuron id " + std::to_string(id) + " outside 1.." + std::to_string(n));
    }
    return static_cast<std::size_t>(id - 1);
  };
  if (value.is_array()) {
    for (const auto& v : value) {
      if (!v.is_number_integer()) throw ConfigError(key, "neuron ids must be integers");
      out.push_back(check(v.get<std::int64_t>()));
    }
  } else if (value.is_object()) {
    Section s(value, key);
    const auto first = s.get<std::int64_t>("first");
    const auto last = s.get<std::int64_t>("last");
    s.finish();
    if (!first || !last) throw ConfigError(key, "a range needs both 'first' and 'last'");
    for (std::int64_t id = *first; id <= *last; ++id) out.push_back(check(id));
  } else {
    throw ConfigError(key, "expected an array of 1-based ids or {\"first\", \"last\"}");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> parse_number_list(const json& value, const std::string& key) {
  if (!value.is_array()) throw ConfigError(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw ConfigError(key, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

double excitatory_fraction(const TopologyConfig& t, const std::vector<std::size_t>& pool) {
  std::size_t down = 0;
  for (std::size_t i : pool) down += std::binary_search(t.inhibitory.begin(), t.inhibitory.end(), i);
  return static_cast<double>(pool.size() - down) / static_cast<double>(pool.size());
}

void validate(const ExperimentConfig& c) {
  require(c.budget >= 1, "budget", "must be at least 1");
  require(std::isfinite(c.budget_scale) && c.budget_scale > 0.0, "budget_scale", "must be positive");

  const auto& g = c.generator;
  require(g.tail.alpha > 0.0 && g.tail.alpha < 1.0, "generator.alpha",
          "tail index must lie in the open interval (0, 1)");
  require(std::isfinite(g.tail.scale) && g.tail.scale > 0.0, "generator.scale", "must be positive");
  require(std::isfinite(g.multiplier_lo) && g.multiplier_lo > 0.0, "generator.multiplier_lo", "must be positive");
  require(std::isfinite(g.multiplier_hi) && g.multiplier_hi >= g.multiplier_lo, "generator.multiplier_hi",
          "must be finite and >= multiplier_lo");
  require(std::isfinite(g.jitter) && g.jitter >= 0.0, "generator.jitter", "must be finite and >= 0");

  const auto& t = c.topology;
  require(t.n >= 1, "topology.n", "needs at least one neuron");
  require(!t.pool_a.empty(), "topology.pool_a", "pool must be nonempty");
  require(!t.pool_b.empty(), "topology.pool_b", "pool must be nonempty");
  if (uses_receivers(c.scenario)) {
    require(excitatory_fraction(t, t.pool_a) != 0.5, "topology.pool_a",
            "excitatory fraction 1/2 makes the membrane walk symmetric, which the model excludes");
    if (uses_pool_b(c.scenario)) {
      require(excitatory_fraction(t, t.pool_b) != 0.5, "topology.pool_b",
              "excitatory fraction 1/2 makes the membrane walk symmetric, which the model excludes");
    }
  }

  if (c.offsets) {
    require(c.offsets->size() == t.n, "offsets", "needs one entry per neuron");
    for (double v : *c.offsets) require(std::isfinite(v) && v >= 0.0, "offsets", "entries must be finite and >= 0");
  }
  require(c.threshold_a >= 1, "receivers.A.threshold", "must be a positive integer");
  require(c.threshold_b >= 1, "receivers.B.threshold", "must be a positive integer");

  require(c.walk.p >= 0.0 && c.walk.p <= 1.0, "walk.p", "must lie in [0, 1]");
  require(c.walk.p != 0.5, "walk.p", "p = 1/2 (symmetric walk) is excluded by the model");
  require(c.walk.b >= 1, "walk.b", "must be a positive integer");
  require(c.walk.max_steps >= 1, "walk.max_steps", "must be positive");

  const auto& a = c.analysis;
  require(!a.quantiles.empty(), "analysis.quantiles", "must be nonempty");
  for (std::size_t i = 0; i < a.quantiles.size(); ++i) {
    require(a.quantiles[i] > 0.0 && a.quantiles[i] < 1.0, "analysis.quantiles", "levels must lie in (0, 1)");
    if (i) require(a.quantiles[i] > a.quantiles[i - 1], "analysis.quantiles", "levels must be strictly increasing");
  }
  require(std::binary_search(a.quantiles.begin(), a.quantiles.end(), a.decision_level), "analysis.decision_level",
          "must be one of analysis.quantiles");
  for (std::size_t lag : a.lags) require(lag >= 1, "analysis.lags", "lags must be >= 1");
  if (a.hill_k) require(*a.hill_k >= 1, "analysis.hill_k", "must be >= 1");
  require(!a.radial_t.empty(), "analysis.radial_t", "must be nonempty");
  for (double v : a.radial_t) require(std::isfinite(v) && v >= 1.0, "analysis.radial_t", "entries must be >= 1");
  require(a.radial_level > 0.0 && a.radial_level < 1.0, "analysis.radial_level", "must lie in (0, 1)");
  require(a.spectral_bins >= 1, "analysis.spectral_bins", "must be >= 1");
  require(a.pair_a >= 1 && a.pair_b >= 1, "analysis.pair", "ISI indices are 1-based");
  require(a.homogeneity_factor >= 1, "analysis.homogeneity_factor", "must be a positive integer");

  const auto& th = c.thresholds;
  const std::pair<const char*, double> positive[] = {{"thresholds.hill_tolerance", th.hill_tolerance},
                        {"thresholds.equivalence_lo", th.equivalence_lo},
                        {"thresholds.equivalence_hi", th.equivalence_hi},
                        {"thresholds.independence_max", th.independence_max},
                        {"thresholds.dependence_min", th.dependence_min},
                        {"thresholds.radial_max_deviation", th.radial_max_deviation},
                        {"thresholds.walk_mean_rel_tolerance", th.walk_mean_rel_tolerance},
                        {"thresholds.walk_finite_fraction_tolerance", th.walk_finite_fraction_tolerance}};
  for (auto [key, v] : positive) {
    require(std::isfinite(v) && v > 0.0, key, "must be positive");
  }
  require(th.equivalence_hi >= th.equivalence_lo, "thresholds.equivalence_hi", "must be >= equivalence_lo");
}

json pool_json(const std::vector<std::size_t>& ids) {
  json out = json::array();
  for (std::size_t i : ids) out.push_back(i + 1);
  return out;
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::forward_recurrence_rv: return "forward_recurrence_rv";
    case Scenario::tau_independence: return "tau_independence";
    case Scenario::output_rv: return "output_rv";
    case Scenario::output_independence: return "output_independence";
    case Scenario::joint_mrv: return "joint_mrv";
    case Scenario::full_dependence: return "full_dependence";
    case Scenario::hypothesis_audit: return "hypothesis_audit";
    case Scenario::walk_unit: return "walk_unit";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(Scenario::walk_unit); ++i) {
    const auto s = static_cast<Scenario>(i);
    if (to_string(s) == text) return s;
  }
  throw ConfigError("scenario", "unknown scenario '" + std::string(text) + "'");
}

ExperimentConfig parse_config(const json& document, const ConfigOverrides& overrides) {
  Section root(document, "");
  const auto version = root.get<std::int64_t>("schema_version");
  require(version.has_value(), "schema_version", "is required");
  require(*version == kSchemaVersion, "schema_version", "unsupported version " + std::to_string(*version));
  const auto scenario_name = root.get<std::string>("scenario");
  require(scenario_name.has_value(), "scenario", "is required");

  ExperimentConfig c = scenario_defaults(parse_scenario(*scenario_name));
  if (auto v = root.get<std::uint64_t>("seed")) c.seed = *v;
  if (auto v = root.get<std::uint64_t>("budget")) c.budget = *v;
  if (auto v = root.get<double>("budget_scale")) c.budget_scale = *v;
  if (auto v = root.get<std::string>("output_dir")) c.output_dir = *v;

  if (const json* g = root.find("generator")) {
    Section s(*g, "generator");
    if (auto v = s.get<double>("alpha")) c.generator.tail.alpha = *v;
    if (auto v = s.get<double>("scale")) c.generator.tail.scale = *v;
    if (auto v = s.get<std::string>("mode")) {
      try {
        c.generator.mode = parse_generator_mode(*v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("generator.mode", e.what());
      }
    }
    if (auto v = s.get<double>("multiplier_lo")) c.generator.multiplier_lo = *v;
    if (auto v = s.get<double>("multiplier_hi")) c.generator.multiplier_hi = *v;
    if (auto v = s.get<double>("jitter")) c.generator.jitter = *v;
    s.finish();
  }

  if (const json* t = root.find("topology")) {
    Section s(*t, "topology");
    if (auto v = s.get<std::size_t>("n")) {
      require(*v >= 1, "topology.n", "needs at least one neuron");
      if (*v != c.topology.n) {
        c.topology.n = *v;
        c.topology.inhibitory.clear();
        c.topology.pool_a = all_neurons(*v);
        c.topology.pool_b = all_neurons(*v);
        if (c.offsets) c.offsets = std::vector<double>(*v, c.offsets->empty() ? 0.0 : c.offsets->front());
      }
    }
    const std::size_t n = c.topology.n;
    if (const json* v = s.find("inhibitory")) c.topology.inhibitory = parse_id_list(*v, "topology.inhibitory", n);
    if (const json* v = s.find("pool_a")) c.topology.pool_a = parse_id_list(*v, "topology.pool_a", n);
    if (const json* v = s.find("pool_b")) c.topology.pool_b = parse_id_list(*v, "topology.pool_b", n);
    s.finish();
  }
  c.generator.n = c.topology.n;

  if (const json* o = root.find("offsets")) {
    if (o->is_string()) {
      require(o->get<std::string>() == "zero", "offsets", "expected \"zero\" or an array of nonnegative numbers");
      c.offsets.reset();
    } else {
      c.offsets = parse_number_list(*o, "offsets");
    }
  }

  if (const json* r = root.find("receivers")) {
    Section s(*r, "receivers");
    for (auto [name, target] : {std::pair{"A", &c.threshold_a}, std::pair{"B", &c.threshold_b}}) {
      if (const json* rv = s.find(name)) {
        Section rs(*rv, std::string("receivers.") + name);
        if (auto v = rs.get<int>("threshold")) *target = *v;
        rs.finish();
      }
    }
    s.finish();
  }

  if (const json* w = root.find("walk")) {
    Section s(*w, "walk");
    if (auto v = s.get<double>("p")) c.walk.p = *v;
    if (auto v = s.get<int>("b")) c.walk.b = *v;
    if (auto v = s.get<std::uint64_t>("max_steps")) c.walk.max_steps = *v;
    s.finish();
  }

  if (const json* a = root.find("analysis")) {
    Section s(*a, "analysis");
    if (const json* v = s.find("quantiles")) c.analysis.quantiles = parse_number_list(*v, "analysis.quantiles");
    if (auto v = s.get<double>("decision_level")) c.analysis.decision_level = *v;
    if (const json* v = s.find("lags")) {
      c.analysis.lags.clear();
      require(v->is_array(), "analysis.lags", "expected an array of positive integers");
      for (const auto& lag : *v) {
        require(lag.is_number_integer() && lag.get<std::int64_t>() >= 1, "analysis.lags",
                "expected an array of positive integers");
        c.analysis.lags.push_back(lag.get<std::size_t>());
      }
    }
    if (const json* v = s.find("hill_k")) {
      if (v->is_null()) {
        c.analysis.hill_k.reset();
      } else {
        c.analysis.hill_k = s.get<std::size_t>("hill_k");
      }
    }
    if (const json* v = s.find("radial_t")) c.analysis.radial_t = parse_number_list(*v, "analysis.radial_t");
    if (auto v = s.get<double>("radial_level")) c.analysis.radial_level = *v;
    if (auto v = s.get<std::size_t>("spectral_bins")) c.analysis.spectral_bins = *v;
    if (const json* v = s.find("pair")) {
      require(v->is_array() && v->size() == 2 && (*v)[0].is_number_integer() && (*v)[1].is_number_integer(),
              "analysis.pair", "expected [j, k] with 1-based ISI indices");
      require((*v)[0].get<std::int64_t>() >= 1 && (*v)[1].get<std::int64_t>() >= 1, "analysis.pair",
              "ISI indices are 1-based");
      c.analysis.pair_a = (*v)[0].get<std::size_t>();
      c.analysis.pair_b = (*v)[1].get<std::size_t>();
    }
    if (auto v = s.get<std::int64_t>("homogeneity_factor")) c.analysis.homogeneity_factor = *v;
    if (auto v = s.get<std::uint64_t>("max_events")) c.analysis.max_events = *v;
    s.finish();
  }

  if (const json* th = root.find("thresholds")) {
    Section s(*th, "thresholds");
    auto& t = c.thresholds;
    const std::pair<const char*, double*> fields[] = {{"hill_tolerance", &t.hill_tolerance},
                               {"equivalence_lo", &t.equivalence_lo},
                               {"equivalence_hi", &t.equivalence_hi},
                               {"independence_max", &t.independence_max},
                               {"dependence_min", &t.dependence_min},
                               {"radial_max_deviation", &t.radial_max_deviation},
                               {"walk_mean_rel_tolerance", &t.walk_mean_rel_tolerance},
                               {"walk_finite_fraction_tolerance", &t.walk_finite_fraction_tolerance}};
    for (auto [key, target] : fields) {
      if (auto v = s.get<double>(key)) *target = *v;
    }
    s.finish();
  }
  root.finish();

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;
  if (overrides.budget_scale) c.budget_scale = *overrides.budget_scale;
  c.dump_events = overrides.dump_events;

  require(std::isfinite(c.budget_scale) && c.budget_scale > 0.0, "budget_scale", "must be positive");
  const double scaled = std::round(static_cast<double>(c.budget) * c.budget_scale);
  c.budget = scaled < 1.0 ? 1 : static_cast<std::uint64_t>(scaled);
  validate(c);
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(document, overrides);
}

nlohmann::ordered_json resolved_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = std::string(to_string(c.scenario));
  j["seed"] = c.seed;
  j["budget"] = c.budget;
  j["budget_scale"] = c.budget_scale;
  j["generator"] = {{"alpha", c.generator.tail.alpha},
                    {"scale", c.generator.tail.scale},
                    {"mode", std::string(to_string(c.generator.mode))},
                    {"multiplier_lo", c.generator.multiplier_lo},
                    {"multiplier_hi", c.generator.multiplier_hi},
                    {"jitter", c.generator.jitter}};
  j["topology"] = {{"n", c.topology.n},
                   {"inhibitory", pool_json(c.topology.inhibitory)},
                   {"pool_a", pool_json(c.topology.pool_a)},
                   {"pool_b", pool_json(c.topology.pool_b)}};
  if (c.offsets) {
    j["offsets"] = *c.offsets;
  } else {
    j["offsets"] = "zero";
  }
  j["receivers"] = {{"A", {{"threshold", c.threshold_a}}}, {"B", {{"threshold", c.threshold_b}}}};
  j["walk"] = {{"p", c.walk.p}, {"b", c.walk.b}, {"max_steps", c.walk.max_steps}};
  nlohmann::ordered_json a;
  a["quantiles"] = c.analysis.quantiles;
  a["decision_level"] = c.analysis.decision_level;
  a["lags"] = c.analysis.lags;
  if (c.analysis.hill_k) {
    a["hill_k"] = *c.analysis.hill_k;
  } else {
    a["hill_k"] = nullptr;
  }
  a["radial_t"] = c.analysis.radial_t;
  a["radial_level"] = c.analysis.radial_level;
  a["spectral_bins"] = c.analysis.spectral_bins;
  a["pair"] = {c.analysis.pair_a, c.analysis.pair_b};
  a["homogeneity_factor"] = c.analysis.homogeneity_factor;
  a["max_events"] = c.analysis.max_events;
  j["analysis"] = a;
  const auto& t = c.thresholds;
  j["thresholds"] = {{"hill_tolerance", t.hill_tolerance},
                     {"equivalence_lo", t.equivalence_lo},
                     {"equivalence_hi", t.equivalence_hi},
                     {"independence_max", t.independence_max},
                     {"dependence_min", t.dependence_min},
                     {"radial_max_deviation", t.radial_max_deviation},
                     {"walk_mean_rel_tolerance", t.walk_mean_rel_tolerance},
                     {"walk_finite_fraction_tolerance", t.walk_finite_fraction_tolerance}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(resolved_json(config).dump()); }

}  // namespace htif
