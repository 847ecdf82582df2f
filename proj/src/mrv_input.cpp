#include "htif/mrv_input.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "htif/errors.hpp"
#include "htif/io.hpp"

namespace htif {
namespace {

// Third counter word of an addressed draw: (attempt << 8) | kind.
enum DrawKind : std::uint64_t { kShock = 0, kNeuron = 1, kIndependent = 2 };

std::uint64_t draw_tag(DrawKind kind, std::uint64_t attempt) { return (attempt << 8) | kind; }

constexpr std::size_t kMinAuditRounds = 10000;
constexpr double kMinExpectedExceedances = 10.0;

}  // namespace

std::string_view to_string(GeneratorMode mode) {
  switch (mode) {
    case GeneratorMode::round_synchronized_common_shock: return "round_synchronized_common_shock";
    case GeneratorMode::asynchronous_common_shock: return "asynchronous_common_shock";
    case GeneratorMode::independent_baseline: return "independent_baseline";
  }
  return "unknown";
}

GeneratorMode parse_generator_mode(std::string_view text) {
  for (auto mode : {GeneratorMode::round_synchronized_common_shock, GeneratorMode::asynchronous_common_shock,
                    GeneratorMode::independent_baseline}) {
    if (to_string(mode) == text) return mode;
  }
  throw std::invalid_argument("unknown generator mode '" + std::string(text) + "'");
}

void InputGeneratorSpec::validate() const {
  if (n == 0) throw std::domain_error("generator needs at least one neuron");
  tail.validate();
  validate_multiplier_bounds(multiplier_lo, multiplier_hi);
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw std::domain_error("jitter must be finite and >= 0");
}

IsiMatrixChunk::IsiMatrixChunk(std::size_t neurons, std::uint64_t first_round, std::size_t rounds)
    : neurons_(neurons), first_round_(first_round), rounds_(rounds), isis_(neurons * rounds) {
  if (first_round == 0) throw std::domain_error("rounds are numbered from 1");
}

std::vector<double> IsiMatrixChunk::row(std::size_t neuron) const {
  std::vector<double> out(rounds_);
  for (std::size_t r = 0; r < rounds_; ++r) out[r] = isi(neuron, r).to_double();
  return out;
}

GeneratedIsiSource::GeneratedIsiSource(InputGeneratorSpec spec, RngHandle rng)
    : spec_(std::move(spec)), rng_(rng) {
  spec_.validate();
}

double GeneratedIsiSource::shock(std::uint64_t round, std::uint64_t attempt) const {
  return pareto_quantile(spec_.tail, rng_.uniform_at(round, 0, draw_tag(kShock, attempt)));
}

Duration GeneratedIsiSource::draw(std::size_t neuron, std::uint64_t round, std::uint64_t attempt) const {
  if (neuron >= spec_.n) throw std::out_of_range("neuron index out of range");
  if (!spec_.common_shock()) {
    const double u = rng_.uniform_at(round, neuron, draw_tag(kIndependent, attempt));
    return Duration::from_units(pareto_quantile(spec_.tail, u));
  }
  const auto block = rng_.block_at(round, neuron, draw_tag(kNeuron, attempt));
  const double multiplier =
      bounded_multiplier_from_unit(spec_.multiplier_lo, spec_.multiplier_hi, to_unit_interval(block[0]));
  const double jitter = spec_.jitter * to_unit_interval(block[1]);
  return Duration::from_units(multiplier * shock(round, attempt) + jitter);
}

Duration GeneratedIsiSource::isi(std::size_t neuron, std::uint64_t round) const {
  if (round == 0) throw std::domain_error("rounds are numbered from 1");
  return draw(neuron, round, 0);
}

Duration GeneratedIsiSource::redrawn_first_isi(std::size_t neuron, std::uint64_t attempt) const {
  return draw(neuron, 1, attempt);
}

Duration IsiSource::redrawn_first_isi(std::size_t, std::uint64_t attempt) const {
  if (attempt == 0) throw std::logic_error("attempt 0 is the original first ISI");
  throw std::domain_error("this ISI source cannot redraw its first interval");
}

Duration ChunkIsiSource::isi(std::size_t neuron, std::uint64_t round) const {
  if (round < chunk_.first_round() || round - chunk_.first_round() >= chunk_.rounds()) {
    throw std::out_of_range("replayed ISI chunk has no round " + std::to_string(round));
  }
  return chunk_.isi(neuron, static_cast<std::size_t>(round - chunk_.first_round()));
}

ScaledIsiSource::ScaledIsiSource(std::shared_ptr<const IsiSource> base, std::int64_t factor)
    : base_(std::move(base)), factor_(factor) {
  if (!base_) throw std::invalid_argument("ScaledIsiSource needs a base source");
  if (factor <= 0) throw std::domain_error("scale factor must be a positive integer");
}

Duration ScaledIsiSource::isi(std::size_t neuron, std::uint64_t round) const {
  return base_->isi(neuron, round).scaled(factor_);
}

Duration ScaledIsiSource::redrawn_first_isi(std::size_t neuron, std::uint64_t attempt) const {
  return base_->redrawn_first_isi(neuron, attempt).scaled(factor_);
}

IsiMatrixChunk generate_isi_chunk(const InputGeneratorSpec& spec, std::size_t rounds, const RngHandle& rng,
                                  std::uint64_t first_round) {
  if (rounds == 0) throw std::domain_error("generate_isi_chunk: rounds must be >= 1");
  const GeneratedIsiSource source(spec, rng);
  IsiMatrixChunk chunk(spec.n, first_round, rounds);
  if (spec.common_shock()) chunk.shocks().resize(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::uint64_t round = first_round + r;
    if (spec.common_shock()) chunk.shocks()[r] = source.shock(round);
    for (std::size_t i = 0; i < spec.n; ++i) chunk.set_isi(i, r, source.isi(i, round));
  }
  return chunk;
}

void write_chunk_csv(std::ostream& out, const IsiMatrixChunk& chunk) {
  out << "round,neuron,isi,shock\n";
  const bool has_shock = !chunk.shocks().empty();
  for (std::size_t r = 0; r < chunk.rounds(); ++r) {
    const std::string shock = has_shock ? format_double(chunk.shocks()[r]) : std::string();
    for (std::size_t i = 0; i < chunk.neurons(); ++i) {
      out << chunk.first_round() + r << ',' << i + 1 << ',' << format_duration(chunk.isi(i, r)) << ','
          << shock << '\n';
    }
  }
}

HypothesisReport validate_hypotheses(const IsiMatrixChunk& chunk, const InputGeneratorSpec& spec,
                                     const HypothesisThresholds& thresholds) {
  spec.validate();
  if (chunk.neurons() != spec.n) throw std::invalid_argument("chunk and spec disagree on the neuron count");
  const std::size_t rounds = chunk.rounds();
  if (rounds < kMinAuditRounds) {
    throw InsufficientDataError("insufficient data: hypothesis audit needs >= 10^4 rounds, got " +
                                std::to_string(rounds));
  }
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < chunk.neurons(); ++i) {
      if (!chunk.isi(i, r).is_positive()) {
        throw InvariantViolation("nonpositive ISI at neuron " + std::to_string(i + 1) + ", round " +
                                 std::to_string(chunk.first_round() + r));
      }
    }
  }

  HypothesisReport report;
  for (double q : kDefaultQuantileGrid) {
    if ((1.0 - q) * static_cast<double>(rounds) >= kMinExpectedExceedances) report.levels.push_back(q);
  }
  if (std::none_of(report.levels.begin(), report.levels.end(),
                   [&](double q) { return std::abs(q - thresholds.decision_level) < 1e-12; })) {
    throw InsufficientDataError("insufficient data: too few rounds to evaluate the decision level");
  }
  const double alpha = spec.tail.alpha;
  const std::size_t n = spec.n;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(chunk.row(i));

  // H1
  VectorSample columns(n);
  std::vector<double> column(n);
  std::vector<double> minima(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) column[i] = rows[i][r];
    columns.push_back(column);
    minima[r] = *std::min_element(column.begin(), column.end());
  }
  const auto radii = columns.l1_norms();
  report.radial_tail = hill_estimate(radii, default_hill_k(radii.size()));
  if (n >= 2) {
    const double radial_q = std::clamp(1.0 - 1000.0 / static_cast<double>(rounds), 0.5, 0.99);
    report.spectral = spectral_estimate(columns, radial_q, 10);
  }
  report.h1_pass = std::abs(report.radial_tail.alpha_hat - alpha) <= thresholds.hill_tolerance;

  // H2
  report.h2_pass = true;
  for (std::size_t i = 0; i < n; ++i) {
    report.marginal_tails.push_back(hill_estimate(rows[i], default_hill_k(rounds)));
    report.h2_pass &= std::abs(report.marginal_tails.back().alpha_hat - alpha) <= thresholds.hill_tolerance;
    if (i == 0) continue;
    report.equivalence.push_back(equivalence_ratio(rows[i], rows[0], report.levels));
    const double r = report.equivalence.back().at(thresholds.decision_level);
    report.h2_pass &= r >= thresholds.equivalence_lo && r <= thresholds.equivalence_hi;
  }

  // H3
  std::vector<std::size_t> lags;
  for (std::size_t l = 1; l <= thresholds.h3_max_lag; ++l) lags.push_back(l);
  report.h3_pass = true;
  for (std::size_t i = 0; i < n; ++i) {
    report.within_row.push_back(lagged_tail_dependence(rows[i], lags, report.levels, kMinAuditRounds,
                                                       "neuron " + std::to_string(i + 1) + " marginal"));
    for (std::size_t l : lags) {
      report.h3_pass &= report.within_row.back().at(l, thresholds.decision_level) <= thresholds.h3_max;
    }
  }

  // H4
  report.full_dependence = upper_tail_independence(minima, minima, rows[0], report.levels, "neuron 1 marginal");
  report.h4_pass = report.full_dependence.at(thresholds.decision_level) >= thresholds.h4_min;
  return report;
}

}  // namespace htif
