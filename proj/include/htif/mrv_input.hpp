#pragma once

// Per-neuron ISI sequences whose rolling vectors satisfy H1-H4 (or, for the
// independent baseline, deliberately violate H4).
//
// Common-shock construction: in round j every neuron draws
//     S_j^i = U_{i,j} * W_j + V_{i,j}
// with W_j ~ Pareto(alpha, scale) shared by the round, U_{i,j} ~ U[lo, hi] and
// V_{i,j} ~ U[0, jitter) independent across neurons and rounds. With jitter = 0
// this is the pure multiplicative shock; with U == 1 and jitter > 0 the
// within-round spacings are bounded, so one shock never spreads over several
// consecutive waiting times.
//
// Every S_j^i is an addressed draw on the RNG key (seed, stream_id), so a chunk
// of rounds and an engine consuming the same spec see identical values without
// sharing state.

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htif/duration.hpp"
#include "htif/rng.hpp"
#include "htif/rv_core.hpp"
#include "htif/tail_stats.hpp"

namespace htif {

enum class GeneratorMode {
  round_synchronized_common_shock,
  asynchronous_common_shock,
  independent_baseline,
};

std::string_view to_string(GeneratorMode mode);
GeneratorMode parse_generator_mode(std::string_view text);

struct InputGeneratorSpec {
  std::size_t n = 1;
  TailModel tail;
  double multiplier_lo = 0.5;
  double multiplier_hi = 2.0;
  double jitter = 0.0;
  GeneratorMode mode = GeneratorMode::round_synchronized_common_shock;

  void validate() const;
  bool common_shock() const { return mode != GeneratorMode::independent_baseline; }
};

// Neurons x rounds block of ISIs. Rounds are numbered from `first_round` (1-based).
class IsiMatrixChunk {
 public:
  IsiMatrixChunk(std::size_t neurons, std::uint64_t first_round, std::size_t rounds);

  std::size_t neurons() const { return neurons_; }
  std::size_t rounds() const { return rounds_; }
  std::uint64_t first_round() const { return first_round_; }

  // `round_offset` counts from the first round of the chunk.
  Duration isi(std::size_t neuron, std::size_t round_offset) const {
    return isis_[round_offset * neurons_ + neuron];
  }
  void set_isi(std::size_t neuron, std::size_t round_offset, Duration value) {
    isis_[round_offset * neurons_ + neuron] = value;
  }
  std::vector<double> row(std::size_t neuron) const;

  // Common-shock W_j per round; empty for the independent baseline.
  const std::vector<double>& shocks() const { return shocks_; }
  std::vector<double>& shocks() { return shocks_; }

 private:
  std::size_t neurons_;
  std::uint64_t first_round_;
  std::size_t rounds_;
  std::vector<Duration> isis_;  // round-major
  std::vector<double> shocks_;
};

// Throws std::domain_error for rounds == 0 or an invalid spec.
IsiMatrixChunk generate_isi_chunk(const InputGeneratorSpec& spec, std::size_t rounds, const RngHandle& rng,
                                  std::uint64_t first_round = 1);

// CSV columns: round,neuron,isi,shock (neurons 1-based; shock empty for the baseline).
void write_chunk_csv(std::ostream& out, const IsiMatrixChunk& chunk);

/// Where an engine reads its ISIs from. Rounds are 1-based.
class IsiSource {
 public:
  virtual ~IsiSource() = default;
  virtual std::size_t neurons() const = 0;
  virtual Duration isi(std::size_t neuron, std::uint64_t round) const = 0;
  // Fresh draw of the first ISI, used when conditioning T_1 > t by rejection.
  // attempt >= 1; attempt 0 is isi(neuron, 1).
  virtual Duration redrawn_first_isi(std::size_t neuron, std::uint64_t attempt) const;
  // True when the first column must be redrawn as a whole (dependent components).
  virtual bool redraws_jointly() const { return true; }
};

class GeneratedIsiSource final : public IsiSource {
 public:
  GeneratedIsiSource(InputGeneratorSpec spec, RngHandle rng);
  std::size_t neurons() const override { return spec_.n; }
  Duration isi(std::size_t neuron, std::uint64_t round) const override;
  Duration redrawn_first_isi(std::size_t neuron, std::uint64_t attempt) const override;
  bool redraws_jointly() const override { return spec_.common_shock(); }

  const InputGeneratorSpec& spec() const { return spec_; }
  double shock(std::uint64_t round, std::uint64_t attempt = 0) const;

 private:
  Duration draw(std::size_t neuron, std::uint64_t round, std::uint64_t attempt) const;
  InputGeneratorSpec spec_;
  RngHandle rng_;
};

// Replays a fixed chunk; rounds outside it throw std::out_of_range.
class ChunkIsiSource final : public IsiSource {
 public:
  explicit ChunkIsiSource(IsiMatrixChunk chunk) : chunk_(std::move(chunk)) {}
  std::size_t neurons() const override { return chunk_.neurons(); }
  Duration isi(std::size_t neuron, std::uint64_t round) const override;

 private:
  IsiMatrixChunk chunk_;
};

// Multiplies every ISI of another source by a positive integer.
class ScaledIsiSource final : public IsiSource {
 public:
  ScaledIsiSource(std::shared_ptr<const IsiSource> base, std::int64_t factor);
  std::size_t neurons() const override { return base_->neurons(); }
  Duration isi(std::size_t neuron, std::uint64_t round) const override;
  Duration redrawn_first_isi(std::size_t neuron, std::uint64_t attempt) const override;
  bool redraws_jointly() const override { return base_->redraws_jointly(); }

 private:
  std::shared_ptr<const IsiSource> base_;
  std::int64_t factor_;
};

struct HypothesisThresholds {
  double hill_tolerance = 0.1;     // |alpha_hat - alpha|, k = ceil(N^0.6)
  double equivalence_lo = 0.5;     // marginal tail ratios at the decision level
  double equivalence_hi = 2.0;
  double h3_max = 0.05;            // within-row lagged ratio at the decision level
  double h4_min = 0.05;            // cross-neuron joint ratio at the decision level
  double decision_level = 0.999;
  std::size_t h3_max_lag = 5;
};

struct HypothesisReport {
  std::vector<double> levels;  // grid levels with at least 10 expected exceedances

  // H1: the L1 radius of the round vector is regularly varying of order alpha.
  TailEstimate radial_tail;
  SpectralEstimate spectral;
  bool h1_pass = false;

  // H2: marginal tail indices, and tail ratios of neuron i against neuron 1.
  std::vector<TailEstimate> marginal_tails;
  std::vector<RatioCurve> equivalence;  // entry i-1 compares neuron i+1 with neuron 1
  bool h2_pass = false;

  // H3: lagged upper-tail ratios within each neuron's sequence.
  std::vector<LagDependence> within_row;
  bool h3_pass = false;

  // H4: P(all components > z) / P(neuron 1 > z).
  DependenceRatio full_dependence;
  bool h4_pass = false;

  bool all_passed() const { return h1_pass && h2_pass && h3_pass && h4_pass; }
};

/// Audits a chunk against H1-H4. Throws InsufficientDataError below 10^4 rounds
/// and InvariantViolation if any ISI is not strictly positive.
HypothesisReport validate_hypotheses(const IsiMatrixChunk& chunk, const InputGeneratorSpec& spec,
                                     const HypothesisThresholds& thresholds = {});

}  // namespace htif
