#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unisynth/chain.hpp"
#include "unisynth/envelope.hpp"
#include "unisynth/modulation.hpp"

namespace unisynth {

struct EvmReport {
  double evm_rms = 0.0;
  double evm_db = 0.0;  // -inf when evm_rms == 0
  std::size_t n_symbols = 0;
  double reference_rms = 0.0;
};

// sqrt(mean|r - s|^2 / mean|s|^2).
EvmReport evm(std::span<const cplx> received, std::span<const cplx> reference);

struct DemodOptions {
  // Known transmitted symbols (full stream). Enables data-aided timing.
  std::span<const cplx> reference;
  // Symbol-spaced FIR applied to the soft symbols before decisions.
  std::vector<cplx> equalizer;
  std::size_t training_symbols = 256;
};

struct DemodResult {
  std::vector<cplx> soft;            // after guard trim
  std::vector<std::size_t> decisions;  // constellation indices
  Bits bits;
  std::size_t first_symbol = 0;      // stream index of soft[0]
  long timing_offset = 0;            // samples relative to the nominal instant
  std::vector<cplx> all_symbols;     // untrimmed symbol-rate samples before equalization
};

// Symbol count implied by a shaped record: (len - taps)/sps + 1.
std::size_t symbols_in_record(std::size_t samples, const PulseShape& shape);

DemodResult demodulate(const ComplexEnvelope& rx, const Constellation& c, const PulseShape& shape,
                       const DemodOptions& options = {});

std::vector<cplx> apply_equalizer(std::span<const cplx> symbols, std::span<const cplx> taps);

// Symbol-spaced LMS with the center tap initialized to one. Falls back to the
// identity taps when training does not reduce the error.
std::vector<cplx> lms_equalizer_train(std::span<const cplx> rx_symbols,
                                      std::span<const cplx> reference, int n_taps, double step,
                                      int epochs = 20);

struct EyeLevel {
  double mean = 0.0;
  double spread = 0.0;  // max - min of the level cloud
  std::size_t count = 0;
};

struct EyeReport {
  double eye_height = 0.0;
  double eye_width = 0.0;  // fraction of the symbol period
  double best_phase = 0.0; // fraction of the symbol period from the fold start
  std::vector<EyeLevel> levels;
  double spacing_nonuniformity = 0.0;  // (max - min) / mean adjacent level spacing
  double max_level_spread = 0.0;
};

// Folds `rail` modulo sps starting at first_sample, over n_symbols periods.
EyeReport eye_metrics(std::span<const double> rail, std::size_t sps, std::size_t n_levels,
                      std::size_t first_sample, std::size_t n_symbols);

// In-phase eye of a shaped record, folded so that the nominal decision
// instant sits mid-period; guard symbols are trimmed.
EyeReport eye_metrics(const ComplexEnvelope& rx, double symbol_period, std::size_t n_levels,
                      const PulseShape& shape);

// Hann-windowed averaged periodogram, two-sided, frequencies ascending.
Spectrum psd_welch(const ComplexEnvelope& env, std::size_t segment_length, double overlap);

struct SpurEntry {
  double freq_hz = 0.0;
  double level_dbc = 0.0;
};

struct SfdrReport {
  double sfdr_db = 0.0;  // +inf when nothing but the carrier has power
  double carrier_hz = 0.0;
  std::vector<SpurEntry> spurs;  // strongest first
};

SfdrReport spurs_sfdr(const Spectrum& spec, double carrier_hz, double band_lo_hz, double band_hi_hz);

struct ImageRejectionReport {
  double irr_db = 0.0;
  double lo_rejection_db = 0.0;
  cplx wanted{};  // DFT bin values normalized by N
  cplx image{};
  cplx dc{};
};

// Drives exp(j 2 pi f t) for 2N samples and reads exact DFT bins of the last N.
ImageRejectionReport image_rejection(const TxChain& chain, double f_test, double sample_rate,
                                     std::size_t n = 4096, double amplitude = 1.0);

// A complete communication link used by metrics, budgets and calibrations.
struct CommSetup {
  ModulationScheme scheme = scheme::MPsk{4};
  PulseShape shape{};
  double symbol_rate = 1e9;
  std::size_t n_symbols = 512;
  std::uint64_t bit_seed = 1;
  std::optional<int> equalizer_taps;  // train an LMS equalizer when set
  double equalizer_step = 0.01;

  double sample_rate() const { return symbol_rate * shape.samples_per_symbol; }
};

struct CommRun {
  Constellation constellation;
  ComplexEnvelope tx;
  std::vector<cplx> reference;          // full transmitted stream
  std::vector<cplx> reference_trimmed;  // aligned with demod.soft
  DemodResult demod;
  EvmReport evm;
  std::vector<cplx> equalizer;
  std::size_t symbol_errors = 0;
};

Bits random_bits(std::size_t count, std::uint64_t seed);
std::vector<cplx> random_symbols(const Constellation& c, std::size_t count, std::uint64_t seed);

CommRun run_comm(const TxChain& chain, const CommSetup& setup);

struct EvmBudget {
  std::map<std::string, double> terms;  // one entry per budget term
  double total_predicted = 0.0;         // RSS of terms
  double total_measured = 0.0;
};

// Runs measure_evm once per budget term with only that term's stages (plus
// fixed stages) enabled, and once with the full chain.
EvmBudget evm_budget(const TxChain& chain,
                     const std::function<double(const TxChain&)>& measure_evm);
EvmBudget evm_budget(const TxChain& chain, const CommSetup& setup);

}  // namespace unisynth
