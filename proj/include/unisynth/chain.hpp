#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "unisynth/envelope.hpp"
#include "unisynth/impairments.hpp"
#include "unisynth/modulation.hpp"
#include "unisynth/qubit.hpp"

namespace unisynth {

// Error-budget categories; one per term of the RSS EVM budget.
enum class BudgetTerm { bw, amp, phase, pn, iq_lo };
inline constexpr BudgetTerm kAllBudgetTerms[] = {BudgetTerm::bw, BudgetTerm::amp, BudgetTerm::phase,
                                                 BudgetTerm::pn, BudgetTerm::iq_lo};
const char* budget_term_name(BudgetTerm t);
std::optional<BudgetTerm> budget_term_from_name(const std::string& name);

namespace stage {

struct AmplitudeError { double eps = 0.0; };
struct StaticPhase { double phi = 0.0; };
struct PhaseNoise { double rate = 0.0; std::uint64_t seed = 0; };
struct IqImbalance { double gain = 0.0; double skew = 0.0; };
struct LoFeedthrough { cplx offset{}; };
struct BandwidthLimit { double cutoff_hz = 0.0; };
struct Quantize { int bits = 12; double full_scale = 1.0; };
struct SampleJitter { double sigma = 0.0; std::uint64_t seed = 0; };
struct AmAmPm { AmPmPolynomial poly; };
// Gate mask is taken from the chain input: ON where |x_in| > threshold.
struct OnOffLeakage { double off_ratio_db = kOffRatioInfinite; double threshold = 1e-6; cplx cancel{}; };
struct PathSkew { double tau_i = 0.0; double tau_q = 0.0; };
struct Delay { double tau = 0.0; };
struct PathGain { double gain_i = 1.0; double gain_q = 1.0; };

// Polar split: amplitude path and phase path processed separately, then
// recombined. Zero bits/step/cutoff disable that element. The phase path is
// delayed by path_delay - phase_advance relative to the amplitude path.
struct Polar {
  int amp_bits = 0;
  double amp_full_scale = 2.0;
  double phase_step = 0.0;
  double path_delay = 0.0;
  double phase_advance = 0.0;
  double amp_cutoff_hz = 0.0;
  double phase_cutoff_hz = 0.0;
};

// Zero-order hold at the DAC update rate (must divide the sample rate).
struct Zoh { double dac_rate_hz = 0.0; };

// Per-rail quantization with a static per-code gain error frozen by seed.
// Trim subtracts the error at resolution 2*trim_range/2^trim_bits.
struct CodeMismatch {
  int bits = 12;
  double full_scale = 2.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool trim = false;
  int trim_bits = 11;
  double trim_range = 0.2;
};

// Phase track multiplied by M.
struct HarmonicMultiply { int multiplier = 2; };

// First-order smoothing of the amplitude track with time constant tau.
struct RiseFall { double tau = 0.0; };

struct Spur { double offset_hz = 0.0; double level_dbc = -100.0; };
// Additive tones; amplitude is relative to the stage input RMS.
struct SpurTones { std::vector<Spur> spurs; };

// Per-state gain/phase deltas keyed on the nearest nominal amplitude level.
struct StateErrors {
  std::vector<double> levels;
  std::vector<double> gain;
  std::vector<double> phase;
};

// Nonlinear code-to-amplitude map on |x|:
// a' = fs * f(a/fs), f(c) = (c + k c^3)/(1 + k) - d exp(-((c - c0)/w)^2).
struct CodeMap {
  double cubic = 0.0;
  double dip_center = 0.5;
  double dip_depth = 0.0;
  double dip_width = 0.05;
  double full_scale = 1.0;
};

// Piecewise-linear magnitude map, phase preserved.
struct AmplitudeTable {
  std::vector<double> input;
  std::vector<double> output;
};

// [I'; Q'] = M [I; Q] + offset.
struct IqCorrection {
  double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
  cplx offset{};
};

}  // namespace stage

using StageSpec =
    std::variant<stage::AmplitudeError, stage::StaticPhase, stage::PhaseNoise, stage::IqImbalance,
                 stage::LoFeedthrough, stage::BandwidthLimit, stage::Quantize, stage::SampleJitter,
                 stage::AmAmPm, stage::OnOffLeakage, stage::PathSkew, stage::Delay, stage::PathGain,
                 stage::Polar, stage::Zoh, stage::CodeMismatch, stage::HarmonicMultiply,
                 stage::RiseFall, stage::SpurTones, stage::StateErrors, stage::CodeMap,
                 stage::AmplitudeTable, stage::IqCorrection>;

const char* stage_kind_name(const StageSpec& s);

struct Stage {
  StageSpec spec;
  std::optional<BudgetTerm> tag;  // budget category
  bool fixed = false;             // kept in every budget run (corrections, pure delays)
  std::string label;              // identifies calibration corrections
};

// Stage with the kind's default budget tag and fixed flag.
Stage make_stage(StageSpec spec, std::string label = {});
std::optional<BudgetTerm> default_budget_tag(const StageSpec& s);
bool default_fixed(const StageSpec& s);

enum class Architecture { custom, cartesian, polar, rfdac, harmonic };
const char* architecture_name(Architecture a);

struct TxChain {
  Architecture architecture = Architecture::custom;
  std::vector<Stage> stages;
};

struct CartesianConfig {
  double gain_i = 1.0, gain_q = 1.0;
  double skew_i = 0.0, skew_q = 0.0;
  double iq_gain = 0.0, iq_skew = 0.0;
  cplx lo_offset{};
  double cutoff_hz = 0.0;   // 0 disables
  int quant_bits = 0;       // 0 disables
  double quant_full_scale = 2.0;
};

struct PolarConfig {
  stage::Polar polar;
  double off_ratio_db = kOffRatioInfinite;
  double on_threshold = 1e-6;
  cplx leak_cancel{};
};

struct RfdacConfig {
  int dac_bits = 0;          // 0 disables quantization
  double full_scale = 2.0;
  double dac_rate_hz = 0.0;  // 0 disables the hold
  double mismatch_sigma = 0.0;
  std::uint64_t seed = 0;
  bool trim = false;
  int trim_bits = 11;
  double trim_range = 0.2;
  double recon_cutoff_hz = 0.0;  // 0 disables
};

struct HarmonicConfig {
  int multiplier = 2;
  double lo_phase_noise_rate = 0.0;
  std::uint64_t seed = 0;
  double rise_fall = 0.0;
  std::vector<stage::Spur> spurs;
  bool constant_impedance = true;
  stage::StateErrors state_errors;
};

TxChain cartesian_chain(const CartesianConfig& cfg);
TxChain polar_chain(const PolarConfig& cfg);
TxChain rfdac_chain(const RfdacConfig& cfg);
TxChain harmonic_chain(const HarmonicConfig& cfg);

// Applies one stage; `chain_input` is the envelope entering the chain.
ComplexEnvelope apply_stage(const StageSpec& s, const ComplexEnvelope& env,
                            const ComplexEnvelope& chain_input);
ComplexEnvelope run_chain(const TxChain& chain, const ComplexEnvelope& env);

// Human-readable warnings for the operating range [0, max_amplitude]
// (non-monotone AM-AM and similar).
std::vector<std::string> chain_warnings(const TxChain& chain, double max_amplitude);

struct CommWaveform {
  std::optional<ComplexEnvelope> tx;   // empty when there are no bits
  std::vector<cplx> reference;         // ideal transmitted symbols
};

CommWaveform synth_comm_waveform(const TxChain& chain, const Constellation& c,
                                 std::span<const std::uint8_t> bits, const PulseShape& shape,
                                 double symbol_rate);

// Peak amplitude giving rotation theta for this envelope shape and gain.
double nominal_peak_amplitude(const GateSpec& gate, const GateEnvelopeSpec& genv,
                              double drive_gain);

// Envelope with the given peak, rotated to the axis phase, pushed through the chain.
DriveWaveform synth_drive(const TxChain& chain, const GateEnvelopeSpec& genv, double axis_phase,
                          double sample_rate);

// As synth_drive, with the peak set from the gate's target angle.
DriveWaveform synth_qubit_pulse(const TxChain& chain, const GateSpec& gate,
                                const GateEnvelopeSpec& genv, const QubitModel& model,
                                double sample_rate);

}  // namespace unisynth
