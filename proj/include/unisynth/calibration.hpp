#pragma once

#include <span>
#include <string>
#include <vector>

#include "unisynth/chain.hpp"
#include "unisynth/comm_metrics.hpp"
#include "unisynth/qubit.hpp"

namespace unisynth {

// Calibrations estimate against the chain with their own previous correction
// removed, so re-running on a calibrated chain reproduces the same correction.

inline constexpr const char* kRabiLabel = "cal:rabi";
inline constexpr const char* kIqLabel = "cal:iq";
inline constexpr const char* kDpdLabel = "cal:dpd";

TxChain remove_labeled(const TxChain& chain, const std::string& label);
// Inserts the stage at the front of the chain, replacing any stage with the same label.
TxChain insert_correction(const TxChain& chain, Stage correction);

// Rabi amplitude calibration.

struct AmplitudeLut {
  std::vector<double> codes;      // probe peak amplitudes
  std::vector<double> theta;      // rotation angle inferred per code
  std::vector<double> measured;   // effective amplitude per code
  std::vector<double> effective;  // isotonic (nondecreasing) fit of measured
  double fit_residual_rad = 0.0;  // max |fit - measured| as rotation angle

  // Effective amplitude realized by a code (piecewise linear).
  double effective_for(double code) const;
  // Code realizing an effective amplitude (piecewise-linear inverse).
  double code_for(double effective_amplitude) const;
  // Pre-stage mapping desired effective amplitude to code.
  stage::AmplitudeTable as_table() const;
};

struct RabiCalOptions {
  GateEnvelopeSpec probe;         // shape and duration; peak is swept
  double sample_rate = 0.0;
  double max_residual_rad = 0.25; // isotonic misfit beyond this is unresolvable
  int threads = 1;
};

AmplitudeLut rabi_amplitude_cal(const QubitModel& model, const TxChain& chain,
                                std::span<const double> code_grid, const RabiCalOptions& options);
TxChain apply_rabi_lut(const TxChain& chain, const AmplitudeLut& lut);

// Pool-adjacent-violators fit (unweighted least squares, nondecreasing).
std::vector<double> isotonic_fit(std::span<const double> values);

// I/Q image and carrier calibration.

struct IqCalResult {
  stage::IqCorrection correction;
  cplx mu{}, nu{}, offset{};  // measured chain model y = mu x + nu conj(x) + offset
};

IqCalResult iq_cal(const TxChain& chain, double f_test, double sample_rate, std::size_t n = 4096,
                   double amplitude = 0.5);
TxChain apply_iq_correction(const TxChain& chain, const stage::IqCorrection& correction);

// Polar amplitude/phase delay alignment.

struct DelayAlignResult {
  double best_advance = 0.0;
  std::vector<double> grid;
  std::vector<double> evm;
};

DelayAlignResult polar_delay_align(const TxChain& chain, double resolution, double search_range,
                                   const CommSetup& probe, int threads = 1);
TxChain apply_polar_alignment(const TxChain& chain, double phase_advance);

// Memoryless predistortion.

struct DpdPolynomial {
  AmPmPolynomial pre;  // applied before the chain
  double small_signal_gain = 1.0;
  double small_signal_phase = 0.0;
};

struct DpdCharacterization {
  std::vector<double> input;   // probe amplitudes
  std::vector<double> gain;    // |output|
  std::vector<double> phase;   // arg(output), radians
};

DpdCharacterization characterize_am(const TxChain& chain, std::span<const double> amplitude_grid,
                                    double sample_rate, std::size_t hold = 64);
DpdPolynomial dpd_fit(const TxChain& chain, std::span<const double> amplitude_grid, int order,
                      double sample_rate);
TxChain apply_dpd(const TxChain& chain, const DpdPolynomial& dpd);

// Off-state leakage cancellation.

// Repeated ON bursts of constant amplitude separated by OFF gaps.
ComplexEnvelope pulsed_carrier_probe(double sample_rate, std::span<const double> burst_amplitudes,
                                     std::size_t on_samples = 256, std::size_t off_samples = 256);

// 10 log10(mean ON power / mean OFF power) with ON taken from the probe.
double onoff_ratio_db(const TxChain& chain, const ComplexEnvelope& probe);

cplx leakage_cancel(const TxChain& chain, const ComplexEnvelope& probe);
TxChain apply_leakage_cancel(const TxChain& chain, cplx cancel);

}  // namespace unisynth
