#include <cmath>

#include "unisynth/chain.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

CommWaveform synth_comm_waveform(const TxChain& chain, const Constellation& c,
                                 std::span<const std::uint8_t> bits, const PulseShape& shape,
                                 double symbol_rate) {
  require(symbol_rate > 0.0, "symbol rate must be positive");
  const auto stream = map_bits(bits, c, 1.0 / symbol_rate);
  CommWaveform w;
  w.reference = stream.symbols;
  const auto shaped = shape_symbols(stream, shape);
  if (shaped) w.tx = run_chain(chain, *shaped);
  return w;
}

double nominal_peak_amplitude(const GateSpec& gate, const GateEnvelopeSpec& genv,
                              double drive_gain) {
  require(drive_gain > 0.0, "drive gain must be positive");
  GateEnvelopeSpec unit = genv;
  unit.duration = gate.duration;
  return gate.theta / (drive_gain * unit_pulse_area(unit));
}

DriveWaveform synth_drive(const TxChain& chain, const GateEnvelopeSpec& genv, double axis_phase,
                          double sample_rate) {
  const auto base = gate_envelope(genv, sample_rate);
  std::vector<cplx> rotated(base.samples().begin(), base.samples().end());
  if (axis_phase != 0.0) {
    const cplx r = std::polar(1.0, axis_phase);
    for (auto& v : rotated) v *= r;
  }
  return {run_chain(chain, base.with_samples(std::move(rotated))), axis_phase};
}

DriveWaveform synth_qubit_pulse(const TxChain& chain, const GateSpec& gate,
                                const GateEnvelopeSpec& genv, const QubitModel& model,
                                double sample_rate) {
  gate.validate();
  model.validate();
  GateEnvelopeSpec g = genv;
  g.duration = gate.duration;
  g.peak_amplitude = nominal_peak_amplitude(gate, genv, model.drive_gain);
  return synth_drive(chain, g, gate.axis_phase, sample_rate);
}

}  // namespace unisynth
