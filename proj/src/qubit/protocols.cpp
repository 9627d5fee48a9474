#include "unisynth/protocols.hpp"

#include "unisynth/error.hpp"
#include "unisynth/parallel.hpp"

namespace unisynth {

std::vector<double> rabi_protocol(const QubitModel& model, const TxChain& chain,
                                  const GateEnvelopeSpec& genv, std::span<const double> amplitudes,
                                  double sample_rate, int threads) {
  require(!amplitudes.empty(), "amplitude grid must not be empty");
  std::vector<double> p1(amplitudes.size());
  parallel_for(amplitudes.size(), threads, [&](std::size_t i) {
    GateEnvelopeSpec g = genv;
    g.peak_amplitude = amplitudes[i];
    const auto drive = synth_drive(chain, g, 0.0, sample_rate);
    const Unitary u = propagate(model, drive);
    p1[i] = std::norm(u(1, 0));
  });
  return p1;
}

PhaseCoherencyMap phase_coherency_protocol(const QubitModel& model, const TxChain& chain,
                                           const GateEnvelopeSpec& genv,
                                           std::span<const double> theta_a,
                                           std::span<const double> phi_b, double sample_rate,
                                           int threads) {
  require(!theta_a.empty() && !phi_b.empty(), "phase-coherency grids must not be empty");
  model.validate();
  PhaseCoherencyMap map;
  map.theta_a.assign(theta_a.begin(), theta_a.end());
  map.phi_b.assign(phi_b.begin(), phi_b.end());
  map.p0.resize(theta_a.size() * phi_b.size());

  const GateSpec pi_gate{kPi, 0.0, genv.duration};
  const double pi_peak = nominal_peak_amplitude(pi_gate, genv, model.drive_gain);

  parallel_for(map.p0.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / phi_b.size();
    const std::size_t j = idx % phi_b.size();
    const int d = model.levels;
    Unitary ua = Unitary::Identity(d, d);
    if (theta_a[i] != 0.0) {
      GateEnvelopeSpec ga = genv;
      ga.peak_amplitude = theta_a[i] / (model.drive_gain * unit_pulse_area(genv));
      ua = propagate(model, synth_drive(chain, ga, 0.0, sample_rate));
    }
    GateEnvelopeSpec gb = genv;
    gb.peak_amplitude = pi_peak;
    const Unitary ub = propagate(model, synth_drive(chain, gb, phi_b[j], sample_rate));
    const Unitary u = ub * ua;
    map.p0[idx] = std::norm(u(0, 0));
  });
  return map;
}

FidelityReport gate_fidelity(const QubitModel& model, const TxChain& chain, const GateSpec& gate,
                             const GateEnvelopeSpec& genv, double sample_rate) {
  const auto drive = synth_qubit_pulse(chain, gate, genv, model, sample_rate);
  return average_gate_fidelity(propagate(model, drive), gate);
}

}  // namespace unisynth
