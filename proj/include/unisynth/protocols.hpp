#pragma once

#include <span>
#include <vector>

#include "unisynth/chain.hpp"
#include "unisynth/qubit.hpp"

namespace unisynth {

// P1 after one pulse per peak amplitude, starting from |0>. The envelope's
// shape and duration come from genv; its peak is replaced by each grid value.
std::vector<double> rabi_protocol(const QubitModel& model, const TxChain& chain,
                                  const GateEnvelopeSpec& genv, std::span<const double> amplitudes,
                                  double sample_rate, int threads = 1);

// Rotation by theta_a about X, then a pi pulse about axis phi_b, then P0.
struct PhaseCoherencyMap {
  std::vector<double> theta_a;
  std::vector<double> phi_b;
  std::vector<double> p0;  // row-major, theta_a rows by phi_b columns

  double at(std::size_t i, std::size_t j) const { return p0[i * phi_b.size() + j]; }
};

PhaseCoherencyMap phase_coherency_protocol(const QubitModel& model, const TxChain& chain,
                                           const GateEnvelopeSpec& genv,
                                           std::span<const double> theta_a,
                                           std::span<const double> phi_b, double sample_rate,
                                           int threads = 1);

// Synthesizes the gate through the chain, propagates it and scores it.
FidelityReport gate_fidelity(const QubitModel& model, const TxChain& chain, const GateSpec& gate,
                             const GateEnvelopeSpec& genv, double sample_rate);

}  // namespace unisynth
