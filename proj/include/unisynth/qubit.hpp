#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "unisynth/envelope.hpp"

namespace unisynth {

// Rotating-frame transmon model. Energies (rad/s): level 0 at +dw/2, level 1
// at -dw/2, level 2 at -3dw/2 + alpha. Drive couples 0-1 with g/2 and 1-2
// with sqrt(2) g/2.
struct QubitModel {
  int levels = 2;
  double detuning = 0.0;       // rad/s, drive minus qubit
  double anharmonicity = 0.0;  // rad/s, negative (3-level only)
  double drive_gain = 1.0;     // rad/s per unit envelope amplitude

  void validate() const;
};

struct GateSpec {
  double theta = kPi;       // rotation angle, (0, 2pi]
  double axis_phase = 0.0;  // rotation axis azimuth in the XY plane
  double duration = 20e-9;  // seconds

  void validate() const;
};

struct DriveWaveform {
  ComplexEnvelope envelope;  // complex Rabi drive: Re -> X, Im -> Y
  double carrier_phase = 0.0;
};

using Unitary = Eigen::MatrixXcd;

// g * |sum x dt|.
double pulse_area(const QubitModel& model, const DriveWaveform& drive);
// arg(sum x dt), 0 for a zero drive.
double pulse_phase(const DriveWaveform& drive);

// Product of per-sample exponentials of the piecewise-constant Hamiltonian.
// Each sample is split into `substeps` equal pieces.
Unitary propagate(const QubitModel& model, const ComplexEnvelope& drive, int substeps = 1);
Unitary propagate(const QubitModel& model, const DriveWaveform& drive, int substeps = 1);

// Propagation with 2x substep refinement until fidelity against `reference`
// (the previous refinement) changes by less than tol. Returns the final
// unitary and the substep count used.
struct AdaptivePropagation {
  Unitary unitary;
  int substeps = 1;
};
AdaptivePropagation propagate_adaptive(const QubitModel& model, const DriveWaveform& drive,
                                       double tol = 1e-10, int max_substeps = 64);

// exp(-i theta/2 (cos(phi) sx + sin(phi) sy)).
Eigen::Matrix2cd rotation(double theta, double axis_phase);

struct FidelityReport {
  double f_avg = 1.0;
  double infidelity = 0.0;
  double eps_a = 0.0;        // theta_actual / theta_target - 1
  double eps_phi = 0.0;      // axis azimuth error, radians
  double leakage_pop = 0.0;  // |<2|U|0>|^2 for 3-level propagators
  double theta_actual = 0.0;
  double axis_actual = 0.0;
};

// F = (tr(M^dag M) + |tr M|^2) / 6 with M = U_t^dag P U_a P on the qubit block.
FidelityReport average_gate_fidelity(const Unitary& actual, const GateSpec& gate);

// (theta^2/6) eps_a^2 + (2/3) sin^2(theta/2) eps_phi^2.
double infidelity_model(double theta, double eps_a, double eps_phi);

double leakage_population(const QubitModel& model, const DriveWaveform& drive);

// Bloch vector starting from |0>: the initial point, then one point per
// sample at the sample end time.
struct BlochPoint {
  double t, x, y, z;
};
std::vector<BlochPoint> bloch_trajectory(const QubitModel& model, const DriveWaveform& drive);

}  // namespace unisynth
