#include <cmath>
#include <vector>

#include "doctest.h"
#include "unisynth/chain.hpp"
#include "unisynth/error.hpp"
#include "unisynth/protocols.hpp"
#include "unisynth/qubit.hpp"

using namespace unisynth;

namespace {

using M2 = Eigen::Matrix2cd;
const cplx I1(0, 1);

// exp(-i theta/2 n.sigma) for n in the XY plane, written out entrywise.
M2 rot(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  M2 m;
  m << c, -I1 * s * std::exp(-I1 * phi), -I1 * s * std::exp(I1 * phi), c;
  return m;
}

constexpr double kTau = 20e-9;
constexpr double kFs = 1024 / kTau;

QubitModel two_level(double g = 1e8) {
  QubitModel m;
  m.drive_gain = g;
  return m;
}

DriveWaveform rect_drive(double amplitude, double phase = 0.0, std::size_t n = 1024, double fs = kFs) {
  return {ComplexEnvelope(std::vector<cplx>(n, std::polar(amplitude, phase)), fs), phase};
}

GateEnvelopeSpec rect_env() {
  GateEnvelopeSpec g;
  g.shape = GateShape::rect;
  g.duration = kTau;
  return g;
}

double max_entry(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("pulse area") {
  const auto m = two_level(2e8);
  CHECK(std::abs(pulse_area(m, rect_drive(0.3)) - 2e8 * 0.3 * kTau) < 1e-12);
  CHECK(pulse_area(m, rect_drive(0.0)) == 0.0);
  std::vector<cplx> echo(1024, cplx(0.5, 0));
  for (std::size_t k = 512; k < 1024; ++k) echo[k] = -0.5;
  CHECK(pulse_area(m, {ComplexEnvelope(echo, kFs), 0.0}) == 0.0);
  CHECK(std::abs(pulse_phase(rect_drive(0.2, 0.7)) - 0.7) < 1e-12);
}

TEST_CASE("resonant pi pulse is -i sigma_x") {
  const auto m = two_level();
  const double a = kPi / (m.drive_gain * kTau);
  const auto u = propagate(m, rect_drive(a));
  M2 target;
  target << 0, -I1, -I1, 0;
  CHECK(max_entry(u - target) < 1e-9);
}

TEST_CASE("free evolution") {
  CHECK(max_entry(propagate(two_level(), rect_drive(0.0)) - M2::Identity()) < 1e-15);
  QubitModel m = two_level();
  m.detuning = 2.3e8;
  const auto u = propagate(m, rect_drive(0.0));
  M2 target = M2::Zero();
  target(0, 0) = std::exp(-I1 * m.detuning * kTau / 2.0);
  target(1, 1) = std::exp(I1 * m.detuning * kTau / 2.0);
  CHECK(max_entry(u - target) < 1e-12);
}

TEST_CASE("propagators are unitary and compose") {
  for (int levels : {2, 3}) {
    QubitModel m = two_level(3e8);
    m.levels = levels;
    m.detuning = 1e7;
    if (levels == 3) m.anharmonicity = -kTwoPi * 250e6;
    GateEnvelopeSpec g;
    g.shape = GateShape::gaussian;
    g.duration = kTau;
    g.peak_amplitude = 0.7;
    g.drag_enabled = true;
    g.drag_coefficient = 3e-10;
    const auto env = gate_envelope(g, kFs);
    const auto u = propagate(m, env);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(levels, levels);
    CHECK(max_entry(u.adjoint() * u - id) < 1e-9);
    const auto first = propagate(m, env.slice(0, 512));
    const auto second = propagate(m, env.slice(512, 512));
    CHECK(max_entry(second * first - u) < 1e-9);
  }
}

TEST_CASE("adaptive propagation converges") {
  QubitModel m = two_level(3e8);
  m.levels = 3;
  m.anharmonicity = -kTwoPi * 200e6;
  const auto r = propagate_adaptive(m, rect_drive(0.5), 1e-10, 64);
  CHECK(r.substeps >= 1);
  const auto finer = propagate(m, rect_drive(0.5), r.substeps * 2);
  GateSpec gate{kPi, 0.0, kTau};
  CHECK(std::abs(average_gate_fidelity(r.unitary, gate).f_avg - average_gate_fidelity(finer, gate).f_avg) < 1e-9);
}

TEST_CASE("rotation helper matches the explicit matrix") {
  for (double th : {0.3, kPi / 2, kPi, 5.0})
    for (double ph : {0.0, 0.4, -2.0}) CHECK(max_entry(rotation(th, ph) - rot(th, ph)) < 1e-15);
}

TEST_CASE("average gate fidelity") {
  const GateSpec pi{kPi, 0.0, kTau};
  const auto exact = average_gate_fidelity(rot(kPi, 0.0), pi);
  CHECK(std::abs(exact.f_avg - 1.0) < 1e-15);
  CHECK(std::abs(exact.infidelity) < 1e-15);

  const double eps = 0.01;
  const auto over = average_gate_fidelity(rot(kPi * (1 + eps), 0.0), pi);
  const double trace_form = 1.0 - (4.0 * std::pow(std::cos(kPi * eps / 2), 2) + 2.0) / 6.0;
  CHECK(std::abs(over.infidelity - trace_form) < 1e-14);
  CHECK(std::abs(over.infidelity - kPi * kPi * eps * eps / 6.0) / (kPi * kPi * eps * eps / 6.0) < 0.01);
  CHECK(std::abs(over.eps_a - eps) < 1e-9);

  for (double theta : {kPi / 2, kPi}) {
    const GateSpec gate{theta, 0.0, kTau};
    for (double ep : {0.005, 0.01, 0.02}) {
      const auto tilt = average_gate_fidelity(rot(theta, ep), gate);
      const double expected = 2.0 / 3.0 * std::pow(std::sin(theta / 2), 2) * ep * ep;
      CHECK(std::abs(tilt.infidelity - expected) / expected < 0.01);
      CHECK(std::abs(tilt.eps_phi - ep) < 1e-9);
    }
  }

  M2 bad = M2::Identity() * 1.1;
  CHECK_THROWS_AS(average_gate_fidelity(bad, pi), PreconditionError);
}

TEST_CASE("infidelity model closed form") {
  CHECK(infidelity_model(kPi, 0.0, 0.0) == 0.0);
  CHECK(std::abs(infidelity_model(kPi, 0.01, 0.0) - 1.6449e-4) < 1e-8);
  CHECK(std::abs(infidelity_model(kPi / 2, 0.0, 0.02) - 1.3333e-4) < 1e-8);
}

TEST_CASE("closed-form infidelity agrees with exact fidelity for small errors") {
  for (double theta : {kPi / 2, kPi}) {
    const GateSpec gate{theta, 0.0, kTau};
    for (double e : {0.001, 0.002, 0.005, 0.01, 0.02}) {
      const double fa = average_gate_fidelity(rot(theta * (1 + e), 0.0), gate).infidelity;
      CHECK(std::abs(infidelity_model(theta, e, 0.0) - fa) / fa < 0.05);
      const double fp = average_gate_fidelity(rot(theta, e), gate).infidelity;
      CHECK(std::abs(infidelity_model(theta, 0.0, e) - fp) / fp < 0.05);
    }
  }
}

TEST_CASE("Rabi protocol on an ideal chain") {
  const auto m = two_level();
  const double a_pi = kPi / (m.drive_gain * kTau);
  const std::vector<double> probe{a_pi, a_pi / 2, 0.0};
  const auto p = rabi_protocol(m, TxChain{}, rect_env(), probe, kFs);
  CHECK(std::abs(p[0] - 1.0) < 1e-9);
  CHECK(std::abs(p[1] - 0.5) < 1e-9);
  CHECK(p[2] == 0.0);

  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(2.0 * a_pi * k / 20.0);
  const auto q = rabi_protocol(m, TxChain{}, rect_env(), grid, kFs, 4);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    worst = std::max(worst, std::abs(q[k] - std::pow(std::sin(m.drive_gain * grid[k] * kTau / 2), 2)));
  CHECK(worst < 1e-6);
  CHECK_THROWS_AS(rabi_protocol(m, TxChain{}, rect_env(), std::vector<double>{}, kFs), PreconditionError);
}

TEST_CASE("phase-coherency map matches the two-rotation oracle") {
  const auto m = two_level();
  std::vector<double> ta, pb;
  for (int k = 0; k <= 8; ++k) ta.push_back(kPi * k / 8.0);
  for (int k = 0; k < 8; ++k) pb.push_back(kTwoPi * k / 8.0);
  const auto map = phase_coherency_protocol(m, TxChain{}, rect_env(), ta, pb, kFs, 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i)
    for (std::size_t j = 0; j < pb.size(); ++j) {
      const M2 u = rot(kPi, pb[j]) * rot(ta[i], 0.0);
      worst = std::max(worst, std::abs(map.at(i, j) - std::norm(u(0, 0))));
    }
  CHECK(worst < 1e-6);
  for (std::size_t j = 0; j < pb.size(); ++j) CHECK(map.at(0, j) < 1e-9);
  CHECK(std::abs(map.at(ta.size() - 1, 0) - 1.0) < 1e-9);
}

TEST_CASE("leakage population and DRAG") {
  QubitModel m3 = two_level(1e9);
  m3.levels = 3;
  m3.anharmonicity = -kTwoPi * 250e6;
  CHECK(leakage_population(m3, rect_drive(0.0)) == 0.0);
  CHECK_THROWS_AS(leakage_population(two_level(), rect_drive(0.1)), PreconditionError);

  GateEnvelopeSpec g;
  g.shape = GateShape::gaussian;
  g.duration = 4.0 / std::abs(m3.anharmonicity);
  const GateSpec gate{kPi, 0.0, g.duration};
  const double fs = 1024 / g.duration;
  const auto plain = synth_qubit_pulse(TxChain{}, gate, g, m3, fs);
  const double p_plain = leakage_population(m3, plain);
  CHECK(p_plain > 1e-4);
  g.drag_enabled = true;
  g.drag_coefficient = 1.0 / m3.anharmonicity;
  const double p_drag = leakage_population(m3, synth_qubit_pulse(TxChain{}, gate, g, m3, fs));
  CHECK(p_drag < p_plain);
}

TEST_CASE("detuning symmetry for real symmetric envelopes") {
  GateEnvelopeSpec g;
  g.shape = GateShape::gaussian;
  g.duration = kTau;
  g.peak_amplitude = 0.2;
  const DriveWaveform d{gate_envelope(g, kFs), 0.0};
  for (double dw : {1e6, 3e7, 2e8}) {
    QubitModel a = two_level(), b = two_level();
    a.detuning = dw;
    b.detuning = -dw;
    CHECK(std::abs(std::norm(propagate(a, d)(1, 0)) - std::norm(propagate(b, d)(1, 0))) < 1e-9);
  }
}

TEST_CASE("Bloch trajectory of a pi pulse") {
  const auto m = two_level();
  const auto traj = bloch_trajectory(m, rect_drive(kPi / (m.drive_gain * kTau)));
  REQUIRE(traj.size() == 1025);
  CHECK(traj.front().t == 0.0);
  CHECK(traj.front().z == 1.0);
  for (const auto& p : traj) CHECK(std::abs(p.x * p.x + p.y * p.y + p.z * p.z - 1.0) < 1e-9);
  CHECK(std::abs(traj.back().z + 1.0) < 1e-9);
  CHECK(std::abs(traj.back().t - kTau) < 1e-18);
}

TEST_CASE("model and gate validation") {
  QubitModel m;
  m.levels = 4;
  CHECK_THROWS_AS(m.validate(), PreconditionError);
  m = {};
  m.levels = 3;
  m.anharmonicity = 1.0;
  CHECK_THROWS_AS(m.validate(), PreconditionError);
  m = {};
  m.drive_gain = 0.0;
  CHECK_THROWS_AS(m.validate(), PreconditionError);
  GateSpec g;
  g.theta = 0.0;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  g = {};
  g.theta = 7.0;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  g = {};
  g.duration = 0.0;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  CHECK_THROWS_AS(propagate(two_level(), rect_drive(0.1), 0), PreconditionError);
}
