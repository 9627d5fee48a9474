#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "unisynth/error.hpp"
#include "unisynth/qubit.hpp"

namespace unisynth {

namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix3cd;

const cplx kI(0.0, 1.0);

// exp(-i (hx sx + hy sy + hz sz) dt).
Matrix2cd su2_step(double hx, double hy, double hz, double dt) {
  const double h = std::sqrt(hx * hx + hy * hy + hz * hz);
  const double phi = h * dt;
  const double c = std::cos(phi);
  // sin(phi)/h, continuous at h = 0.
  const double s = h > 0.0 ? std::sin(phi) / h : dt;
  Matrix2cd u;
  u(0, 0) = cplx(c, -s * hz);
  u(1, 1) = cplx(c, s * hz);
  u(0, 1) = -kI * s * cplx(hx, -hy);
  u(1, 0) = -kI * s * cplx(hx, hy);
  return u;
}

Matrix3cd hamiltonian3(const QubitModel& m, cplx x) {
  const double dw = m.detuning;
  Matrix3cd h = Matrix3cd::Zero();
  h(0, 0) = dw / 2.0;
  h(1, 1) = -dw / 2.0;
  h(2, 2) = -1.5 * dw + m.anharmonicity;
  const cplx c01 = 0.5 * m.drive_gain * x;
  const cplx c12 = std::sqrt(2.0) * c01;
  h(1, 0) = c01;
  h(0, 1) = std::conj(c01);
  h(2, 1) = c12;
  h(1, 2) = std::conj(c12);
  return h;
}

Matrix3cd expm_hermitian(const Matrix3cd& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix3cd> es(h);
  const auto& v = es.eigenvectors();
  Eigen::Vector3cd phases;
  for (int k = 0; k < 3; ++k) phases(k) = std::polar(1.0, -es.eigenvalues()(k) * dt);
  return v * phases.asDiagonal() * v.adjoint();
}

Unitary nearest_unitary(const Unitary& u) {
  Eigen::JacobiSVD<Unitary> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

void QubitModel::validate() const {
  require(levels == 2 || levels == 3, "qubit model must have 2 or 3 levels");
  require(drive_gain > 0.0 && std::isfinite(drive_gain), "drive gain must be positive");
  require(std::isfinite(detuning), "detuning must be finite");
  if (levels == 3) require(anharmonicity < 0.0, "anharmonicity must be negative for a 3-level model");
}

void GateSpec::validate() const {
  require(theta > 0.0 && theta <= kTwoPi, "target angle must be in (0, 2pi]");
  require(duration > 0.0, "gate duration must be positive");
}

double pulse_area(const QubitModel& model, const DriveWaveform& drive) {
  cplx acc{};
  for (const auto& v : drive.envelope.samples()) acc += v;
  return model.drive_gain * std::abs(acc) * drive.envelope.dt();
}

double pulse_phase(const DriveWaveform& drive) {
  cplx acc{};
  for (const auto& v : drive.envelope.samples()) acc += v;
  return acc == cplx{} ? 0.0 : std::arg(acc);
}

Unitary propagate(const QubitModel& model, const ComplexEnvelope& drive, int substeps) {
  model.validate();
  require(substeps >= 1, "substeps must be at least 1");
  const double dt = drive.dt() / substeps;
  if (model.levels == 2) {
    Matrix2cd u = Matrix2cd::Identity();
    const double hz = model.detuning / 2.0;
    for (const auto& x : drive.samples()) {
      const Matrix2cd step = su2_step(0.5 * model.drive_gain * x.real(),
                                      0.5 * model.drive_gain * x.imag(), hz, dt);
      for (int s = 0; s < substeps; ++s) u = step * u;
    }
    return nearest_unitary(u);
  }
  Matrix3cd u = Matrix3cd::Identity();
  for (const auto& x : drive.samples()) {
    const Matrix3cd step = expm_hermitian(hamiltonian3(model, x), dt);
    for (int s = 0; s < substeps; ++s) u = step * u;
  }
  return nearest_unitary(u);
}

Unitary propagate(const QubitModel& model, const DriveWaveform& drive, int substeps) {
  return propagate(model, drive.envelope, substeps);
}

AdaptivePropagation propagate_adaptive(const QubitModel& model, const DriveWaveform& drive,
                                       double tol, int max_substeps) {
  AdaptivePropagation result{propagate(model, drive, 1), 1};
  const double d = static_cast<double>(model.levels);
  while (result.substeps < max_substeps) {
    const int next = result.substeps * 2;
    Unitary refined = propagate(model, drive, next);
    const cplx tr = (result.unitary.adjoint() * refined).trace();
    const double f = (std::norm(tr) + d) / (d * d + d);
    result = {std::move(refined), next};
    if (1.0 - f < tol) return result;
  }
  throw Error("propagation did not converge within the substep limit");
}

Eigen::Matrix2cd rotation(double theta, double axis_phase) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Matrix2cd r;
  r(0, 0) = c;
  r(1, 1) = c;
  r(0, 1) = -kI * s * std::polar(1.0, -axis_phase);
  r(1, 0) = -kI * s * std::polar(1.0, axis_phase);
  return r;
}

double leakage_population(const QubitModel& model, const DriveWaveform& drive) {
  if (model.levels != 3) throw PreconditionError("leakage population needs a 3-level model");
  const Unitary u = propagate(model, drive);
  return std::norm(u(2, 0));
}

std::vector<BlochPoint> bloch_trajectory(const QubitModel& model, const DriveWaveform& drive) {
  model.validate();
  const auto& env = drive.envelope;
  std::vector<BlochPoint> out;
  out.reserve(env.size() + 1);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(model.levels);
  psi(0) = 1.0;
  auto push = [&](double t) {
    const cplx c0 = psi(0);
    const cplx c1 = psi(1);
    const cplx coh = std::conj(c0) * c1;
    out.push_back({t, 2.0 * coh.real(), 2.0 * coh.imag(), std::norm(c0) - std::norm(c1)});
  };
  push(env.t0());
  const double dt = env.dt();
  for (std::size_t k = 0; k < env.size(); ++k) {
    const cplx x = env[k];
    if (model.levels == 2) {
      psi = su2_step(0.5 * model.drive_gain * x.real(), 0.5 * model.drive_gain * x.imag(),
                     model.detuning / 2.0, dt) * psi;
    } else {
      psi = expm_hermitian(hamiltonian3(model, x), dt) * psi;
    }
    push(env.time(k) + dt);
  }
  return out;
}

}  // namespace unisynth
