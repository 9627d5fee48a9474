#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "unisynth/error.hpp"
#include "unisynth/qubit.hpp"

namespace unisynth {

namespace {

constexpr double kUnitarityTol = 1e-9;

struct AxisAngle {
  double theta;
  double nx, ny, nz;
};

// Rotation angle and axis of a 2x2 unitary, on the branch whose axis is
// closest to (cos phi, sin phi, 0).
AxisAngle axis_angle(const Eigen::Matrix2cd& u_in, double target_phase) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(u_in, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2cd u = svd.matrixU() * svd.matrixV().adjoint();
  u /= std::sqrt(u.determinant());  // SU(2), up to sign

  auto decompose = [](const Eigen::Matrix2cd& v) {
    const double c = std::clamp(0.5 * v.trace().real(), -1.0, 1.0);
    const double theta = 2.0 * std::acos(c);
    const double s = std::sin(theta / 2.0);
    AxisAngle a{theta, 0.0, 0.0, 0.0};
    if (s > 0.0) {
      a.nx = -v(1, 0).imag() / s;
      a.ny = v(1, 0).real() / s;
      a.nz = -v(0, 0).imag() / s;
    }
    return a;
  };
  const AxisAngle a = decompose(u);
  const AxisAngle b = decompose(-u);
  const double tx = std::cos(target_phase);
  const double ty = std::sin(target_phase);
  return (a.nx * tx + a.ny * ty >= b.nx * tx + b.ny * ty) ? a : b;
}

}  // namespace

FidelityReport average_gate_fidelity(const Unitary& actual, const GateSpec& gate) {
  gate.validate();
  const auto d = actual.rows();
  require(d == actual.cols() && (d == 2 || d == 3), "propagator must be 2x2 or 3x3");
  const Unitary gram = actual.adjoint() * actual;
  const double dev = (gram - Unitary::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > kUnitarityTol) throw PreconditionError("propagator is not unitary within tolerance");

  const Eigen::Matrix2cd block = actual.topLeftCorner(2, 2);
  const Eigen::Matrix2cd target = rotation(gate.theta, gate.axis_phase);
  const Eigen::Matrix2cd m = target.adjoint() * block;
  const double trmm = (m.adjoint() * m).trace().real();
  const double f = (trmm + std::norm(m.trace())) / 6.0;

  FidelityReport r;
  r.f_avg = std::clamp(f, 0.0, 1.0);
  r.infidelity = 1.0 - f;
  if (d == 3) r.leakage_pop = std::norm(actual(2, 0));
  const AxisAngle aa = axis_angle(block, gate.axis_phase);
  r.theta_actual = aa.theta;
  r.axis_actual = std::atan2(aa.ny, aa.nx);
  r.eps_a = aa.theta / gate.theta - 1.0;
  r.eps_phi = wrap_phase(r.axis_actual - gate.axis_phase);
  return r;
}

double infidelity_model(double theta, double eps_a, double eps_phi) {
  const double s = std::sin(theta / 2.0);
  return theta * theta / 6.0 * eps_a * eps_a + 2.0 / 3.0 * s * s * eps_phi * eps_phi;
}

}  // namespace unisynth
