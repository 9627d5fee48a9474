#include <cmath>

#include <Eigen/Dense>

#include "unisynth/calibration.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

IqCalResult iq_cal(const TxChain& chain, double f_test, double sample_rate, std::size_t n,
                   double amplitude) {
  const TxChain raw = remove_labeled(chain, kIqLabel);
  const auto m = image_rejection(raw, f_test, sample_rate, n, amplitude);

  IqCalResult r;
  r.mu = m.wanted / amplitude;
  r.nu = m.image / amplitude;
  r.offset = m.dc;
  const double mu_mag = std::abs(r.mu);
  if (!(mu_mag > 0.0)) throw CalibrationError("chain passes no signal at the test tone");
  if (std::abs(r.nu) > 0.5 * mu_mag) throw CalibrationError("image too strong to correct");
  if (std::abs(r.offset) > 0.5 * mu_mag) throw CalibrationError("carrier offset too large to correct");

  // Real 2x2 form of y = mu x + nu conj(x).
  Eigen::Matrix2d t;
  t << r.mu.real() + r.nu.real(), r.nu.imag() - r.mu.imag(),
       r.mu.imag() + r.nu.imag(), r.mu.real() - r.nu.real();
  Eigen::Matrix2d m_mu;
  m_mu << r.mu.real(), -r.mu.imag(), r.mu.imag(), r.mu.real();
  if (std::abs(t.determinant()) < 1e-6 * mu_mag * mu_mag) throw CalibrationError("I/Q paths are degenerate");

  // Leaves the wanted-path gain mu in place and cancels only image and offset.
  const Eigen::Matrix2d tinv = t.inverse();
  const Eigen::Matrix2d a = tinv * m_mu;
  const Eigen::Vector2d d = -tinv * Eigen::Vector2d(r.offset.real(), r.offset.imag());
  r.correction = {a(0, 0), a(0, 1), a(1, 0), a(1, 1), cplx(d(0), d(1))};
  return r;
}

TxChain apply_iq_correction(const TxChain& chain, const stage::IqCorrection& correction) {
  return insert_correction(chain, make_stage(correction, kIqLabel));
}

}  // namespace unisynth
