#include "unisynth/impairments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "unisynth/error.hpp"

namespace unisynth {

ComplexEnvelope amplitude_error(const ComplexEnvelope& env, double eps_a) {
  require(eps_a > -1.0, "amplitude error must exceed -1");
  if (eps_a == 0.0) return env;
  const double k = 1.0 + eps_a;
  std::vector<cplx> s(env.samples().begin(), env.samples().end());
  for (auto& v : s) v *= k;
  return env.with_samples(std::move(s));
}

ComplexEnvelope static_phase_error(const ComplexEnvelope& env, double phi_e) {
  if (phi_e == 0.0) return env;
  const cplx rot = std::polar(1.0, phi_e);
  std::vector<cplx> s(env.samples().begin(), env.samples().end());
  for (auto& v : s) v *= rot;
  return env.with_samples(std::move(s));
}

std::vector<double> phase_noise_track(std::size_t n, double sample_rate, double rate,
                                      std::uint64_t seed) {
  require(rate >= 0.0, "phase-noise rate must be nonnegative");
  std::vector<double> theta(n, 0.0);
  if (rate == 0.0 || n == 0) return theta;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(rate / sample_rate));
  for (std::size_t k = 1; k < n; ++k) theta[k] = theta[k - 1] + normal(rng);
  return theta;
}

ComplexEnvelope phase_noise(const ComplexEnvelope& env, double rate, std::uint64_t seed) {
  if (rate == 0.0) return env;
  const auto theta = phase_noise_track(env.size(), env.sample_rate(), rate, seed);
  std::vector<cplx> s(env.samples().begin(), env.samples().end());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= std::polar(1.0, theta[k]);
  return env.with_samples(std::move(s));
}

double IqImbalanceCoefficients::image_rejection_db() const {
  return 10.0 * std::log10(std::norm(mu) / std::norm(nu));
}

IqImbalanceCoefficients iq_imbalance_coefficients(double g, double phi) {
  const double a = 1.0 + g / 2.0;
  const double b = 1.0 - g / 2.0;
  const cplx head(a, b * std::sin(phi));
  const double bc = b * std::cos(phi);
  return {(head + bc) / 2.0, (head - bc) / 2.0};
}

ComplexEnvelope iq_imbalance(const ComplexEnvelope& env, double g, double phi) {
  require(std::abs(g) < 1.0, "gain mismatch must satisfy |g| < 1");
  if (g == 0.0 && phi == 0.0) return env;
  const double a = 1.0 + g / 2.0;
  const double b = 1.0 - g / 2.0;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double i = env[k].real();
    const double q = env[k].imag();
    out[k] = {a * i, b * (q * c + i * s)};
  }
  return env.with_samples(std::move(out));
}

ComplexEnvelope lo_feedthrough(const ComplexEnvelope& env, cplx offset) {
  if (offset == cplx{}) return env;
  std::vector<cplx> s(env.samples().begin(), env.samples().end());
  for (auto& v : s) v += offset;
  return env.with_samples(std::move(s));
}

namespace {

double pole_coefficient(double sample_rate, double cutoff_hz) {
  require(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0,
          "cutoff must lie in (0, fs/2)");
  return 1.0 - std::exp(-kTwoPi * cutoff_hz / sample_rate);
}

}  // namespace

std::vector<double> one_pole_lowpass(std::span<const double> x, double sample_rate,
                                     double cutoff_hz) {
  const double k = pole_coefficient(sample_rate, cutoff_hz);
  std::vector<double> y(x.size());
  double state = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    state += k * (x[n] - state);
    y[n] = state;
  }
  return y;
}

ComplexEnvelope bandwidth_limit(const ComplexEnvelope& env, double cutoff_hz) {
  const double k = pole_coefficient(env.sample_rate(), cutoff_hz);
  std::vector<cplx> y(env.size());
  cplx state{};
  for (std::size_t n = 0; n < y.size(); ++n) {
    state += k * (env[n] - state);
    y[n] = state;
  }
  return env.with_samples(std::move(y));
}

double quantize_value(double x, int bits, double full_scale) {
  require(bits >= 2 && bits <= 16, "quantizer bits must be in [2, 16]");
  require(full_scale > 0.0, "quantizer full scale must be positive");
  const double step = std::ldexp(full_scale, 1 - bits);
  const double q = std::round(x / step) * step;
  return std::clamp(q, -full_scale, full_scale);
}

ComplexEnvelope quantize(const ComplexEnvelope& env, int bits, double full_scale) {
  quantize_value(0.0, bits, full_scale);
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = {quantize_value(env[k].real(), bits, full_scale),
              quantize_value(env[k].imag(), bits, full_scale)};
  return env.with_samples(std::move(out));
}

ComplexEnvelope sample_jitter(const ComplexEnvelope& env, double sigma_s, std::uint64_t seed) {
  require(sigma_s >= 0.0, "jitter must be nonnegative");
  require(sigma_s < 0.1 / env.sample_rate(), "jitter too large (must be below 0.1 sample)");
  if (sigma_s == 0.0) return env;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma_s);
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double delta = normal(rng);
    out[k] = interpolate_at(env.samples(), static_cast<double>(k) + delta * env.sample_rate());
  }
  return env.with_samples(std::move(out));
}

bool AmPmPolynomial::is_identity() const {
  const bool gain_id = gain_odd.empty() ||
                       (gain_odd[0] == 1.0 &&
                        std::all_of(gain_odd.begin() + 1, gain_odd.end(), [](double v) { return v == 0.0; }));
  const bool phase_id = std::all_of(phase.begin(), phase.end(), [](double v) { return v == 0.0; });
  return gain_id && phase_id;
}

double AmPmPolynomial::gain(double a) const {
  if (gain_odd.empty()) return a;
  double acc = 0.0;
  const double a2 = a * a;
  for (auto it = gain_odd.rbegin(); it != gain_odd.rend(); ++it) acc = acc * a2 + *it;
  return acc * a;
}

double AmPmPolynomial::phase_shift(double a) const {
  double acc = 0.0;
  for (auto it = phase.rbegin(); it != phase.rend(); ++it) acc = acc * a + *it;
  return acc;
}

bool AmPmPolynomial::monotone_on(double max_amplitude) const {
  constexpr int kPoints = 1024;
  double prev = gain(0.0);
  for (int k = 1; k <= kPoints; ++k) {
    const double v = gain(max_amplitude * k / kPoints);
    if (v < prev) return false;
    prev = v;
  }
  return true;
}

ComplexEnvelope am_ampm(const ComplexEnvelope& env, const AmPmPolynomial& poly) {
  if (poly.is_identity()) return env;
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = std::abs(env[k]);
    if (a == 0.0) {
      out[k] = {};
      continue;
    }
    const double g = poly.gain(a);
    out[k] = env[k] * std::polar(g / a, poly.phase_shift(a));
  }
  return env.with_samples(std::move(out));
}

ComplexEnvelope onoff_leakage(const ComplexEnvelope& env, double off_ratio_db,
                              std::span<const std::uint8_t> mask, cplx cancel) {
  require(off_ratio_db > 0.0, "on/off ratio must be positive");
  if (mask.size() != env.size()) throw PreconditionError("gate mask length does not match envelope");
  const bool all_on = std::all_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
  if (all_on) return env;
  const double leak = std::isinf(off_ratio_db) ? 0.0 : std::pow(10.0, -off_ratio_db / 20.0);
  std::vector<cplx> out(env.size());
  cplx last_on{};
  bool seen_on = false;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (mask[k]) {
      out[k] = env[k];
      last_on = env[k];
      seen_on = true;
    } else {
      out[k] = seen_on ? last_on * leak + cancel : cplx{};
    }
  }
  return env.with_samples(std::move(out));
}

ComplexEnvelope path_skew(const ComplexEnvelope& env, double tau_i, double tau_q) {
  if (tau_i == 0.0 && tau_q == 0.0) return env;
  const double limit = env.duration() / 4.0;
  require(std::abs(tau_i) < limit && std::abs(tau_q) < limit, "delay too large for record");
  const auto i = env.real_part();
  const auto q = env.imag_part();
  const auto di = tau_i == 0.0 ? i : fractional_delay(i, tau_i * env.sample_rate());
  const auto dq = tau_q == 0.0 ? q : fractional_delay(q, tau_q * env.sample_rate());
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {di[k], dq[k]};
  return env.with_samples(std::move(out));
}

}  // namespace unisynth
