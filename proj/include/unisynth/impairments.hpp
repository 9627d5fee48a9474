#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "unisynth/envelope.hpp"

namespace unisynth {

// Hardware impairment catalog. Each transform is pure and returns the input
// unchanged (bit-exact) at its identity parameters. Stochastic transforms are
// fully determined by their seed.

ComplexEnvelope amplitude_error(const ComplexEnvelope& env, double eps_a);
ComplexEnvelope static_phase_error(const ComplexEnvelope& env, double phi_e);

// Wiener phase: theta[0] = 0, increments ~ N(0, rate / fs).
ComplexEnvelope phase_noise(const ComplexEnvelope& env, double rate, std::uint64_t seed);
std::vector<double> phase_noise_track(std::size_t n, double sample_rate, double rate,
                                      std::uint64_t seed);

// x' = mu x + nu conj(x) for I' = (1 + g/2) I, Q' = (1 - g/2)(Q cos phi + I sin phi).
struct IqImbalanceCoefficients {
  cplx mu;
  cplx nu;
  double image_rejection_db() const;  // 10 log10 |mu/nu|^2
};
IqImbalanceCoefficients iq_imbalance_coefficients(double gain_mismatch, double skew);
ComplexEnvelope iq_imbalance(const ComplexEnvelope& env, double gain_mismatch, double skew);

ComplexEnvelope lo_feedthrough(const ComplexEnvelope& env, cplx offset);

// One-pole low-pass, unit DC gain, zero initial state.
ComplexEnvelope bandwidth_limit(const ComplexEnvelope& env, double cutoff_hz);
std::vector<double> one_pole_lowpass(std::span<const double> x, double sample_rate,
                                     double cutoff_hz);

// Mid-tread uniform quantizer with step full_scale / 2^(bits-1), saturating at
// +-full_scale.
double quantize_value(double x, int bits, double full_scale);
ComplexEnvelope quantize(const ComplexEnvelope& env, int bits, double full_scale);

ComplexEnvelope sample_jitter(const ComplexEnvelope& env, double sigma_s, std::uint64_t seed);

// G(A) = sum gain_odd[i] A^(2i+1); Phi(A) = sum phase[i] A^i.
struct AmPmPolynomial {
  std::vector<double> gain_odd{1.0};
  std::vector<double> phase;

  bool is_identity() const;
  double gain(double a) const;
  double phase_shift(double a) const;
  // True when G is nondecreasing on [0, max_amplitude].
  bool monotone_on(double max_amplitude) const;
};
ComplexEnvelope am_ampm(const ComplexEnvelope& env, const AmPmPolynomial& poly);

inline constexpr double kOffRatioInfinite = std::numeric_limits<double>::infinity();

// OFF samples carry the most recent ON sample scaled by 10^(-off_ratio_db/20)
// (zero before the first ON sample). `cancel` is added to every OFF sample
// that carries leakage. mask[k] != 0 marks ON.
ComplexEnvelope onoff_leakage(const ComplexEnvelope& env, double off_ratio_db,
                              std::span<const std::uint8_t> mask, cplx cancel = {});

// Independent delays on the I and Q rails.
ComplexEnvelope path_skew(const ComplexEnvelope& env, double tau_i, double tau_q);

}  // namespace unisynth
