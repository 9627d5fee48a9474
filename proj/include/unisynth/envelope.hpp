#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace unisynth {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Uniformly sampled complex baseband signal x(t) = I(t) + jQ(t).
// Immutable after construction; every transform returns a new envelope.
class ComplexEnvelope {
 public:
  ComplexEnvelope(std::vector<cplx> samples, double sample_rate, double t0 = 0.0);

  std::span<const cplx> samples() const noexcept { return samples_; }
  const cplx& operator[](std::size_t k) const noexcept { return samples_[k]; }
  std::size_t size() const noexcept { return samples_.size(); }

  double sample_rate() const noexcept { return sample_rate_; }
  double dt() const noexcept { return 1.0 / sample_rate_; }
  double t0() const noexcept { return t0_; }
  double duration() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) / sample_rate_; }

  double mean_power() const noexcept;
  double peak_amplitude() const noexcept;

  // New envelope on the same time grid.
  ComplexEnvelope with_samples(std::vector<cplx> samples) const;
  ComplexEnvelope slice(std::size_t first, std::size_t count) const;

  std::vector<double> real_part() const;
  std::vector<double> imag_part() const;

  friend bool operator==(const ComplexEnvelope&, const ComplexEnvelope&) = default;

 private:
  std::vector<cplx> samples_;
  double sample_rate_;
  double t0_;
};

// Amplitude / unwrapped-phase decomposition A(t) e^{j phi(t)}.
struct PolarTracks {
  std::vector<double> amplitude;
  std::vector<double> phase;
  double sample_rate = 1.0;
  double t0 = 0.0;
};

// Two-sided power spectral density.
struct Spectrum {
  std::vector<double> freqs;  // Hz, strictly increasing
  std::vector<double> psd;    // linear power per Hz
  double resolution_bw = 0.0; // bin spacing, Hz

  // Power summed over bins [first, last] inclusive.
  double band_power(std::size_t first, std::size_t last) const;
  std::size_t nearest_bin(double freq_hz) const;
};

enum class Window { rect, hann };

ComplexEnvelope make_envelope(std::span<const double> i, std::span<const double> q,
                              double sample_rate);

PolarTracks to_polar(const ComplexEnvelope& env);
ComplexEnvelope from_polar(const PolarTracks& tracks);

// Band-limited delay by tau seconds (windowed-sinc, 16 taps, Blackman).
// Whole-sample delays are exact shifts; samples shifted in from outside the
// record are zero.
ComplexEnvelope fractional_delay(const ComplexEnvelope& env, double tau);

// Real-valued counterpart used for amplitude/phase tracks and skewed rails.
std::vector<double> fractional_delay(std::span<const double> x, double delay_samples);

// Band-limited value of the sequence at a fractional sample position.
cplx interpolate_at(std::span<const cplx> x, double position);

// Number of samples at each record end affected by the interpolation kernel.
inline constexpr std::size_t kInterpolationGuard = 8;

// Unnormalized DFT of the windowed record; bin k is frequency k*fs/N (wrapped).
std::vector<cplx> windowed_fft(const ComplexEnvelope& env, Window window);

std::vector<cplx> fft(std::span<const cplx> x);
std::vector<cplx> ifft(std::span<const cplx> x);

std::vector<double> window_coefficients(Window window, std::size_t n);

// Wraps an angle into (-pi, pi].
double wrap_phase(double radians);

}  // namespace unisynth
