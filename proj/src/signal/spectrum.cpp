#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "unisynth/envelope.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

std::vector<cplx> fft(std::span<const cplx> x) {
  Eigen::FFT<double> engine;
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out;
  engine.fwd(out, in);
  return out;
}

std::vector<cplx> ifft(std::span<const cplx> x) {
  Eigen::FFT<double> engine;
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out;
  engine.inv(out, in);
  return out;
}

// Periodic Hann, so an exact-bin tone occupies exactly three bins.
std::vector<double> window_coefficients(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::hann) {
    for (std::size_t k = 0; k < n; ++k)
      w[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n)));
  }
  return w;
}

std::vector<cplx> windowed_fft(const ComplexEnvelope& env, Window window) {
  require(env.size() >= 8, "record too short for FFT (need at least 8 samples)");
  const auto w = window_coefficients(window, env.size());
  std::vector<cplx> x(env.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = env[k] * w[k];
  return fft(x);
}

double Spectrum::band_power(std::size_t first, std::size_t last) const {
  double acc = 0.0;
  for (std::size_t k = first; k <= last && k < psd.size(); ++k) acc += psd[k];
  return acc * resolution_bw;
}

std::size_t Spectrum::nearest_bin(double freq_hz) const {
  const auto it = std::lower_bound(freqs.begin(), freqs.end(), freq_hz);
  if (it == freqs.begin()) return 0;
  if (it == freqs.end()) return freqs.size() - 1;
  const auto hi = static_cast<std::size_t>(it - freqs.begin());
  return (std::abs(freqs[hi] - freq_hz) < std::abs(freqs[hi - 1] - freq_hz)) ? hi : hi - 1;
}

}  // namespace unisynth
