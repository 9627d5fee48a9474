#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "unisynth/envelope.hpp"

namespace testutil {

using unisynth::cplx;

inline unisynth::ComplexEnvelope tone(std::size_t n, double f, double fs, double amplitude = 1.0) {
  std::vector<cplx> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = std::polar(amplitude, unisynth::kTwoPi * f * static_cast<double>(k) / fs);
  return {std::move(x), fs};
}

inline unisynth::ComplexEnvelope random_envelope(std::size_t n, std::uint64_t seed, double fs = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> x(n);
  for (auto& v : x) v = {d(rng), d(rng)};
  return {std::move(x), fs};
}

// Sum of a few in-band tones; smooth enough for interpolation tests.
inline unisynth::ComplexEnvelope bandlimited(std::size_t n, double fs) {
  std::vector<cplx> x(n);
  const double f[] = {0.013, 0.041, -0.067, 0.089};
  const double a[] = {1.0, 0.5, 0.3, 0.2};
  for (std::size_t k = 0; k < n; ++k)
    for (int m = 0; m < 4; ++m) x[k] += std::polar(a[m], unisynth::kTwoPi * f[m] * static_cast<double>(k));
  return {std::move(x), fs};
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b, std::size_t guard = 0) {
  double m = 0.0;
  for (std::size_t k = guard; k + guard < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double rms(std::span<const cplx> x) {
  double s = 0.0;
  for (auto v : x) s += std::norm(v);
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace testutil
