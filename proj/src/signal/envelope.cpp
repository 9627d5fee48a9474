#include "unisynth/envelope.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "unisynth/error.hpp"

namespace unisynth {

namespace {

constexpr int kHalfTaps = 8;  // kernel spans offsets -7..8 around floor(position)

// Amplitudes at or below this are treated as phase-less.
constexpr double kPhaseHoldFloor = 1e-300;

double blackman(double t) {
  if (std::abs(t) >= kHalfTaps) return 0.0;
  const double a = kPi * t / kHalfTaps;
  return 0.42 + 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
}

double sinc(double t) {
  if (t == 0.0) return 1.0;
  const double a = kPi * t;
  return std::sin(a) / a;
}

// Kernel weights for offsets m = -7..8 at fractional part mu in (0, 1),
// normalized to unit DC gain.
std::array<double, 2 * kHalfTaps> kernel(double mu) {
  std::array<double, 2 * kHalfTaps> w{};
  double sum = 0.0;
  for (int m = -kHalfTaps + 1; m <= kHalfTaps; ++m) {
    const double t = m - mu;
    const double v = sinc(t) * blackman(t);
    w[m + kHalfTaps - 1] = v;
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

template <typename T>
T interpolate(std::span<const T> x, double position) {
  const double base = std::floor(position);
  const double mu = position - base;
  const auto n = static_cast<long>(base);
  const auto len = static_cast<long>(x.size());
  if (mu == 0.0) return (n >= 0 && n < len) ? x[n] : T{};
  const auto w = kernel(mu);
  T acc{};
  for (int m = -kHalfTaps + 1; m <= kHalfTaps; ++m) {
    const long idx = n + m;
    if (idx < 0 || idx >= len) continue;
    acc += w[m + kHalfTaps - 1] * x[idx];
  }
  return acc;
}

template <typename T>
std::vector<T> delay_samples(std::span<const T> x, double d) {
  std::vector<T> out(x.size());
  if (d == 0.0) {
    std::copy(x.begin(), x.end(), out.begin());
    return out;
  }
  // Delays given as whole samples through seconds*rate round to exact shifts.
  if (std::abs(d - std::round(d)) < 1e-9) d = std::round(d);
  const double whole = std::floor(d);
  const double mu = d - whole;
  const auto shift = static_cast<long>(whole);
  const auto len = static_cast<long>(x.size());
  if (mu == 0.0) {
    for (long k = 0; k < len; ++k) {
      const long src = k - shift;
      out[k] = (src >= 0 && src < len) ? x[src] : T{};
    }
    return out;
  }
  // output[k] = x at (k - d) = (k - shift - 1) + (1 - mu)
  const auto w = kernel(1.0 - mu);
  for (long k = 0; k < len; ++k) {
    const long n = k - shift - 1;
    T acc{};
    for (int m = -kHalfTaps + 1; m <= kHalfTaps; ++m) {
      const long idx = n + m;
      if (idx < 0 || idx >= len) continue;
      acc += w[m + kHalfTaps - 1] * x[idx];
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

ComplexEnvelope::ComplexEnvelope(std::vector<cplx> samples, double sample_rate, double t0)
    : samples_(std::move(samples)), sample_rate_(sample_rate), t0_(t0) {
  require(sample_rate_ > 0.0 && std::isfinite(sample_rate_), "sample rate must be positive");
  require(!samples_.empty(), "envelope must have at least one sample");
}

double ComplexEnvelope::mean_power() const noexcept {
  double acc = 0.0;
  for (const auto& s : samples_) acc += std::norm(s);
  return acc / static_cast<double>(samples_.size());
}

double ComplexEnvelope::peak_amplitude() const noexcept {
  double peak = 0.0;
  for (const auto& s : samples_) peak = std::max(peak, std::abs(s));
  return peak;
}

ComplexEnvelope ComplexEnvelope::with_samples(std::vector<cplx> samples) const {
  return ComplexEnvelope(std::move(samples), sample_rate_, t0_);
}

ComplexEnvelope ComplexEnvelope::slice(std::size_t first, std::size_t count) const {
  require(first + count <= samples_.size() && count > 0, "slice out of range");
  std::vector<cplx> part(samples_.begin() + static_cast<long>(first),
                         samples_.begin() + static_cast<long>(first + count));
  return ComplexEnvelope(std::move(part), sample_rate_, time(first));
}

std::vector<double> ComplexEnvelope::real_part() const {
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(), [](cplx s) { return s.real(); });
  return out;
}

std::vector<double> ComplexEnvelope::imag_part() const {
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(), [](cplx s) { return s.imag(); });
  return out;
}

ComplexEnvelope make_envelope(std::span<const double> i, std::span<const double> q,
                              double sample_rate) {
  require(i.size() == q.size(), "I and Q lengths differ");
  require(!i.empty(), "envelope must have at least one sample");
  require(sample_rate > 0.0, "sample rate must be positive");
  std::vector<cplx> s(i.size());
  for (std::size_t k = 0; k < i.size(); ++k) s[k] = {i[k], q[k]};
  return ComplexEnvelope(std::move(s), sample_rate);
}

double wrap_phase(double radians) {
  double r = std::remainder(radians, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

PolarTracks to_polar(const ComplexEnvelope& env) {
  PolarTracks t;
  t.sample_rate = env.sample_rate();
  t.t0 = env.t0();
  t.amplitude.resize(env.size());
  t.phase.resize(env.size());
  double unwrapped = 0.0;
  double last_arg = 0.0;
  bool have_phase = false;
  for (std::size_t k = 0; k < env.size(); ++k) {
    const double a = std::abs(env[k]);
    t.amplitude[k] = a;
    if (a > kPhaseHoldFloor) {
      const double arg = std::arg(env[k]);
      unwrapped = have_phase ? unwrapped + wrap_phase(arg - last_arg) : arg;
      last_arg = arg;
      have_phase = true;
    }
    t.phase[k] = unwrapped;
  }
  return t;
}

ComplexEnvelope from_polar(const PolarTracks& tracks) {
  require(tracks.amplitude.size() == tracks.phase.size(), "polar track lengths differ");
  std::vector<cplx> s(tracks.amplitude.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    require(tracks.amplitude[k] >= 0.0, "negative amplitude in polar track");
    s[k] = std::polar(tracks.amplitude[k], tracks.phase[k]);
  }
  return ComplexEnvelope(std::move(s), tracks.sample_rate, tracks.t0);
}

ComplexEnvelope fractional_delay(const ComplexEnvelope& env, double tau) {
  require(std::abs(tau) < env.duration() / 4.0, "delay too large for record");
  if (tau == 0.0) return env;
  return env.with_samples(delay_samples(env.samples(), tau * env.sample_rate()));
}

std::vector<double> fractional_delay(std::span<const double> x, double delay_samples_count) {
  return delay_samples(x, delay_samples_count);
}

cplx interpolate_at(std::span<const cplx> x, double position) {
  return interpolate(x, position);
}

}  // namespace unisynth
