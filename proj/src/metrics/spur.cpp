#include <algorithm>
#include <cmath>
#include <limits>

#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

namespace {

constexpr long kMainLobe = 2;  // Hann main lobe half-width in bins

double lobe_power(const Spectrum& s, long center) {
  const long n = static_cast<long>(s.psd.size());
  double acc = 0.0;
  for (long k = center - kMainLobe; k <= center + kMainLobe; ++k)
    if (k >= 0 && k < n) acc += s.psd[static_cast<std::size_t>(k)];
  return acc * s.resolution_bw;
}

double to_db(double ratio) {
  if (ratio == std::numeric_limits<double>::infinity()) return ratio;
  return 10.0 * std::log10(ratio);
}

}  // namespace

Spectrum psd_welch(const ComplexEnvelope& env, std::size_t segment_length, double overlap) {
  require(segment_length >= 8, "segment length must be at least 8");
  require(env.size() >= segment_length, "record shorter than one segment");
  require(overlap >= 0.0 && overlap < 1.0, "overlap must be in [0, 1)");
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(segment_length * (1.0 - overlap))));
  const auto w = window_coefficients(Window::hann, segment_length);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;

  std::vector<double> acc(segment_length, 0.0);
  std::size_t segments = 0;
  std::vector<cplx> seg(segment_length);
  for (std::size_t start = 0; start + segment_length <= env.size(); start += hop) {
    for (std::size_t k = 0; k < segment_length; ++k) seg[k] = env[start + k] * w[k];
    const auto x = fft(seg);
    for (std::size_t k = 0; k < segment_length; ++k) acc[k] += std::norm(x[k]);
    ++segments;
  }

  const double fs = env.sample_rate();
  const double scale = 1.0 / (static_cast<double>(segments) * fs * w2);
  Spectrum s;
  s.resolution_bw = fs / static_cast<double>(segment_length);
  s.freqs.resize(segment_length);
  s.psd.resize(segment_length);
  const std::size_t half = segment_length / 2;
  for (std::size_t i = 0; i < segment_length; ++i) {
    const std::size_t bin = (i + segment_length - half) % segment_length;  // fftshift
    s.freqs[i] = (static_cast<double>(i) - static_cast<double>(half)) * s.resolution_bw;
    s.psd[i] = acc[bin] * scale;
  }
  return s;
}

SfdrReport spurs_sfdr(const Spectrum& spec, double carrier_hz, double band_lo_hz, double band_hi_hz) {
  require(!spec.psd.empty() && spec.psd.size() == spec.freqs.size(), "empty spectrum");
  require(band_lo_hz < band_hi_hz, "search band is empty");
  require(carrier_hz >= band_lo_hz && carrier_hz <= band_hi_hz, "carrier outside the search band");
  const long n = static_cast<long>(spec.psd.size());
  const long lo = static_cast<long>(spec.nearest_bin(band_lo_hz));
  const long hi = static_cast<long>(spec.nearest_bin(band_hi_hz));

  // Carrier: strongest bin near the nominal frequency.
  long kc = static_cast<long>(spec.nearest_bin(carrier_hz));
  for (long k = std::max(0L, kc - kMainLobe); k <= std::min(n - 1, kc + kMainLobe); ++k)
    if (spec.psd[static_cast<std::size_t>(k)] > spec.psd[static_cast<std::size_t>(kc)]) kc = k;

  std::vector<double> band(spec.psd.begin() + lo, spec.psd.begin() + hi + 1);
  std::nth_element(band.begin(), band.begin() + static_cast<long>(band.size() / 2), band.end());
  const double median = band[band.size() / 2];
  const double carrier_peak = spec.psd[static_cast<std::size_t>(kc)];
  if (!(carrier_peak > 10.0 * median)) throw PreconditionError("carrier not found above the noise floor");
  const double carrier_power = lobe_power(spec, kc);

  SfdrReport r;
  r.carrier_hz = spec.freqs[static_cast<std::size_t>(kc)];
  double floor_peak = 0.0;
  for (long k = lo; k <= hi; ++k) {
    if (std::abs(k - kc) <= 2 * kMainLobe) continue;
    const double v = spec.psd[static_cast<std::size_t>(k)];
    floor_peak = std::max(floor_peak, v);
    const double left = k > 0 ? spec.psd[static_cast<std::size_t>(k - 1)] : 0.0;
    const double right = k + 1 < n ? spec.psd[static_cast<std::size_t>(k + 1)] : 0.0;
    if (v > 10.0 * median && v >= left && v > right)
      r.spurs.push_back({spec.freqs[static_cast<std::size_t>(k)], to_db(lobe_power(spec, k) / carrier_power)});
  }
  std::sort(r.spurs.begin(), r.spurs.end(),
            [](const SpurEntry& a, const SpurEntry& b) { return a.level_dbc > b.level_dbc; });
  if (!r.spurs.empty()) {
    r.sfdr_db = -r.spurs.front().level_dbc;
  } else if (floor_peak > 0.0) {
    r.sfdr_db = to_db(carrier_power / (floor_peak * spec.resolution_bw));
  } else {
    r.sfdr_db = std::numeric_limits<double>::infinity();
  }
  return r;
}

ImageRejectionReport image_rejection(const TxChain& chain, double f_test, double sample_rate,
                                     std::size_t n, double amplitude) {
  require(n >= 16, "analysis length must be at least 16");
  require(amplitude > 0.0, "test tone amplitude must be positive");
  const double kd = f_test * static_cast<double>(n) / sample_rate;
  const double kr = std::round(kd);
  require(std::abs(kd - kr) < 1e-6, "test tone must fall on an exact DFT bin");
  const auto ni = static_cast<long>(n);
  const long k = ((static_cast<long>(kr) % ni) + ni) % ni;
  if (k == 0 || (2 * k) % ni == 0) throw PreconditionError("test tone collides with the DC or image bin");

  std::vector<cplx> tone(2 * n);
  for (std::size_t i = 0; i < tone.size(); ++i)
    tone[i] = std::polar(amplitude, kTwoPi * static_cast<double>(k) * static_cast<double>(i % n) / static_cast<double>(n));
  const auto out = run_chain(chain, ComplexEnvelope(std::move(tone), sample_rate));
  const auto spectrum = fft(out.samples().subspan(n, n));
  const double scale = 1.0 / static_cast<double>(n);

  ImageRejectionReport r;
  r.wanted = spectrum[static_cast<std::size_t>(k)] * scale;
  r.image = spectrum[static_cast<std::size_t>(ni - k)] * scale;
  r.dc = spectrum[0] * scale;
  const double pw = std::norm(r.wanted);
  r.irr_db = std::norm(r.image) > 0.0 ? to_db(pw / std::norm(r.image)) : std::numeric_limits<double>::infinity();
  r.lo_rejection_db = std::norm(r.dc) > 0.0 ? to_db(pw / std::norm(r.dc)) : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace unisynth
