#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "unisynth/envelope.hpp"

namespace unisynth {

using Bits = std::vector<std::uint8_t>;  // one bit (0/1) per element

// Unit-RMS symbol alphabet. labels[k] is the bit pattern (MSB first) carried
// by points[k].
struct Constellation {
  std::vector<cplx> points;
  std::vector<std::uint32_t> labels;
  int bits_per_symbol = 0;
  std::string scheme_name;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t index_of_label(std::uint32_t label) const;
  double min_distance() const;
  std::size_t nearest(cplx value) const;
};

namespace scheme {
struct MAsk { int order; };
struct MPsk { int order; };
struct SquareQam { int order; };
struct QpskSum { std::vector<double> ratios; };
struct StarQam { int rings; int phases; };
// Unipolar amplitude levels 0..levels-1 for any level count. Carries no bit
// labels (bits_per_symbol = 0); symbols are drawn by index.
struct MultiLevel { int levels; };
}  // namespace scheme

using ModulationScheme = std::variant<scheme::MAsk, scheme::MPsk, scheme::SquareQam, scheme::QpskSum,
                                      scheme::StarQam, scheme::MultiLevel>;

Constellation build_constellation(const ModulationScheme& scheme);

struct SymbolStream {
  std::vector<cplx> symbols;
  double symbol_period = 1.0;  // seconds
};

SymbolStream map_bits(std::span<const std::uint8_t> bits, const Constellation& c,
                      double symbol_period);

// Bits of `label` expanded MSB first.
Bits label_bits(std::uint32_t label, int bits_per_symbol);

// CSV with header label_bits,i,q; one row per point. Unlabeled alphabets
// use the point index in decimal.
std::string constellation_csv(const Constellation& c);

// Pulse-shaping filters.

enum class PulseKind { rect, sinc, raised_cosine, root_raised_cosine, gaussian };

struct PulseShape {
  PulseKind kind = PulseKind::raised_cosine;
  double rolloff = 0.35;  // roll-off for Nyquist kinds, BT product for gaussian
  int span_symbols = 16;
  int samples_per_symbol = 32;

  void validate() const;
  std::size_t tap_count() const;
  // Sample index of symbol 0's decision instant in a shaped envelope.
  std::size_t delay_samples() const { return tap_count() / 2; }
  // Symbols trimmed at each record end before metrics.
  std::size_t guard_symbols() const { return static_cast<std::size_t>(span_symbols / 2); }
};

std::vector<double> shape_filter(const PulseShape& p);

// Continuous raised-cosine impulse response, t in symbol periods, h(0) = 1.
double raised_cosine(double t, double beta);
double root_raised_cosine(double t, double beta);

// Symbols upsampled by sps and convolved with the filter taps. Output length
// is (N - 1) * sps + taps, so symbol n peaks at n * sps + delay_samples().
// Returns nothing for an empty stream.
std::optional<ComplexEnvelope> shape_symbols(const SymbolStream& s, const PulseShape& p);

// Qubit gate envelopes.

enum class GateShape { rect, gaussian, cosine };

struct GateEnvelopeSpec {
  GateShape shape = GateShape::rect;
  double duration = 20e-9;          // tau_G, seconds
  double peak_amplitude = 1.0;      // normalized drive units
  double sigma_fraction = 0.25;     // gaussian sigma as a fraction of tau_G
  bool drag_enabled = false;
  double drag_coefficient = 0.0;    // seconds; quadrature = -coef * da/dt

  void validate() const;
};

// Samples are cell averages of the continuous shape over each sample
// interval, so sum(x) * dt equals the analytic pulse area.
ComplexEnvelope gate_envelope(const GateEnvelopeSpec& g, double sample_rate);

// Continuous in-phase envelope a(t), t in [0, duration].
double gate_shape_value(const GateEnvelopeSpec& g, double t);

// Integral of a(t) over the gate for peak_amplitude = 1.
double unit_pulse_area(const GateEnvelopeSpec& g);

}  // namespace unisynth
