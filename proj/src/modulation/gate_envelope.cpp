#include <algorithm>
#include <cmath>

#include "unisynth/error.hpp"
#include "unisynth/modulation.hpp"

namespace unisynth {

namespace {

// Gaussian truncation point in units of sigma.
constexpr double kTruncSigmas = 2.0;

double gaussian_baseline() { return std::exp(-0.5 * kTruncSigmas * kTruncSigmas); }

// Antiderivative of the unit-peak shape, F(0) = 0.
double unit_antiderivative(const GateEnvelopeSpec& g, double t) {
  const double tau = g.duration;
  t = std::clamp(t, 0.0, tau);
  switch (g.shape) {
    case GateShape::rect:
      return t;
    case GateShape::cosine:
      return 0.5 * (t - tau / kTwoPi * std::sin(kTwoPi * t / tau));
    case GateShape::gaussian: {
      const double sigma = g.sigma_fraction * tau;
      const double c = 0.5 * tau;
      const double lo = c - kTruncSigmas * sigma;
      const double u = std::clamp(t, lo, c + kTruncSigmas * sigma);
      const double g0 = gaussian_baseline();
      const double scale = sigma * std::sqrt(kPi / 2.0);
      const double bell = scale * (std::erf((u - c) / (sigma * std::sqrt(2.0))) -
                                   std::erf((lo - c) / (sigma * std::sqrt(2.0))));
      return (bell - g0 * (u - lo)) / (1.0 - g0);
    }
  }
  return 0.0;
}

double unit_shape(const GateEnvelopeSpec& g, double t) {
  const double tau = g.duration;
  if (t < 0.0 || t > tau) return 0.0;
  switch (g.shape) {
    case GateShape::rect:
      return 1.0;
    case GateShape::cosine:
      return 0.5 * (1.0 - std::cos(kTwoPi * t / tau));
    case GateShape::gaussian: {
      const double sigma = g.sigma_fraction * tau;
      const double u = t - 0.5 * tau;
      if (std::abs(u) > kTruncSigmas * sigma) return 0.0;
      const double g0 = gaussian_baseline();
      return (std::exp(-0.5 * u * u / (sigma * sigma)) - g0) / (1.0 - g0);
    }
  }
  return 0.0;
}

}  // namespace

void GateEnvelopeSpec::validate() const {
  require(duration > 0.0 && std::isfinite(duration), "gate duration must be positive");
  require(peak_amplitude >= 0.0 && std::isfinite(peak_amplitude), "peak amplitude must be nonnegative");
  if (shape == GateShape::gaussian)
    require(sigma_fraction > 0.0 && sigma_fraction <= 0.25,
            "gaussian sigma fraction must be in (0, 0.25] so the truncated pulse fits the gate");
  require(std::isfinite(drag_coefficient), "DRAG coefficient must be finite");
}

double gate_shape_value(const GateEnvelopeSpec& g, double t) {
  return g.peak_amplitude * unit_shape(g, t);
}

double unit_pulse_area(const GateEnvelopeSpec& g) {
  return unit_antiderivative(g, g.duration);
}

ComplexEnvelope gate_envelope(const GateEnvelopeSpec& g, double sample_rate) {
  g.validate();
  require(sample_rate > 0.0, "sample rate must be positive");
  const double exact = g.duration * sample_rate;
  const double rounded = std::round(exact);
  require(std::abs(exact - rounded) <= 1e-9 * exact,
          "gate duration must be a whole number of samples");
  require(rounded >= 64.0, "gate needs at least 64 samples");
  const auto n = static_cast<std::size_t>(rounded);
  const double h = g.duration / rounded;

  std::vector<cplx> s(n);
  double f_prev = 0.0;
  double a_prev = unit_shape(g, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t1 = (k + 1 == n) ? g.duration : static_cast<double>(k + 1) * h;
    const double f1 = unit_antiderivative(g, t1);
    const double a1 = unit_shape(g, t1);
    const double in_phase = g.peak_amplitude * (f1 - f_prev) / h;
    double quad = 0.0;
    if (g.drag_enabled) quad = -g.drag_coefficient * g.peak_amplitude * (a1 - a_prev) / h;
    s[k] = {in_phase, quad};
    f_prev = f1;
    a_prev = a1;
  }
  return ComplexEnvelope(std::move(s), sample_rate);
}

}  // namespace unisynth
