#include <cmath>

#include "unisynth/error.hpp"
#include "unisynth/modulation.hpp"

namespace unisynth {

namespace {

double sinc(double t) {
  if (t == 0.0) return 1.0;
  return std::sin(kPi * t) / (kPi * t);
}

}  // namespace

void PulseShape::validate() const {
  if (kind == PulseKind::gaussian) {
    require(rolloff > 0.0 && rolloff <= 1.0, "gaussian BT product must be in (0, 1]");
  } else {
    require(rolloff >= 0.0 && rolloff <= 1.0, "roll-off must be in [0, 1]");
  }
  require(span_symbols >= 4, "filter span must be at least 4 symbols");
  require(span_symbols % 2 == 0, "filter span must be even");
  require(samples_per_symbol >= 4, "samples per symbol must be at least 4");
}

std::size_t PulseShape::tap_count() const {
  if (kind == PulseKind::rect) return static_cast<std::size_t>(samples_per_symbol);
  return static_cast<std::size_t>(span_symbols) * static_cast<std::size_t>(samples_per_symbol) + 1;
}

double raised_cosine(double t, double beta) {
  if (beta == 0.0) return sinc(t);
  const double x = 2.0 * beta * t;
  if (std::abs(std::abs(x) - 1.0) < 1e-10) return kPi / 4.0 * sinc(1.0 / (2.0 * beta));
  return sinc(t) * std::cos(kPi * beta * t) / (1.0 - x * x);
}

double root_raised_cosine(double t, double beta) {
  if (t == 0.0) return 1.0 - beta + 4.0 * beta / kPi;
  if (beta > 0.0 && std::abs(std::abs(4.0 * beta * t) - 1.0) < 1e-10) {
    const double a = kPi / (4.0 * beta);
    return beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
  }
  const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
  const double den = kPi * t * (1.0 - 16.0 * beta * beta * t * t);
  return num / den;
}

std::vector<double> shape_filter(const PulseShape& p) {
  p.validate();
  const std::size_t n = p.tap_count();
  if (p.kind == PulseKind::rect) return std::vector<double>(n, 1.0);

  std::vector<double> h(n);
  const auto center = static_cast<double>(n / 2);
  const double sps = p.samples_per_symbol;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) - center) / sps;
    switch (p.kind) {
      case PulseKind::sinc: h[k] = sinc(t); break;
      case PulseKind::raised_cosine: h[k] = raised_cosine(t, p.rolloff); break;
      case PulseKind::root_raised_cosine: h[k] = root_raised_cosine(t, p.rolloff); break;
      case PulseKind::gaussian: {
        const double b = p.rolloff;
        h[k] = std::exp(-2.0 * kPi * kPi * b * b * t * t / std::log(2.0));
        break;
      }
      case PulseKind::rect: break;
    }
  }
  // Zero crossings of the Nyquist kinds land on exact sample positions.
  if (p.kind == PulseKind::sinc || p.kind == PulseKind::raised_cosine) {
    for (std::size_t k = 0; k < n; ++k) {
      const long off = static_cast<long>(k) - static_cast<long>(n / 2);
      if (off != 0 && off % p.samples_per_symbol == 0) h[k] = 0.0;
    }
  }
  return h;
}

std::optional<ComplexEnvelope> shape_symbols(const SymbolStream& s, const PulseShape& p) {
  require(s.symbol_period > 0.0, "symbol period must be positive");
  if (s.symbols.empty()) return std::nullopt;
  const auto h = shape_filter(p);
  const auto sps = static_cast<std::size_t>(p.samples_per_symbol);
  const std::size_t taps = h.size();
  std::vector<cplx> out((s.symbols.size() - 1) * sps + taps);
  for (std::size_t n = 0; n < s.symbols.size(); ++n) {
    const cplx sym = s.symbols[n];
    if (sym == cplx{}) continue;
    cplx* dst = out.data() + n * sps;
    for (std::size_t k = 0; k < taps; ++k) dst[k] += sym * h[k];
  }
  return ComplexEnvelope(std::move(out), static_cast<double>(sps) / s.symbol_period);
}

}  // namespace unisynth
