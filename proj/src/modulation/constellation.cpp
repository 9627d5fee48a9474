#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "unisynth/error.hpp"
#include "unisynth/modulation.hpp"

namespace unisynth {

namespace {

std::uint32_t gray(std::uint32_t k) { return k ^ (k >> 1); }

bool is_power_of_two(long v) { return v >= 2 && std::has_single_bit(static_cast<unsigned long>(v)); }

int log2_exact(long v) { return std::countr_zero(static_cast<unsigned long>(v)); }

void normalize(Constellation& c) {
  double power = 0.0;
  for (const auto& p : c.points) power += std::norm(p);
  const double rms = std::sqrt(power / static_cast<double>(c.points.size()));
  if (!(rms > 0.0)) throw PreconditionError("degenerate constellation: zero power");
  for (auto& p : c.points) p /= rms;
}

void check_distinct(const Constellation& c) {
  if (c.min_distance() < 1e-9) throw PreconditionError("degenerate constellation: coincident points");
}

Constellation ask(int order) {
  if (!is_power_of_two(order)) throw PreconditionError("M-ASK order must be a power of two");
  Constellation c;
  c.scheme_name = "m_ask(" + std::to_string(order) + ")";
  c.bits_per_symbol = log2_exact(order);
  for (int k = 0; k < order; ++k) {
    c.points.emplace_back(static_cast<double>(k), 0.0);
    c.labels.push_back(gray(static_cast<std::uint32_t>(k)));
  }
  return c;
}

Constellation psk(int order) {
  if (!is_power_of_two(order)) throw PreconditionError("M-PSK order must be a power of two");
  Constellation c;
  c.scheme_name = "m_psk(" + std::to_string(order) + ")";
  c.bits_per_symbol = log2_exact(order);
  const double offset = order == 2 ? 0.0 : kPi / order;
  for (int k = 0; k < order; ++k) {
    c.points.push_back(std::polar(1.0, kTwoPi * k / order + offset));
    c.labels.push_back(gray(static_cast<std::uint32_t>(k)));
  }
  return c;
}

// Gray-coded PAM on I (label MSBs) and Q (label LSBs).
Constellation square_qam(int order) {
  if (!is_power_of_two(order) || log2_exact(order) % 2 != 0)
    throw PreconditionError("square QAM order must be an even power of two (4, 16, 64, ...)");
  Constellation c;
  c.scheme_name = "square_qam(" + std::to_string(order) + ")";
  c.bits_per_symbol = log2_exact(order);
  const int axis_bits = c.bits_per_symbol / 2;
  const int levels = 1 << axis_bits;
  for (int i = 0; i < levels; ++i) {
    for (int q = 0; q < levels; ++q) {
      c.points.emplace_back(2.0 * i - (levels - 1), 2.0 * q - (levels - 1));
      c.labels.push_back((gray(static_cast<std::uint32_t>(i)) << axis_bits) |
                         gray(static_cast<std::uint32_t>(q)));
    }
  }
  return c;
}

// Vector sum of weighted QPSK paths; the largest path carries the label MSBs.
Constellation qpsk_sum(const std::vector<double>& ratios) {
  if (ratios.empty()) throw PreconditionError("qpsk_sum needs at least one path");
  if (ratios.size() > 8) throw PreconditionError("qpsk_sum supports at most 8 paths");
  for (double r : ratios)
    if (!(r > 0.0) || !std::isfinite(r)) throw PreconditionError("qpsk_sum ratios must be positive");
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ratios[a] > ratios[b]; });

  const auto paths = static_cast<int>(ratios.size());
  Constellation c;
  c.scheme_name = "qpsk_sum";
  c.bits_per_symbol = 2 * paths;
  const std::uint32_t count = 1u << c.bits_per_symbol;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::uint32_t label = 0; label < count; ++label) {
    cplx point{};
    for (int p = 0; p < paths; ++p) {
      const std::uint32_t pair = (label >> (2 * (paths - 1 - p))) & 3u;
      const double si = (pair & 2u) ? -1.0 : 1.0;
      const double sq = (pair & 1u) ? -1.0 : 1.0;
      point += ratios[order[static_cast<std::size_t>(p)]] * cplx(si, sq) * inv_sqrt2;
    }
    c.points.push_back(point);
    c.labels.push_back(label);
  }
  return c;
}

// Rings at radii 2^r (ring bits are the MSBs), equally spaced phases.
Constellation star_qam(int rings, int phases) {
  if (rings < 1 || phases < 1 || (rings > 1 && !is_power_of_two(rings)) ||
      (phases > 1 && !is_power_of_two(phases)) || rings * phases < 2)
    throw PreconditionError("star QAM rings and phases must be powers of two");
  Constellation c;
  c.scheme_name = "star_qam(" + std::to_string(rings) + "x" + std::to_string(phases) + ")";
  const int phase_bits = phases > 1 ? log2_exact(phases) : 0;
  c.bits_per_symbol = (rings > 1 ? log2_exact(rings) : 0) + phase_bits;
  for (int r = 0; r < rings; ++r) {
    for (int p = 0; p < phases; ++p) {
      c.points.push_back(std::polar(std::ldexp(1.0, r), kTwoPi * p / phases));
      c.labels.push_back((gray(static_cast<std::uint32_t>(r)) << phase_bits) |
                         gray(static_cast<std::uint32_t>(p)));
    }
  }
  return c;
}

Constellation multi_level(int levels) {
  if (levels < 2) throw PreconditionError("multi-level alphabet needs at least 2 levels");
  Constellation c;
  c.scheme_name = "multi_level(" + std::to_string(levels) + ")";
  c.bits_per_symbol = 0;
  for (int k = 0; k < levels; ++k) {
    c.points.emplace_back(static_cast<double>(k), 0.0);
    c.labels.push_back(static_cast<std::uint32_t>(k));
  }
  return c;
}

}  // namespace

std::size_t Constellation::index_of_label(std::uint32_t label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw PreconditionError("label not in constellation");
  return static_cast<std::size_t>(it - labels.begin());
}

double Constellation::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b)
      best = std::min(best, std::abs(points[a] - points[b]));
  return best;
}

std::size_t Constellation::nearest(cplx value) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d = std::norm(points[k] - value);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

Constellation build_constellation(const ModulationScheme& s) {
  Constellation c = std::visit(
      [](const auto& v) -> Constellation {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, scheme::MAsk>) return ask(v.order);
        else if constexpr (std::is_same_v<T, scheme::MPsk>) return psk(v.order);
        else if constexpr (std::is_same_v<T, scheme::SquareQam>) return square_qam(v.order);
        else if constexpr (std::is_same_v<T, scheme::QpskSum>) return qpsk_sum(v.ratios);
        else if constexpr (std::is_same_v<T, scheme::StarQam>) return star_qam(v.rings, v.phases);
        else return multi_level(v.levels);
      },
      s);
  check_distinct(c);
  normalize(c);
  return c;
}

Bits label_bits(std::uint32_t label, int bits_per_symbol) {
  Bits out(static_cast<std::size_t>(bits_per_symbol));
  for (int b = 0; b < bits_per_symbol; ++b)
    out[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((label >> (bits_per_symbol - 1 - b)) & 1u);
  return out;
}

SymbolStream map_bits(std::span<const std::uint8_t> bits, const Constellation& c,
                      double symbol_period) {
  require(symbol_period > 0.0, "symbol period must be positive");
  require(c.bits_per_symbol > 0, "constellation has no bit labels");
  const auto bps = static_cast<std::size_t>(c.bits_per_symbol);
  if (bits.size() % bps != 0)
    throw PreconditionError("bit count is not a multiple of bits per symbol");
  std::vector<int> by_label(std::size_t{1} << bps, -1);
  for (std::size_t k = 0; k < c.size(); ++k) by_label[c.labels[k]] = static_cast<int>(k);

  SymbolStream s;
  s.symbol_period = symbol_period;
  s.symbols.reserve(bits.size() / bps);
  for (std::size_t k = 0; k < bits.size(); k += bps) {
    std::uint32_t label = 0;
    for (std::size_t b = 0; b < bps; ++b) label = (label << 1) | (bits[k + b] & 1u);
    s.symbols.push_back(c.points[static_cast<std::size_t>(by_label[label])]);
  }
  return s;
}

std::string constellation_csv(const Constellation& c) {
  const auto number = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out = "label_bits,i,q\n";
  for (std::size_t k = 0; k < c.size(); ++k) {
    std::string label;
    if (c.bits_per_symbol > 0)
      for (auto b : label_bits(c.labels[k], c.bits_per_symbol)) label += b ? '1' : '0';
    else
      label = std::to_string(k);
    out += label + ',' + number(c.points[k].real()) + ',' + number(c.points[k].imag()) + '\n';
  }
  return out;
}

}  // namespace unisynth
