#include <bitset>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "test_util.hpp"
#include "unisynth/error.hpp"
#include "unisynth/modulation.hpp"

using namespace unisynth;

namespace {

double point_rms(const Constellation& c) { return testutil::rms(c.points); }

int popcount(std::uint32_t v) { return static_cast<int>(std::bitset<32>(v).count()); }

// Closed-form raised cosine with the singular points handled by limit.
double rc_oracle(double t, double beta) {
  const double s = t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
  const double den = 1.0 - 4.0 * beta * beta * t * t;
  if (std::abs(den) < 1e-12) return kPi / 4.0 * s;
  return s * std::cos(kPi * beta * t) / den;
}

// Highest frequency (cycles per sample) at which the tap magnitude response
// is within 40 dB of its DC value.
double bandwidth_40db(const std::vector<double>& taps) {
  const int nf = 4096;
  double dc = 0.0;
  for (double h : taps) dc += h;
  double edge = 0.0;
  for (int i = 0; i <= nf / 2; ++i) {
    const double f = static_cast<double>(i) / nf;
    cplx acc{};
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * std::polar(1.0, -kTwoPi * f * static_cast<double>(k));
    if (20.0 * std::log10(std::abs(acc) / std::abs(dc)) > -40.0) edge = f;
  }
  return edge;
}

double max_isi(const Constellation& c, int span, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
  SymbolStream s;
  s.symbol_period = 1e-9;
  for (int k = 0; k < 400; ++k) s.symbols.push_back(c.points[pick(rng)]);
  PulseShape p;
  p.rolloff = 0.35;
  p.span_symbols = span;
  p.samples_per_symbol = 32;
  const auto env = shape_symbols(s, p).value();
  double err = 0.0;
  for (std::size_t n = 0; n < s.symbols.size(); ++n)
    err = std::max(err, std::abs(env[n * 32 + p.delay_samples()] - s.symbols[n]));
  return err;
}

double area(const ComplexEnvelope& e) {
  double s = 0.0;
  for (auto v : e.samples()) s += v.real();
  return s * e.dt();
}

}  // namespace

TEST_CASE("every constellation has unit RMS and distinct points") {
  const std::vector<ModulationScheme> schemes{
      scheme::MAsk{2},      scheme::MAsk{4},      scheme::MPsk{2},          scheme::MPsk{4},
      scheme::MPsk{8},      scheme::SquareQam{4}, scheme::SquareQam{16},    scheme::SquareQam{64},
      scheme::QpskSum{{1}}, scheme::QpskSum{{2, 1}}, scheme::QpskSum{{4, 2, 1}}, scheme::StarQam{2, 8},
      scheme::MultiLevel{3}};
  for (const auto& s : schemes) {
    const auto c = build_constellation(s);
    CAPTURE(c.scheme_name);
    CHECK(std::abs(point_rms(c) - 1.0) < 1e-12);
    CHECK(c.min_distance() > 1e-9);
    if (c.bits_per_symbol > 0) CHECK(c.size() == (std::size_t{1} << c.bits_per_symbol));
  }
}

TEST_CASE("QPSK points") {
  const auto c = build_constellation(scheme::MPsk{4});
  REQUIRE(c.size() == 4);
  const double a = 1.0 / std::sqrt(2.0);
  for (auto p : c.points) {
    CHECK(std::abs(std::abs(p.real()) - a) < 1e-12);
    CHECK(std::abs(std::abs(p.imag()) - a) < 1e-12);
  }
}

TEST_CASE("16-QAM minimum distance and Gray adjacency") {
  const auto c = build_constellation(scheme::SquareQam{16});
  CHECK(std::abs(c.min_distance() - 2.0 / std::sqrt(10.0)) < 1e-12);
  for (const auto& order : {16, 64}) {
    const auto q = build_constellation(scheme::SquareQam{order});
    const double d = q.min_distance();
    for (std::size_t a = 0; a < q.size(); ++a)
      for (std::size_t b = a + 1; b < q.size(); ++b)
        if (std::abs(std::abs(q.points[a] - q.points[b]) - d) < 1e-9)
          CHECK(popcount(q.labels[a] ^ q.labels[b]) == 1);
  }
}

TEST_CASE("qpsk_sum with ratio 2 equals 16-QAM as a point set") {
  const auto s = build_constellation(scheme::QpskSum{{2, 1}});
  const auto q = build_constellation(scheme::SquareQam{16});
  REQUIRE(s.size() == q.size());
  for (auto p : s.points) {
    double best = 1e9;
    for (auto r : q.points) best = std::min(best, std::abs(p - r));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("qpsk_sum cardinality is 4^M") {
  for (int m = 1; m <= 3; ++m) {
    std::vector<double> ratios;
    for (int k = m - 1; k >= 0; --k) ratios.push_back(std::ldexp(1.0, k));
    const auto c = build_constellation(scheme::QpskSum{ratios});
    std::set<std::pair<long long, long long>> distinct;
    for (auto p : c.points) distinct.insert({std::llround(p.real() * 1e9), std::llround(p.imag() * 1e9)});
    CHECK(distinct.size() == (std::size_t{1} << (2 * m)));
  }
}

TEST_CASE("constellation preconditions") {
  CHECK_THROWS_AS(build_constellation(scheme::MAsk{3}), PreconditionError);
  CHECK_THROWS_AS(build_constellation(scheme::MPsk{6}), PreconditionError);
  CHECK_THROWS_AS(build_constellation(scheme::SquareQam{8}), PreconditionError);
  CHECK_THROWS_AS(build_constellation(scheme::StarQam{3, 4}), PreconditionError);
  CHECK_THROWS_AS(build_constellation(scheme::QpskSum{{1, -1}}), PreconditionError);
  CHECK_THROWS_AS(build_constellation(scheme::QpskSum{{1, 1}}), PreconditionError);
}

TEST_CASE("map_bits") {
  const auto c = build_constellation(scheme::MPsk{4});
  const Bits all{0, 0, 0, 1, 1, 0, 1, 1};
  const auto s = map_bits(all, c, 1e-9);
  REQUIRE(s.symbols.size() == 4);
  std::set<std::pair<double, double>> distinct;
  for (auto v : s.symbols) distinct.insert({v.real(), v.imag()});
  CHECK(distinct.size() == 4);
  for (std::uint32_t label = 0; label < 4; ++label)
    CHECK(s.symbols[label] == c.points[c.index_of_label(label)]);

  CHECK(map_bits(Bits{}, c, 1e-9).symbols.empty());

  const auto q = build_constellation(scheme::SquareQam{16});
  const auto z = map_bits(Bits(16, 0), q, 1e-9);
  REQUIRE(z.symbols.size() == 4);
  for (auto v : z.symbols) CHECK(v == q.points[q.index_of_label(0)]);

  CHECK_THROWS_AS(map_bits(Bits{0, 1, 1}, c, 1e-9), PreconditionError);
}

TEST_CASE("label_bits is MSB first") {
  CHECK(label_bits(0b1011, 4) == Bits{1, 0, 1, 1});
  CHECK(label_bits(1, 2) == Bits{0, 1});
}

TEST_CASE("raised cosine taps") {
  for (double beta : {0.0, 0.25, 0.35, 0.5, 1.0}) {
    CHECK(raised_cosine(0.0, beta) == 1.0);
    for (double t : {0.13, 0.7, 1.37, 2.5, 3.9})
      CHECK(std::abs(raised_cosine(t, beta) - rc_oracle(t, beta)) < 1e-12);
  }
  PulseShape p;
  p.kind = PulseKind::raised_cosine;
  p.rolloff = 0.5;
  p.span_symbols = 16;
  p.samples_per_symbol = 8;
  const auto h = shape_filter(p);
  const std::size_t c = p.delay_samples();
  CHECK(h[c] == 1.0);
  for (int k = 1; k <= p.span_symbols / 2; ++k) {
    const std::size_t off = static_cast<std::size_t>(k * p.samples_per_symbol);
    if (c + off < h.size()) CHECK(std::abs(h[c + off]) < 1e-12);
    CHECK(std::abs(h[c - off]) < 1e-12);
  }
  for (std::size_t k = 1; k <= c && c + k < h.size(); ++k) CHECK(std::abs(h[c + k] - h[c - k]) < 1e-15);
}

TEST_CASE("wider roll-off occupies more bandwidth") {
  PulseShape narrow, wide;
  narrow.rolloff = 0.25;
  wide.rolloff = 1.0;
  narrow.samples_per_symbol = wide.samples_per_symbol = 8;
  narrow.span_symbols = wide.span_symbols = 32;
  CHECK(bandwidth_40db(shape_filter(wide)) > bandwidth_40db(shape_filter(narrow)));
}

TEST_CASE("shape_symbols basic cases") {
  PulseShape rect;
  rect.kind = PulseKind::rect;
  rect.samples_per_symbol = 8;
  rect.span_symbols = 4;
  const auto box = shape_symbols({{cplx(1, 0)}, 1e-9}, rect).value();
  std::size_t ones = 0;
  for (auto v : box.samples()) {
    CHECK((v == cplx(1, 0) || v == cplx(0, 0)));
    ones += v == cplx(1, 0);
  }
  CHECK(ones == 8);

  PulseShape rc;
  const auto zero = shape_symbols({std::vector<cplx>(10), 1e-9}, rc).value();
  for (auto v : zero.samples()) CHECK(v == cplx(0, 0));
  CHECK_FALSE(shape_symbols({{}, 1e-9}, rc).has_value());
}

TEST_CASE("raised-cosine shaping has no ISI at decision instants") {
  for (const auto& s : {ModulationScheme{scheme::MPsk{4}}, ModulationScheme{scheme::SquareQam{16}}}) {
    const auto c = build_constellation(s);
    CHECK(max_isi(c, 16, 21) < 1e-3);
    CHECK(max_isi(c, 32, 22) < 1e-5);
  }
}

TEST_CASE("pulse shape validation") {
  PulseShape p;
  p.rolloff = 1.5;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
  p = {};
  p.span_symbols = 2;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
  p = {};
  p.samples_per_symbol = 2;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
}

TEST_CASE("rectangular gate area") {
  GateEnvelopeSpec g;
  g.shape = GateShape::rect;
  g.duration = 20e-9;
  g.peak_amplitude = 1.0;
  const auto e = gate_envelope(g, 1024 / 20e-9);
  CHECK(std::abs(area(e) - 20e-9) / 20e-9 < 1e-12);
}

TEST_CASE("gaussian gate area matches quadrature of the truncated bell") {
  GateEnvelopeSpec g;
  g.shape = GateShape::gaussian;
  g.duration = 20e-9;
  g.sigma_fraction = 0.25;
  g.peak_amplitude = 0.8;
  const double sigma = g.sigma_fraction * g.duration, c = g.duration / 2, base = std::exp(-2.0);
  auto bell = [&](double t) {
    const double u = t - c;
    if (std::abs(u) > 2 * sigma) return 0.0;
    return g.peak_amplitude * (std::exp(-u * u / (2 * sigma * sigma)) - base) / (1 - base);
  };
  const double reference =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(bell, c - 2 * sigma, c + 2 * sigma, 15, 1e-14);
  for (double t : {0.0, 3e-9, 10e-9, 14.2e-9, 20e-9}) CHECK(std::abs(gate_shape_value(g, t) - bell(t)) < 1e-12);
  CHECK(std::abs(unit_pulse_area(g) * g.peak_amplitude - reference) / reference < 1e-9);
  const auto e = gate_envelope(g, 1024 / 20e-9);
  CHECK(std::abs(area(e) - reference) / reference < 1e-9);
  CHECK(std::abs(e[0]) < 1e-3 * g.peak_amplitude);
}

TEST_CASE("gate area is linear in peak amplitude") {
  for (auto shape : {GateShape::rect, GateShape::gaussian, GateShape::cosine}) {
    GateEnvelopeSpec g;
    g.shape = shape;
    g.peak_amplitude = 0.37;
    const double a1 = area(gate_envelope(g, 1024 / g.duration));
    g.peak_amplitude = 0.74;
    const double a2 = area(gate_envelope(g, 1024 / g.duration));
    CHECK(std::abs(a2 - 2 * a1) <= 1e-12 * std::abs(a2));
  }
}

TEST_CASE("DRAG quadrature vanishes at the center of a symmetric pulse") {
  GateEnvelopeSpec g;
  g.shape = GateShape::gaussian;
  g.duration = 1025e-12;
  g.drag_enabled = true;
  g.drag_coefficient = 1e-10;
  const auto e = gate_envelope(g, 1e12);
  REQUIRE(e.size() == 1025);
  CHECK(std::abs(e[512].imag()) < 1e-12);
  for (std::size_t k = 0; k < e.size(); ++k) CHECK(std::abs(e[k].imag() + e[e.size() - 1 - k].imag()) < 1e-9);
  double peak = 0.0;
  for (auto v : e.samples()) peak = std::max(peak, std::abs(v.imag()));
  CHECK(peak > 1e-3);
}

TEST_CASE("gate envelope preconditions") {
  GateEnvelopeSpec g;
  CHECK_THROWS_AS(gate_envelope(g, 63 / g.duration), PreconditionError);
  g.duration = 0;
  CHECK_THROWS_AS(gate_envelope(g, 1e12), PreconditionError);
  g = {};
  g.peak_amplitude = -1;
  CHECK_THROWS_AS(gate_envelope(g, 1e12), PreconditionError);
}
